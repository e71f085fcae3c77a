#include "denest/constructor.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "denest/metrics.hpp"

namespace denest {

void IndicatorSpec::validate() const {
  require(!value.empty(), "IndicatorSpec: empty value");
  require(q_lo >= 0.0 && q_hi <= 1.0 && q_lo < q_hi, "IndicatorSpec: bad interval");
  require(kappa > 0.0, "IndicatorSpec: kappa must be positive");
  if (2.0 * kappa >= q_hi - q_lo)
    throw InfeasibleError("IndicatorSpec: ramp width 2*kappa must be below the interval length");
}

StepGenerator step_from_measure(const DiscreteMeasure& m) {
  std::vector<double> cuts(m.size() + 1, 0.0);
  for (std::size_t t = 0; t < m.size(); ++t) cuts[t + 1] = cuts[t] + m.weights[t];
  cuts.back() = 1.0;  // weights sum to 1 within 1e-12 by the measure invariant
  return StepGenerator::create(std::move(cuts), m.atoms);
}

namespace {

// Appends the 4-unit indicator block for one interval. Slopes are 1/kappa;
// the inner thresholds are expressed as outer +- 1 so plateau cancellation
// is as clean as floating point allows.
void append_indicator_block(ShallowGenerator& g, const Point& value, double q_lo,
                            double q_hi, double kappa) {
  const double w = 1.0 / kappa;
  const double b0 = q_lo * w;
  const double b3 = q_hi * w;
  const double bs[4] = {b0, b0 + 1.0, b3 - 1.0, b3};
  const double signs[4] = {1.0, -1.0, -1.0, 1.0};
  const int base = g.hidden;
  const int d = g.out_dim;
  g.hidden += 4;
  for (int k = 0; k < 4; ++k) {
    g.w_in.push_back(w);
    g.b.push_back(bs[k]);
  }
  // w_out stays row-major: rebuild rows with the 4 new columns appended
  std::vector<double> w_out(static_cast<std::size_t>(d) * g.hidden, 0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < base; ++j)
      w_out[static_cast<std::size_t>(i) * g.hidden + j] =
          g.w_out[static_cast<std::size_t>(i) * base + j];
    for (int k = 0; k < 4; ++k)
      w_out[static_cast<std::size_t>(i) * g.hidden + base + k] = value[i] * signs[k];
  }
  g.w_out = std::move(w_out);
}

}  // namespace

ShallowGenerator relu_indicator(const IndicatorSpec& spec) {
  spec.validate();
  ShallowGenerator g = ShallowGenerator::zeros(static_cast<int>(spec.value.size()), 0);
  append_indicator_block(g, spec.value, spec.q_lo, spec.q_hi, spec.kappa);
  return g;
}

ShallowGenerator relu_from_step(const StepGenerator& s, double kappa) {
  require(kappa > 0.0, "relu_from_step: kappa must be positive");
  if (2.0 * kappa >= s.min_interval_length())
    throw InfeasibleError("relu_from_step: 2*kappa must be below the minimum interval length");
  ShallowGenerator g = ShallowGenerator::zeros(s.out_dim, 0);
  for (std::size_t t = 0; t < s.intervals(); ++t)
    append_indicator_block(g, s.values[t], s.cuts[t], s.cuts[t + 1], kappa);
  return g;
}

double l2_step_gap(const StepGenerator& s, double kappa) {
  require(kappa > 0.0, "l2_step_gap: kappa must be positive");
  if (2.0 * kappa >= s.min_interval_length())
    throw InfeasibleError("l2_step_gap: 2*kappa must be below the minimum interval length");
  double sum = 0.0;
  for (const auto& v : s.values) sum += norm_sq(v);
  return (2.0 / 3.0) * kappa * sum;
}

GenerativeDensity brute_force_two_mixture(const Point& m_vec, double kappa) {
  require(!m_vec.empty(), "brute_force_two_mixture: empty m vector");
  require(kappa > 0.0 && kappa < 0.25, "brute_force_two_mixture: kappa must be in (0, 0.25)");
  Point neg(m_vec.size());
  for (std::size_t i = 0; i < m_vec.size(); ++i) neg[i] = -m_vec[i];
  const StepGenerator step = StepGenerator::create({0.0, 0.5, 1.0}, {m_vec, neg});
  GenerativeDensity p;
  p.generator = relu_from_step(step, kappa);
  p.sigma = 1.0;
  return p;
}

SieveSpec PipelineResult::sieve() const {
  SieveSpec s;
  s.F = a_sigma;
  s.M = 1.0 / kappa;
  s.d1 = generator.hidden;
  s.sigma_min = sigma;
  s.sigma_max = std::max(sigma, 1.0);
  return s;
}

namespace {

QuadratureGrid pipeline_grid(int dim, double reach, double sigma, int points) {
  return QuadratureGrid::symmetric(dim, reach + 8.0 * sigma, points);
}

DensityFn mixture_fn(const DiscreteMeasure& m, double sigma) {
  return [m, sigma](const Point& x) { return mixture_density(m, sigma, x); };
}

}  // namespace

PipelineResult theorem1_generator(const DiscreteMeasure& m, double sigma,
                                  const PipelineOptions& opt) {
  require(sigma > 0.0, "theorem1_generator: sigma must be positive");
  require(opt.beta > 0.0 && opt.tau3 > 0.0 && opt.c4 > 0.0,
          "theorem1_generator: beta, tau3, c4 must be positive");
  const int d = m.dim;
  const double beta = opt.beta;

  PipelineResult res;
  res.sigma = sigma;
  if (opt.discretize) {
    require(sigma < 1.0, "theorem1_generator: full pipeline requires sigma < 1");
    res.a_sigma = opt.c4 * std::pow(std::log(1.0 / sigma), opt.tau3);
  } else {
    // stand-in box: direct mode has no grid, only the atoms' reach
    res.a_sigma = 0.0;
    for (const auto& a : m.atoms)
      for (double c : a) res.a_sigma = std::max(res.a_sigma, std::abs(c));
  }
  res.kappa = opt.kappa_override > 0.0
                  ? opt.kappa_override
                  : 0.5 * std::pow(sigma, 2.0 * beta + 2.0 * d + 3.0);

  const QuadratureGrid grid = pipeline_grid(d, res.a_sigma, sigma, opt.quad_points);
  auto run_stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const InfeasibleError& e) {
      throw InfeasibleError(std::string("stage ") + name + ": " + e.what());
    }
  };

  DiscreteMeasure current = m;
  if (opt.discretize) {
    GridSpec gs;
    gs.spacing = std::pow(sigma, 2.0 * beta + 1.0);
    gs.half_width = res.a_sigma;
    gs.dim = d;
    const double threshold = std::pow(sigma, 2.0 * beta + 2.0 * d + 2.0);

    const DiscreteMeasure quantized = run_stage("quantize", [&] {
      return quantize_to_grid(current, gs);
    });
    res.stages.push_back(
        {"quantize", quantized.size(),
         hellinger_quadrature(mixture_fn(current, sigma), mixture_fn(quantized, sigma), grid),
         opt.d2 * std::pow(sigma, beta) * std::pow(std::log(1.0 / sigma), d / 4.0)});
    const std::size_t n0 = quantized.size();

    const DiscreteMeasure merged = run_stage("merge", [&] {
      return merge_small_atoms(quantized, threshold);
    });
    const std::size_t n1 = merged.size();
    res.stages.push_back(
        {"merge", n1,
         hellinger_quadrature(mixture_fn(quantized, sigma), mixture_fn(merged, sigma), grid),
         std::sqrt(d / 2.0) * static_cast<double>(n0 - n1) * res.a_sigma *
             std::pow(sigma, beta + d)});

    const DiscreteMeasure extended = run_stage("extend", [&] {
      return extend_partition(merged, gs, sigma, threshold);
    });
    const std::size_t n2 = extended.size();
    res.stages.push_back(
        {"extend", n2,
         hellinger_quadrature(mixture_fn(merged, sigma), mixture_fn(extended, sigma), grid),
         std::sqrt(d / 2.0) * static_cast<double>(n2 - n1) * res.a_sigma *
             std::pow(sigma, beta + d)});
    current = extended;
  }

  res.step = run_stage("step", [&] { return step_from_measure(current); });
  res.final_measure = current;
  GenerativeDensity step_density;
  step_density.generator = res.step;
  step_density.sigma = sigma;
  {
    const PreparedDensity pd(step_density);
    res.stages.push_back(
        {"step", current.size(),
         hellinger_quadrature(mixture_fn(current, sigma),
                              [&pd](const Point& x) { return pd.density(x); }, grid),
         0.0});  // exact identity phi_sigma * H = p_{g~, sigma}
  }

  res.generator = run_stage("relu", [&] { return relu_from_step(res.step, res.kappa); });
  res.l2_gap = l2_step_gap(res.step, res.kappa);
  GenerativeDensity relu_density;
  relu_density.generator = res.generator;
  relu_density.sigma = sigma;
  {
    const PreparedDensity pd_step(step_density);
    const PreparedDensity pd_relu(relu_density);
    res.stages.push_back(
        {"relu", current.size(),
         hellinger_quadrature([&pd_step](const Point& x) { return pd_step.density(x); },
                              [&pd_relu](const Point& x) { return pd_relu.density(x); }, grid),
         std::sqrt(res.l2_gap) / (2.0 * kSqrt2 * sigma)});
    res.end_to_end = hellinger_quadrature(
        mixture_fn(m, sigma), [&pd_relu](const Point& x) { return pd_relu.density(x); }, grid);
  }
  return res;
}

void write_diagnostics_csv(const std::vector<StageDiagnostic>& stages,
                           const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "stage,atom_count,measured_hellinger,theoretical_bound\n";
  char buf[128];
  for (const auto& st : stages) {
    std::snprintf(buf, sizeof(buf), "%s,%zu,%.17g,%.17g\n", st.stage.c_str(), st.atom_count,
                  st.measured, st.bound);
    os << buf;
  }
}

}  // namespace denest
