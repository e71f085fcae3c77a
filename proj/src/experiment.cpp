#include "denest/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "denest/baselines.hpp"
#include "denest/constructor.hpp"
#include "denest/gen_density.hpp"
#include "denest/kv.hpp"

namespace denest {

namespace {

constexpr const char* kKnownMethods[] = {"vae-mc", "vae-aevb", "kde", "brute-force"};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd ms;
  if (v.empty()) return ms;
  for (double x : v) ms.mean += x;
  ms.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += sq(x - ms.mean);
    ms.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return ms;
}

}  // namespace

void ExperimentSpec::validate() const {
  require(!m_vec.empty(), "experiment spec: m must be nonempty");
  require(mix_weights.size() == 2, "experiment spec: mixture has two components");
  require(mix_weights[0] > 0 && mix_weights[1] > 0 &&
              std::abs(mix_weights[0] + mix_weights[1] - 1.0) <= 1e-12,
          "experiment spec: weights must be positive and sum to 1");
  require(repetitions >= 1, "experiment spec: repetitions must be >= 1");
  require(!sample_sizes.empty(), "experiment spec: sample_sizes must be nonempty");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    require(sample_sizes[i] >= 2, "experiment spec: sample sizes must be >= 2");
    if (i > 0)
      require(sample_sizes[i] > sample_sizes[i - 1],
              "experiment spec: sample sizes must be increasing");
  }
  require(!methods.empty(), "experiment spec: methods must be nonempty");
  for (const auto& m : methods) {
    const bool known = std::find(std::begin(kKnownMethods), std::end(kKnownMethods), m) !=
                       std::end(kKnownMethods);
    require(known, "experiment spec: unknown method '" + m + "'");
  }
  require(sigma_init > 0.0, "experiment spec: sigma_init must be positive");
  require(kappa > 0.0 && kappa < 0.25, "experiment spec: kappa must be in (0, 0.25)");
  require(quad_points >= 3 && quad_points % 2 == 1,
          "experiment spec: quad_points must be odd and >= 3");
  require(quad_pad > 0.0, "experiment spec: quad_pad must be positive");
  train.validate(static_cast<std::size_t>(sample_sizes.front()));
}

ExperimentSpec ExperimentSpec::profile_defaults(const std::string& profile) {
  ExperimentSpec s;
  if (profile == "full") {
    // paper-scale settings
    s.repetitions = 50;
    s.train.epochs = 1000;
    s.train.mc_samples = 100000;
  } else if (profile == "desk") {
    s.repetitions = 10;
    s.train.epochs = 300;
    s.train.mc_samples = 10000;
  } else {
    throw std::invalid_argument("unknown profile '" + profile + "' (expected desk or full)");
  }
  s.train.batch = 20;
  s.train.adam.lr = 2e-4;
  return s;
}

ExperimentSpec ExperimentSpec::from_file(const std::string& path, const std::string& profile) {
  const KeyValueFile kv = KeyValueFile::parse_file(path);
  const long long version = kv.get_int("schema_version", -1);
  if (version != 1) {
    if (!kv.has("schema_version"))
      throw std::invalid_argument(path + ": missing required key 'schema_version'");
    kv.fail("schema_version", "unsupported schema version (expected 1)");
  }
  ExperimentSpec s = profile_defaults(profile);
  s.m_vec = kv.get_doubles("m", s.m_vec);
  s.mix_weights = kv.get_doubles("weights", s.mix_weights);
  {
    const std::vector<double> raw =
        kv.get_doubles("sample_sizes", std::vector<double>(s.sample_sizes.begin(),
                                                           s.sample_sizes.end()));
    s.sample_sizes.assign(raw.begin(), raw.end());
  }
  s.repetitions = static_cast<int>(kv.get_int("repetitions", s.repetitions));
  s.methods = kv.get_strings("methods", s.methods);
  s.base_seed = static_cast<std::uint64_t>(kv.get_int("seed", s.base_seed));
  s.sigma_init = kv.get_double("sigma_init", s.sigma_init);
  s.kappa = kv.get_double("kappa", s.kappa);
  s.quad_points = static_cast<int>(kv.get_int("quad_points", s.quad_points));
  s.quad_pad = kv.get_double("quad_pad", s.quad_pad);
  s.train.epochs = static_cast<int>(kv.get_int("epochs", s.train.epochs));
  s.train.batch = static_cast<int>(kv.get_int("batch", s.train.batch));
  s.train.mc_samples = static_cast<int>(kv.get_int("mc_samples", s.train.mc_samples));
  s.train.hidden = static_cast<int>(kv.get_int("hidden", s.train.hidden));
  s.train.adam.lr = kv.get_double("learning_rate", s.train.adam.lr);
  s.train.sigma_trainable = kv.get_bool("sigma_trainable", s.train.sigma_trainable);
  s.train.sigma_min = kv.get_double("sigma_min", s.train.sigma_min);
  s.train.sigma_max = kv.get_double("sigma_max", s.train.sigma_max);
  s.train.refresh_latent = kv.get_bool("refresh_latent", s.train.refresh_latent);
  s.train.best_by_objective = kv.get_bool("best_by_objective", s.train.best_by_objective);
  s.validate();
  return s;
}

DiscreteMeasure ExperimentSpec::true_measure() const {
  Point neg(m_vec.size());
  for (std::size_t i = 0; i < m_vec.size(); ++i) neg[i] = -m_vec[i];
  return DiscreteMeasure::create({m_vec, neg}, {mix_weights[0], mix_weights[1]});
}

namespace {

struct CellJob {
  std::string method;
  int method_id = 0;
  int n = 0;
  int repetition = 0;
};

// Squared Hellinger between the fitted density and p0 over a padded box.
double cell_hellinger_sq(const ExperimentSpec& spec, const DiscreteMeasure& p0,
                         const DensityFn& fitted, const Point& fit_lo, const Point& fit_hi,
                         double fit_sigma) {
  const int d = p0.dim;
  std::vector<double> lo(d), hi(d);
  const double pad = spec.quad_pad * std::max(1.0, fit_sigma);
  for (int i = 0; i < d; ++i) {
    lo[i] = fit_lo[i];
    hi[i] = fit_hi[i];
    for (const auto& a : p0.atoms) {
      lo[i] = std::min(lo[i], a[i]);
      hi[i] = std::max(hi[i], a[i]);
    }
    lo[i] -= pad;
    hi[i] += pad;
  }
  const QuadratureGrid grid = QuadratureGrid::box(lo, hi, spec.quad_points);
  const DensityFn p0_fn = [&p0](const Point& x) { return mixture_density(p0, 1.0, x); };
  const double dh = hellinger_quadrature(p0_fn, fitted, grid);
  return dh * dh;
}

CellResult run_cell(const ExperimentSpec& spec, const CellJob& job) {
  CellResult res;
  res.method = job.method;
  res.n = job.n;
  res.repetition = job.repetition;
  const std::uint64_t cell_seed =
      spec.base_seed + static_cast<std::uint64_t>(job.repetition) * kSeedStride;
  const std::uint64_t data_seed = derive_seed(cell_seed, static_cast<std::uint64_t>(job.n));
  res.seed = data_seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const DiscreteMeasure p0 = spec.true_measure();
    Rng data_rng(data_seed);
    const std::vector<Point> data = sample_mixture(p0, 1.0, data_rng, job.n);
    Rng train_rng(derive_seed(data_seed, static_cast<std::uint64_t>(job.method_id) + 1));

    TrainConfig cfg = spec.train;
    cfg.seed = data_seed;

    if (job.method == "kde") {
      const KdeModel model = fit_kde(data);
      Point lo(p0.dim), hi(p0.dim);
      for (int i = 0; i < p0.dim; ++i) {
        lo[i] = hi[i] = data.front()[i];
        for (const auto& x : data) {
          lo[i] = std::min(lo[i], x[i]);
          hi[i] = std::max(hi[i], x[i]);
        }
      }
      const DensityFn fitted = [&model](const Point& x) { return kde_density(model, x); };
      res.hellinger_sq = cell_hellinger_sq(spec, p0, fitted, lo, hi, model.bandwidth);
      double ll = 0.0;
      for (const auto& x : data) ll += kde_log_density(model, x);
      res.final_objective = ll / static_cast<double>(job.n);
    } else if (job.method == "brute-force") {
      const GenerativeDensity p = brute_force_two_mixture(spec.m_vec, spec.kappa);
      const PreparedDensity pd(p);
      Point lo, hi;
      pd.range_box(lo, hi);
      const DensityFn fitted = [&pd](const Point& x) { return pd.density(x); };
      res.hellinger_sq = cell_hellinger_sq(spec, p0, fitted, lo, hi, p.sigma);
      res.final_objective = log_likelihood(p, data) / static_cast<double>(job.n);
      const StepGenerator step = step_from_measure(p0);
      res.theory_bound = l2_step_gap(step, spec.kappa) / (8.0 * p.sigma * p.sigma);
    } else if (job.method == "vae-mc" || job.method == "vae-aevb") {
      GenerativeDensity init;
      init.generator = random_shallow(p0.dim, cfg.hidden, train_rng);
      init.sigma = spec.sigma_init;
      TrainRun run;
      if (job.method == "vae-mc") {
        run = fit_mc(data, init, cfg, train_rng);
      } else {
        const GaussianEncoder enc = random_encoder(p0.dim, cfg.hidden, train_rng);
        run = fit_aevb(data, init, enc, cfg, train_rng);
      }
      GenerativeDensity fitted_density;
      fitted_density.generator = run.generator;
      fitted_density.sigma = run.sigma;
      const PreparedDensity pd(fitted_density);
      Point lo, hi;
      pd.range_box(lo, hi);
      const DensityFn fitted = [&pd](const Point& x) { return pd.density(x); };
      res.hellinger_sq = cell_hellinger_sq(spec, p0, fitted, lo, hi, run.sigma);
      res.final_objective = log_likelihood(fitted_density, data) / static_cast<double>(job.n);
      res.trace = std::move(run.trace);
    }
    res.ok = true;
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
    res.hellinger_sq = std::numeric_limits<double>::quiet_NaN();
    res.final_objective = std::numeric_limits<double>::quiet_NaN();
  }
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentSpec& spec, int threads) {
  spec.validate();
  require(threads >= 1, "run_experiment: threads must be >= 1");

  std::vector<CellJob> jobs;
  for (std::size_t mi = 0; mi < spec.methods.size(); ++mi)
    for (int n : spec.sample_sizes)
      for (int rep = 0; rep < spec.repetitions; ++rep) {
        CellJob j;
        j.method = spec.methods[mi];
        // method ids are fixed by the known-method table, not the spec order,
        // so seeds do not depend on which methods run together
        j.method_id = static_cast<int>(
            std::find(std::begin(kKnownMethods), std::end(kKnownMethods), j.method) -
            std::begin(kKnownMethods));
        j.n = n;
        j.repetition = rep;
        jobs.push_back(j);
      }

  ExperimentOutput out;
  out.cells.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) break;
      out.cells[k] = run_cell(spec, jobs[k]);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

void write_experiment_outputs(const ExperimentSpec& spec, const ExperimentOutput& out,
                              const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto path = [&out_dir](const std::string& name) {
    return (fs::path(out_dir) / name).string();
  };

  {
    std::ofstream os(path("results.csv"));
    os << "method,n,repetition,seed,status,hellinger_sq,final_objective\n";
    for (const auto& c : out.cells) {
      os << c.method << ',' << c.n << ',' << c.repetition << ',' << c.seed << ','
         << (c.ok ? "ok" : "failed") << ',' << fmt(c.hellinger_sq) << ','
         << fmt(c.final_objective) << '\n';
    }
  }
  {
    std::ofstream os(path("timings.csv"));
    os << "method,n,repetition,wall_seconds\n";
    for (const auto& c : out.cells)
      os << c.method << ',' << c.n << ',' << c.repetition << ',' << fmt(c.wall_seconds)
         << '\n';
  }
  {
    std::ofstream os(path("summary.csv"));
    os << "method,n,cells,mean_hellinger_sq,std_hellinger_sq,mean_final_objective,"
          "std_final_objective,theory_bound_hellinger_sq\n";
    for (const auto& method : spec.methods) {
      for (int n : spec.sample_sizes) {
        std::vector<double> dh2, obj;
        double bound = std::numeric_limits<double>::quiet_NaN();
        for (const auto& c : out.cells) {
          if (c.method != method || c.n != n || !c.ok) continue;
          dh2.push_back(c.hellinger_sq);
          obj.push_back(c.final_objective);
          if (method == "brute-force") bound = c.theory_bound;
        }
        const MeanStd h = mean_std(dh2);
        const MeanStd o = mean_std(obj);
        os << method << ',' << n << ',' << dh2.size() << ',' << fmt(h.mean) << ','
           << fmt(h.std) << ',' << fmt(o.mean) << ',' << fmt(o.std) << ','
           << (method == "brute-force" ? fmt(bound) : std::string()) << '\n';
      }
    }
  }
  // figure 2(a): squared Hellinger against n, one plot file per method
  for (const auto& method : spec.methods) {
    std::ofstream os(path("plot_fig2a_" + method + ".csv"));
    os << "n,mean,std\n";
    for (int n : spec.sample_sizes) {
      std::vector<double> dh2;
      for (const auto& c : out.cells)
        if (c.method == method && c.n == n && c.ok) dh2.push_back(c.hellinger_sq);
      const MeanStd h = mean_std(dh2);
      os << n << ',' << fmt(h.mean) << ',' << fmt(h.std) << '\n';
    }
  }
  // figure 2(b): training objective traces at the largest sample size
  const int n_trace = spec.sample_sizes.back();
  for (const auto& method : spec.methods) {
    if (method != "vae-mc" && method != "vae-aevb") continue;
    std::size_t epochs = 0;
    for (const auto& c : out.cells)
      if (c.method == method && c.n == n_trace && c.ok) epochs = std::max(epochs, c.trace.size());
    if (epochs == 0) continue;
    std::ofstream os(path("plot_fig2b_" + method + ".csv"));
    os << "epoch,mean,std\n";
    for (std::size_t e = 0; e < epochs; ++e) {
      std::vector<double> vals;
      for (const auto& c : out.cells)
        if (c.method == method && c.n == n_trace && c.ok && e < c.trace.size())
          vals.push_back(c.trace[e]);
      const MeanStd v = mean_std(vals);
      os << e << ',' << fmt(v.mean) << ',' << fmt(v.std) << '\n';
    }
  }
  // reference level for figure 2(b): the brute-force likelihood per n
  if (std::find(spec.methods.begin(), spec.methods.end(), "brute-force") !=
      spec.methods.end()) {
    std::ofstream os(path("plot_fig2b_reference.csv"));
    os << "n,mean,std\n";
    for (int n : spec.sample_sizes) {
      std::vector<double> obj;
      for (const auto& c : out.cells)
        if (c.method == "brute-force" && c.n == n && c.ok) obj.push_back(c.final_objective);
      const MeanStd o = mean_std(obj);
      os << n << ',' << fmt(o.mean) << ',' << fmt(o.std) << '\n';
    }
  }
}

std::vector<Point> load_points(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  std::vector<Point> pts;
  std::string line;
  int dim = -1;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    Point row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.empty()) continue;
    if (dim < 0) dim = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != dim)
      throw std::invalid_argument(path + ": ragged row in dataset");
    pts.push_back(std::move(row));
  }
  return pts;
}

void save_points(const std::vector<Point>& pts, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  for (const auto& p : pts) {
    for (std::size_t i = 0; i < p.size(); ++i) os << fmt(p[i]) << (i + 1 < p.size() ? " " : "");
    os << '\n';
  }
}

void export_density_csv(const DensityFn& f, const QuadratureGrid& grid,
                        const std::string& path) {
  grid.validate();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  const int d = grid.dim();
  for (int i = 0; i < d; ++i) os << 'x' << (i + 1) << ',';
  os << "value\n";
  const int n = grid.points_per_axis;
  std::vector<double> h(d);
  for (int i = 0; i < d; ++i) h[i] = (grid.hi[i] - grid.lo[i]) / (n - 1);
  std::vector<int> idx(d, 0);
  Point x(d);
  while (true) {
    for (int i = 0; i < d; ++i) x[i] = grid.lo[i] + idx[i] * h[i];
    for (int i = 0; i < d; ++i) os << fmt(x[i]) << ',';
    os << fmt(f(x)) << '\n';
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == n) idx[axis--] = 0;
    if (axis < 0) break;
  }
}

}  // namespace denest
