#include "denest/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

#include "denest/baselines.hpp"
#include "denest/constructor.hpp"
#include "denest/gen_density.hpp"
#include "denest/measures.hpp"
#include "denest/metrics.hpp"
#include "denest/networks.hpp"
#include "denest/theory.hpp"
#include "denest/training.hpp"

namespace denest {

bool SuiteReport::all_pass() const {
  for (const auto& p : properties)
    if (!p.pass) return false;
  return !properties.empty();
}

namespace {

constexpr double kQuadTol = 1e-6;

ShallowGenerator random_generator(int d, int d1, Rng& rng, double scale) {
  ShallowGenerator g = ShallowGenerator::zeros(d, d1);
  for (auto& v : g.w_in) v = rng.uniform(-2.0, 2.0);
  for (auto& v : g.b) v = rng.uniform(-1.0, 1.5);
  for (auto& v : g.w_out) v = rng.uniform(-scale, scale);
  for (auto& v : g.out_bias) v = rng.uniform(-scale, scale);
  return g;
}

// exact squared L2 distance between two shallow generators over [0,1]:
// the difference is affine on the merged breakpoint partition
double exact_l2_sq(const ShallowGenerator& f, const ShallowGenerator& g) {
  const PiecewiseLinearForm pf = to_piecewise_linear(f);
  const PiecewiseLinearForm pg = to_piecewise_linear(g);
  std::vector<double> knots;
  knots.insert(knots.end(), pf.knots.begin(), pf.knots.end());
  knots.insert(knots.end(), pg.knots.begin(), pg.knots.end());
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  auto segment_of = [](const PiecewiseLinearForm& p, double zm) {
    std::size_t s = 0;
    while (s + 1 < p.intercept.size() && zm > p.knots[s + 1]) ++s;
    return s;
  };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k], b = knots[k + 1];
    if (b <= a) continue;
    const double zm = 0.5 * (a + b);
    const std::size_t sf = segment_of(pf, zm);
    const std::size_t sg = segment_of(pg, zm);
    for (int i = 0; i < f.out_dim; ++i) {
      const double c = pf.intercept[sf][i] - pg.intercept[sg][i];
      const double v = pf.slope[sf][i] - pg.slope[sg][i];
      total += c * c * (b - a) + c * v * (b * b - a * a) + v * v * (b * b * b - a * a * a) / 3.0;
    }
  }
  return total;
}

QuadratureGrid pair_grid(const PreparedDensity& a, const PreparedDensity& b, double pad,
                         int points) {
  Point lo_a, hi_a, lo_b, hi_b;
  a.range_box(lo_a, hi_a);
  b.range_box(lo_b, hi_b);
  std::vector<double> lo(lo_a.size()), hi(hi_a.size());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] = std::min(lo_a[i], lo_b[i]) - pad;
    hi[i] = std::max(hi_a[i], hi_b[i]) + pad;
  }
  return QuadratureGrid::box(lo, hi, points);
}

SuiteReport suite_lemma_a2(std::uint64_t seed, int cases) {
  SuiteReport rep;
  rep.suite = "lemma-a2";
  if (cases <= 0) cases = 100;
  Rng rng(seed);
  for (int c = 0; c < cases; ++c) {
    const int d = (c % 2) + 1;
    const int d1 = 2 + static_cast<int>(rng.uniform01() * 5);
    const double sigma = rng.uniform(0.2, 2.0);
    const ShallowGenerator f = random_generator(d, d1, rng, 1.0);
    const ShallowGenerator g = random_generator(d, d1, rng, 1.0);
    GenerativeDensity pf, pg;
    pf.generator = f;
    pf.sigma = sigma;
    pg.generator = g;
    pg.sigma = sigma;
    const PreparedDensity df(pf), dg(pg);
    const QuadratureGrid grid = pair_grid(df, dg, 8.0 * sigma, d == 1 ? 401 : 301);
    const double dh = hellinger_quadrature(
        [&df](const Point& x) { return df.density(x); },
        [&dg](const Point& x) { return dg.density(x); }, grid);
    const double bound = exact_l2_sq(f, g) / (8.0 * sigma * sigma);
    PropertyResult pr;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "pair_%03d_d%d_sigma%.3f", c, d, sigma);
    pr.property = buf;
    pr.measured = dh * dh;
    pr.bound = bound + kQuadTol;
    pr.pass = pr.measured <= pr.bound;
    rep.properties.push_back(pr);
  }
  return rep;
}

SuiteReport suite_corollary_a1(std::uint64_t seed, int cases) {
  SuiteReport rep;
  rep.suite = "corollary-a1";
  if (cases <= 0) cases = 20;
  Rng rng(seed);
  for (int c = 0; c < cases; ++c) {
    const int d = (c % 2) + 1;
    const int n_atoms = 3 + static_cast<int>(rng.uniform01() * 5);
    std::vector<Point> atoms;
    std::vector<double> weights;
    double wsum = 0.0;
    for (int t = 0; t < n_atoms; ++t) {
      Point a(d);
      for (int i = 0; i < d; ++i) a[i] = rng.uniform(-2.0, 2.0);
      atoms.push_back(a);
      const double w = rng.uniform(0.05, 1.0);
      weights.push_back(w);
      wsum += w;
    }
    for (auto& w : weights) w /= wsum;
    // nudge the sum onto 1 exactly enough for the invariant
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) acc += weights[i];
    weights.back() = 1.0 - acc;
    const DiscreteMeasure h0 = DiscreteMeasure::create(atoms, weights);
    // threshold between the two smallest weights so at least one atom moves
    std::vector<double> sorted = weights;
    std::sort(sorted.begin(), sorted.end());
    const double threshold = 0.5 * (sorted[0] + sorted[1]);
    const double sigma = rng.uniform(0.3, 1.5);
    const DiscreteMeasure h1 = merge_small_atoms(h0, threshold);

    // the receiving atom, recomputed the way merge_small_atoms defines it
    std::size_t target = 0;
    bool have_target = false;
    for (std::size_t t = 0; t < h0.size(); ++t) {
      if (h0.weights[t] < threshold) continue;
      if (!have_target || h0.weights[t] > h0.weights[target] ||
          (h0.weights[t] == h0.weights[target] && h0.atoms[t] < h0.atoms[target])) {
        target = t;
        have_target = true;
      }
    }
    double moved_sq = 0.0;
    for (std::size_t t = 0; t < h0.size(); ++t)
      if (h0.weights[t] < threshold)
        moved_sq += h0.weights[t] * dist_sq(h0.atoms[t], h0.atoms[target]);
    const double bound = std::sqrt(moved_sq / (8.0 * sigma * sigma));

    std::vector<double> lo(d, 1e300), hi(d, -1e300);
    for (const auto& a : atoms)
      for (int i = 0; i < d; ++i) {
        lo[i] = std::min(lo[i], a[i] - 8.0 * sigma);
        hi[i] = std::max(hi[i], a[i] + 8.0 * sigma);
      }
    const QuadratureGrid grid = QuadratureGrid::box(lo, hi, d == 1 ? 401 : 301);
    const double dh = hellinger_quadrature(
        [&h0, sigma](const Point& x) { return mixture_density(h0, sigma, x); },
        [&h1, sigma](const Point& x) { return mixture_density(h1, sigma, x); }, grid);
    PropertyResult pr;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "merge_%03d_d%d", c, d);
    pr.property = buf;
    pr.measured = dh;
    pr.bound = bound + kQuadTol;
    pr.pass = pr.measured <= pr.bound;
    rep.properties.push_back(pr);
  }
  return rep;
}

SuiteReport suite_gaussian_hellinger(std::uint64_t seed, int cases) {
  SuiteReport rep;
  rep.suite = "gaussian-hellinger";
  if (cases <= 0) cases = 50;
  Rng rng(seed);
  for (int c = 0; c < cases; ++c) {
    const int d = (c % 2) + 1;
    auto random_spd = [&rng, d]() {
      std::vector<double> a(static_cast<std::size_t>(d) * d);
      for (auto& v : a) v = rng.uniform(-1.0, 1.0);
      std::vector<double> s(static_cast<std::size_t>(d) * d, 0.0);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          for (int k = 0; k < d; ++k) s[i * d + j] += a[k * d + i] * a[k * d + j];
          if (i == j) s[i * d + j] += 0.3;
        }
      return s;
    };
    Point mu1(d), mu2(d);
    for (int i = 0; i < d; ++i) {
      mu1[i] = rng.uniform(-2.0, 2.0);
      mu2[i] = rng.uniform(-2.0, 2.0);
    }
    const auto s1 = random_spd();
    const auto s2 = random_spd();
    const double closed = gaussian_hellinger(mu1, s1, mu2, s2);

    // quadrature oracle over a generous box
    double max_sd = 0.0;
    for (int i = 0; i < d; ++i)
      max_sd = std::max({max_sd, std::sqrt(s1[i * d + i]), std::sqrt(s2[i * d + i])});
    std::vector<double> lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
      lo[i] = std::min(mu1[i], mu2[i]) - 10.0 * max_sd;
      hi[i] = std::max(mu1[i], mu2[i]) + 10.0 * max_sd;
    }
    auto gauss_fn = [d](const Point& mu, const std::vector<double>& s) {
      // dense evaluation via explicit inverse (d <= 2)
      if (d == 1) {
        const double var = s[0];
        return DensityFn([mu, var](const Point& x) {
          return std::exp(-sq(x[0] - mu[0]) / (2.0 * var)) / std::sqrt(2.0 * kPi * var);
        });
      }
      const double det = s[0] * s[3] - s[1] * s[2];
      const double i00 = s[3] / det, i01 = -s[1] / det, i11 = s[0] / det;
      return DensityFn([mu, det, i00, i01, i11](const Point& x) {
        const double dx = x[0] - mu[0], dy = x[1] - mu[1];
        const double q = dx * dx * i00 + 2.0 * dx * dy * i01 + dy * dy * i11;
        return std::exp(-0.5 * q) / (2.0 * kPi * std::sqrt(det));
      });
    };
    const QuadratureGrid grid = QuadratureGrid::box(lo, hi, d == 1 ? 401 : 401);
    const double quad = hellinger_quadrature(gauss_fn(mu1, s1), gauss_fn(mu2, s2), grid);
    PropertyResult pr;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "gauss_pair_%03d_d%d", c, d);
    pr.property = buf;
    pr.measured = std::abs(closed - quad);
    pr.bound = 1e-6;
    pr.pass = pr.measured <= pr.bound;
    rep.properties.push_back(pr);
  }
  return rep;
}

SuiteReport suite_l2_identity(std::uint64_t seed, int cases) {
  SuiteReport rep;
  rep.suite = "l2-identity";
  if (cases <= 0) cases = 20;
  Rng rng(seed);
  for (int c = 0; c < cases; ++c) {
    const int d = (c % 2) + 1;
    const int n_int = 2 + static_cast<int>(rng.uniform01() * 7);
    std::vector<double> w(n_int);
    double wsum = 0.0;
    for (auto& x : w) {
      x = rng.uniform(0.3, 1.0);
      wsum += x;
    }
    std::vector<double> cuts{0.0};
    for (int t = 0; t < n_int - 1; ++t) cuts.push_back(cuts.back() + w[t] / wsum);
    cuts.push_back(1.0);
    std::vector<Point> values;
    for (int t = 0; t < n_int; ++t) {
      Point v(d);
      for (int i = 0; i < d; ++i) v[i] = rng.uniform(-2.0, 2.0);
      values.push_back(v);
    }
    const StepGenerator s = StepGenerator::create(cuts, values);
    const double kappa = s.min_interval_length() * rng.uniform(0.05, 0.3);
    const ShallowGenerator relu = relu_from_step(s, kappa);
    const double identity = l2_step_gap(s, kappa);

    // Simpson on each ramp, exact (zero) elsewhere. The step is constant on
    // the open ramp, so nodes on a cut point take the ramp's own interval
    // value rather than the half-open boundary value.
    auto simpson = [&](double a, double b) {
      const Point step_val = step_eval(s, 0.5 * (a + b));
      const int nodes = 33;
      const double h = (b - a) / (nodes - 1);
      double acc = 0.0;
      for (int k = 0; k < nodes; ++k) {
        const double wgt = (k == 0 || k == nodes - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        acc += wgt * dist_sq(step_val, eval(relu, a + k * h));
      }
      return acc * h / 3.0;
    };
    double numeric = 0.0;
    for (std::size_t t = 0; t + 1 < s.cuts.size(); ++t) {
      numeric += simpson(s.cuts[t], s.cuts[t] + kappa);
      numeric += simpson(s.cuts[t + 1] - kappa, s.cuts[t + 1]);
    }
    PropertyResult pr;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "step_%03d_d%d_N%d", c, d, n_int);
    pr.property = buf;
    pr.measured = std::abs(identity - numeric);
    pr.bound = 1e-12;
    pr.pass = pr.measured <= pr.bound;
    rep.properties.push_back(pr);
  }
  return rep;
}

SuiteReport suite_gradients(std::uint64_t seed, int cases) {
  SuiteReport rep;
  rep.suite = "gradients";
  if (cases <= 0) cases = 20;
  const double h = 1e-6;

  // Monte-Carlo objective gradient against central differences
  for (int c = 0; c < cases; ++c) {
    std::uint64_t salt = 0;
    double rel_err = 0.0;
    while (true) {
      const std::uint64_t case_seed = derive_seed(seed, 1000 + c * 17 + salt);
      Rng rng(case_seed);
      const int d = (c % 2) + 1;
      const int d1 = 3 + (c % 3);
      ShallowGenerator g = random_generator(d, d1, rng, 0.8);
      const double sigma = rng.uniform(0.4, 1.5);
      std::vector<Point> data;
      for (int i = 0; i < 3; ++i) {
        Point x(d);
        for (int k = 0; k < d; ++k) x[k] = rng.uniform(-2.0, 2.0);
        data.push_back(x);
      }
      const std::size_t m = 40;
      const std::uint64_t draw_seed = derive_seed(case_seed, 7);
      // kink guard: keep the draws clear of every ReLU threshold
      {
        Rng probe(draw_seed);
        bool near_kink = false;
        for (std::size_t j = 0; j < m; ++j) {
          const double z = probe.uniform01();
          for (int u = 0; u < d1; ++u)
            if (std::abs(g.w_in[u] * z - g.b[u]) < 1e-4) near_kink = true;
        }
        if (near_kink) {
          ++salt;
          continue;
        }
      }
      auto objective = [&](const std::vector<double>& params, double sig) {
        ShallowGenerator gg = g;
        gg.unpack_params(params);
        GenerativeDensity p;
        p.generator = gg;
        p.sigma = sig;
        Rng r(draw_seed);
        return grad_mc_objective(p, data, m, r).value;
      };
      GenerativeDensity p;
      p.generator = g;
      p.sigma = sigma;
      Rng r(draw_seed);
      const McObjective obj = grad_mc_objective(p, data, m, r);
      const std::vector<double> params = g.pack_params();
      std::vector<double> fd(params.size() + 1, 0.0);
      for (std::size_t i = 0; i < params.size(); ++i) {
        std::vector<double> up = params, dn = params;
        up[i] += h;
        dn[i] -= h;
        fd[i] = (objective(up, sigma) - objective(dn, sigma)) / (2.0 * h);
      }
      fd.back() = (objective(params, sigma + h) - objective(params, sigma - h)) / (2.0 * h);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < fd.size(); ++i) {
        num += sq(obj.grad[i] - fd[i]);
        den += sq(fd[i]);
      }
      rel_err = std::sqrt(num / std::max(den, 1e-300));
      break;
    }
    PropertyResult pr;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "grad_mc_%03d", c);
    pr.property = buf;
    pr.measured = rel_err;
    pr.bound = 1e-5;
    pr.pass = pr.measured <= pr.bound;
    rep.properties.push_back(pr);
  }

  // AEVB objective gradient against central differences
  for (int c = 0; c < cases; ++c) {
    std::uint64_t salt = 0;
    double rel_err = 0.0;
    while (true) {
      const std::uint64_t case_seed = derive_seed(seed, 5000 + c * 31 + salt);
      Rng rng(case_seed);
      const int d = (c % 2) + 1;
      const int d1 = 3 + (c % 3);
      ShallowGenerator g = random_generator(d, d1, rng, 0.8);
      GaussianEncoder enc = random_encoder(d, 4, rng);
      const double sigma = rng.uniform(0.4, 1.5);
      Point x(d);
      for (int k = 0; k < d; ++k) x[k] = rng.uniform(-2.0, 2.0);
      const std::uint64_t draw_seed = derive_seed(case_seed, 11);
      // keep the generator input off the ReLU thresholds
      {
        Rng probe(draw_seed);
        std::vector<double> pre;
        const double mu = enc.mean_head.forward(x, &pre);
        const double lv = enc.logvar_head.forward(x, &pre);
        const double z = mu + std::exp(0.5 * lv) * probe.normal();
        const double u = standard_normal_cdf(z);
        bool near_kink = false;
        for (int j = 0; j < d1; ++j)
          if (std::abs(g.w_in[j] * u - g.b[j]) < 1e-4) near_kink = true;
        if (near_kink) {
          ++salt;
          continue;
        }
      }
      const std::size_t n_gen = g.param_count();
      const std::size_t n_enc = enc.param_count();
      auto objective = [&](const std::vector<double>& all) {
        ShallowGenerator gg = g;
        GaussianEncoder ee = enc;
        gg.unpack_params(std::vector<double>(all.begin(), all.begin() + n_gen));
        const double sig = all[n_gen];
        ee.unpack_params(std::vector<double>(all.begin() + n_gen + 1, all.end()));
        Rng r(draw_seed);
        return aevb_objective(gg, sig, ee, x, r).value;
      };
      std::vector<double> all = g.pack_params();
      all.push_back(sigma);
      {
        const auto ep = enc.pack_params();
        all.insert(all.end(), ep.begin(), ep.end());
      }
      Rng r(draw_seed);
      const AevbEval ev = aevb_objective(g, sigma, enc, x, r);
      std::vector<double> analytic(ev.grad_generator);
      analytic.insert(analytic.end(), ev.grad_encoder.begin(), ev.grad_encoder.end());
      std::vector<double> fd(all.size());
      for (std::size_t i = 0; i < all.size(); ++i) {
        std::vector<double> up = all, dn = all;
        up[i] += h;
        dn[i] -= h;
        fd[i] = (objective(up) - objective(dn)) / (2.0 * h);
      }
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < fd.size(); ++i) {
        num += sq(analytic[i] - fd[i]);
        den += sq(fd[i]);
      }
      rel_err = std::sqrt(num / std::max(den, 1e-300));
      (void)n_enc;
      break;
    }
    PropertyResult pr;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "grad_aevb_%03d", c);
    pr.property = buf;
    pr.measured = rel_err;
    pr.bound = 1e-4;
    pr.pass = pr.measured <= pr.bound;
    rep.properties.push_back(pr);
  }
  return rep;
}

SuiteReport suite_convolution_rate(std::uint64_t, int) {
  SuiteReport rep;
  rep.suite = "convolution-rate";
  std::vector<double> sigmas;
  for (int i = 0; i < 8; ++i) sigmas.push_back(0.05 + i * (0.15 / 7.0));
  for (int d : {1, 3}) {
    const SlopeFit fit = convolution_rate_check(sigmas, d);
    PropertyResult pr;
    pr.property = "slope_d" + std::to_string(d);
    pr.measured = std::abs(fit.slope - 2.0);
    pr.bound = 0.05;
    pr.pass = pr.measured <= pr.bound;
    rep.properties.push_back(pr);
    PropertyResult mono;
    mono.property = "monotone_d" + std::to_string(d);
    mono.measured = 1.0;
    for (std::size_t i = 0; i + 1 < fit.distances.size(); ++i)
      if (fit.distances[i + 1] <= fit.distances[i]) mono.measured = 0.0;
    mono.bound = 1.0;
    mono.pass = mono.measured == 1.0;
    rep.properties.push_back(mono);
  }
  return rep;
}

SuiteReport suite_entropy(std::uint64_t seed, int) {
  SuiteReport rep;
  rep.suite = "entropy";

  // Theorem 3 reduces to Theorem 2 at (q=0, t*=d, beta*=beta+1)
  double max_dev = 0.0;
  for (double beta : {0.7, 1.0, 1.5, 2.0}) {
    for (int d : {1, 2, 3}) {
      CompositeParams comp;
      comp.q = 0;
      comp.v = {d, d};
      comp.t = {d};
      comp.betas = {beta + 1.0};
      comp.tau6 = 1.0;
      for (double n : {1e3, 1e4, 1e5, 1e6}) {
        const double r3 = rate_theorem3(n, beta, comp, 1.0);
        const double bt = std::min(beta, 2.0);
        const double r2 = std::pow(n, -bt / (2.0 * bt + d)) * std::log(n);
        max_dev = std::max(max_dev, std::abs(r3 - r2));
      }
    }
  }
  rep.properties.push_back({"theorem3_reduces_to_theorem2", max_dev, 1e-12, max_dev <= 1e-12});

  // bracketing entropy against n eps_n^2 under the Theorem 1 schedule
  struct Config {
    double beta;
    int d;
    double tau3;
  };
  for (const Config cfg : {Config{1.0, 2, 2.0}, Config{2.0, 1, 1.0}}) {
    SmoothnessParams p;
    p.beta = cfg.beta;
    p.d = cfg.d;
    p.tau3 = cfg.tau3;
    std::vector<double> ratios;
    for (double n : {1e3, 1e4, 1e5, 1e6}) {
      const Theorem1Schedule sch = schedule_theorem1(n, p, 1.0);
      const auto covering = [&](double radius) {
        return covering_bound_shallow(radius, p.d, sch.d1, sch.M);
      };
      const BracketBound bb =
          bracket_bound(sch.eps_n, p.d, std::max(1.0, sch.F), sch.sigma_min, sch.sigma_max,
                        covering);
      ratios.push_back(bb.value / (n * sch.eps_n * sch.eps_n));
    }
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < ratios.size(); ++i)
      if (ratios[i + 1] > ratios[i]) decreasing = false;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "bracket_ratio_trend_beta%.1f_d%d", cfg.beta, cfg.d);
    rep.properties.push_back({buf, ratios.back(), ratios.front(),
                              decreasing && ratios.back() <= ratios.front()});
  }

  // greedy packing never exceeds the covering bound
  {
    Rng rng(seed);
    const int d = 1, d1 = 1;
    const double M = 1.0;
    const double delta = 0.25;
    std::vector<ShallowGenerator> kept;
    for (int c = 0; c < 200; ++c) {
      ShallowGenerator g = ShallowGenerator::zeros(d, d1);
      g.w_in[0] = rng.uniform(-M, M);
      g.b[0] = rng.uniform(-M, M);
      g.w_out[0] = rng.uniform(-M, M);
      bool distinct = true;
      for (const auto& other : kept) {
        // sup over [0,1] of |g - other| at the union of their knots
        std::vector<double> zs{0.0, 1.0};
        for (double z : breakpoints(g)) zs.push_back(z);
        for (double z : breakpoints(other)) zs.push_back(z);
        double dist = 0.0;
        for (double z : zs)
          dist = std::max(dist, std::abs(eval(g, z)[0] - eval(other, z)[0]));
        if (dist <= delta) {
          distinct = false;
          break;
        }
      }
      if (distinct) kept.push_back(g);
    }
    const double log_count = std::log(static_cast<double>(kept.size()));
    const double bound_half = covering_bound_shallow(delta / 2.0, d, d1, M);
    const double bound_full = covering_bound_shallow(delta, d, d1, M);
    rep.properties.push_back(
        {"packing_within_bound", log_count, bound_full, log_count <= bound_full});
    rep.properties.push_back(
        {"packing_within_half_radius_bound", log_count, bound_half, log_count <= bound_half});
  }
  return rep;
}

SuiteReport suite_tails(std::uint64_t, int) {
  SuiteReport rep;
  rep.suite = "tails";
  for (int d : {1, 2}) {
    const QuadratureGrid grid = QuadratureGrid::symmetric(d, 6.0, 101);
    {
      SmoothnessParams p;
      p.beta = 2.0;
      p.d = d;
      p.tau1 = std::pow(2.0 * kPi, -0.5 * d);
      p.tau2 = 0.5;
      p.tau3 = 2.0;
      const DensityFn normal = [d](const Point& x) {
        return std::exp(-0.5 * norm_sq(x)) * std::pow(2.0 * kPi, -0.5 * d);
      };
      const TailCheck tc = tail2_check(normal, p, grid);
      rep.properties.push_back({"normal_d" + std::to_string(d), tc.max_ratio, 1.0 + 1e-12,
                                tc.holds});
    }
    {
      SmoothnessParams p;
      p.beta = 1.0;
      p.d = d;
      p.tau1 = std::pow(2.0, -static_cast<double>(d));
      p.tau2 = 1.0;
      p.tau3 = 1.0;
      const DensityFn laplace = [d](const Point& x) {
        double l1 = 0.0;
        for (double xi : x) l1 += std::abs(xi);
        return std::pow(2.0, -static_cast<double>(d)) * std::exp(-l1);
      };
      const TailCheck tc = tail2_check(laplace, p, grid);
      rep.properties.push_back({"laplace_d" + std::to_string(d), tc.max_ratio, 1.0 + 1e-12,
                                tc.holds});
    }
  }
  // deliberately broken envelope must be flagged
  {
    SmoothnessParams p;
    p.beta = 2.0;
    p.d = 1;
    p.tau1 = 0.5 * std::pow(2.0 * kPi, -0.5);
    p.tau2 = 0.5;
    p.tau3 = 2.0;
    const DensityFn normal = [](const Point& x) {
      return std::exp(-0.5 * norm_sq(x)) * std::pow(2.0 * kPi, -0.5);
    };
    const TailCheck tc = tail2_check(normal, p, QuadratureGrid::symmetric(1, 6.0, 101));
    rep.properties.push_back(
        {"violation_detected", tc.max_ratio, 2.0, !tc.holds && std::abs(tc.max_ratio - 2.0) < 1e-9});
  }
  return rep;
}

SuiteReport suite_pipeline(std::uint64_t, int) {
  SuiteReport rep;
  rep.suite = "pipeline";
  const DiscreteMeasure input = DiscreteMeasure::create(
      {{-1.0}, {-0.2}, {0.4}, {1.1}}, {0.4, 0.3, 0.2995, 0.0005});
  PipelineOptions opt;
  opt.beta = 1.0;
  opt.tau3 = 2.0;
  opt.c4 = 2.0;
  opt.d2 = 1.0;
  opt.quad_points = 401;
  const PipelineResult res = theorem1_generator(input, 0.3, opt);
  for (const auto& st : res.stages) {
    PropertyResult pr;
    pr.property = "stage_" + st.stage;
    pr.measured = st.measured;
    pr.bound = st.bound + kQuadTol;
    pr.pass = pr.measured <= pr.bound;
    rep.properties.push_back(pr);
  }
  {
    GenerativeDensity p;
    p.generator = res.generator;
    p.sigma = res.sigma;
    const bool in_sieve = res.sieve().contains(p);
    rep.properties.push_back(
        {"output_in_sieve", in_sieve ? 1.0 : 0.0, 1.0, in_sieve});
  }
  // the ReLU-stage increment shrinks with kappa
  {
    std::vector<double> increments;
    for (double kappa_scale : {1.0, 0.25, 0.0625}) {
      PipelineOptions o = opt;
      o.kappa_override = res.kappa * kappa_scale;
      const PipelineResult r = theorem1_generator(input, 0.3, o);
      increments.push_back(r.stages.back().measured);
    }
    const bool decreasing =
        increments[1] < increments[0] && increments[2] < increments[1];
    rep.properties.push_back({"relu_error_decreases_with_kappa", increments.back(),
                              increments.front(), decreasing});
  }
  return rep;
}

}  // namespace

std::vector<std::string> verify_suite_list() {
  return {"lemma-a2",  "corollary-a1", "gaussian-hellinger", "l2-identity", "gradients",
          "convolution-rate", "entropy", "tails", "pipeline"};
}

SuiteReport run_verify_suite(const std::string& name, std::uint64_t seed, int cases) {
  if (name == "lemma-a2") return suite_lemma_a2(seed, cases);
  if (name == "corollary-a1") return suite_corollary_a1(seed, cases);
  if (name == "gaussian-hellinger") return suite_gaussian_hellinger(seed, cases);
  if (name == "l2-identity") return suite_l2_identity(seed, cases);
  if (name == "gradients") return suite_gradients(seed, cases);
  if (name == "convolution-rate") return suite_convolution_rate(seed, cases);
  if (name == "entropy") return suite_entropy(seed, cases);
  if (name == "tails") return suite_tails(seed, cases);
  if (name == "pipeline") return suite_pipeline(seed, cases);
  throw std::invalid_argument("unknown verify suite '" + name + "'");
}

void print_suite_report(const SuiteReport& report, std::ostream& os) {
  os << "suite,property,measured,bound,margin,status\n";
  char buf[256];
  for (const auto& p : report.properties) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.12g,%.12g,%.12g,%s\n", report.suite.c_str(),
                  p.property.c_str(), p.measured, p.bound, p.bound - p.measured,
                  p.pass ? "pass" : "FAIL");
    os << buf;
  }
}

}  // namespace denest
