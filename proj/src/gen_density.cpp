#include "denest/gen_density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace denest {

int GenerativeDensity::dim() const {
  if (is_shallow()) return shallow().out_dim;
  return step().out_dim;
}

PreparedDensity::PreparedDensity(const GenerativeDensity& p) {
  require(p.sigma > 0.0, "PreparedDensity: sigma must be positive");
  sigma_ = p.sigma;
  dim_ = p.dim();
  auto push = [this](double z_lo, double z_hi, Point c, Point v) {
    if (z_hi <= z_lo) return;
    Segment s;
    s.z_lo = z_lo;
    s.z_hi = z_hi;
    s.intercept = std::move(c);
    s.slope = std::move(v);
    s.speed = std::sqrt(norm_sq(s.slope));
    s.log_half_width = std::log(z_hi - z_lo);
    segments_.push_back(std::move(s));
  };
  if (p.is_shallow()) {
    const PiecewiseLinearForm f = to_piecewise_linear(p.shallow());
    for (std::size_t s = 0; s + 1 < f.knots.size(); ++s)
      push(f.knots[s], f.knots[s + 1], f.intercept[s], f.slope[s]);
  } else {
    const StepGenerator& st = p.step();
    for (std::size_t t = 0; t < st.intervals(); ++t)
      push(st.cuts[t], st.cuts[t + 1], st.values[t], Point(dim_, 0.0));
  }
}

double PreparedDensity::log_density(const Point& x) const {
  require(static_cast<int>(x.size()) == dim_, "log_density: point dim mismatch");
  std::vector<double> terms;
  terms.reserve(segments_.size());
  const double s2 = sigma_ * sigma_;
  for (const auto& seg : segments_) {
    if (seg.speed == 0.0) {
      terms.push_back(seg.log_half_width +
                      log_gauss_iso(dist_sq(x, seg.intercept), sigma_, dim_));
      continue;
    }
    // complete the square along the segment direction
    Point rel(dim_);
    for (int i = 0; i < dim_; ++i) rel[i] = x[i] - seg.intercept[i];
    const double t0 = dot(rel, seg.slope) / (seg.speed * seg.speed);
    const double r2 = std::max(0.0, norm_sq(rel) - sq(seg.speed * t0));
    const double u_lo = seg.speed * (seg.z_lo - t0) / (sigma_ * kSqrt2);
    const double u_hi = seg.speed * (seg.z_hi - t0) / (sigma_ * kSqrt2);
    const double log_gauss_part = -0.5 * dim_ * (kLog2Pi + 2.0 * std::log(sigma_)) -
                                  r2 / (2.0 * s2);
    const double log_len = std::log(sigma_) + 0.5 * std::log(kPi / 2.0) -
                           std::log(seg.speed);
    terms.push_back(log_gauss_part + log_len + log_erf_diff(u_lo, u_hi));
  }
  return log_sum_exp(terms);
}

double PreparedDensity::density(const Point& x) const { return std::exp(log_density(x)); }

void PreparedDensity::range_box(Point& lo, Point& hi) const {
  lo.assign(dim_, std::numeric_limits<double>::infinity());
  hi.assign(dim_, -std::numeric_limits<double>::infinity());
  for (const auto& seg : segments_) {
    for (int i = 0; i < dim_; ++i) {
      const double a = seg.intercept[i] + seg.slope[i] * seg.z_lo;
      const double b = seg.intercept[i] + seg.slope[i] * seg.z_hi;
      lo[i] = std::min({lo[i], a, b});
      hi[i] = std::max({hi[i], a, b});
    }
  }
}

double exact_log_density(const GenerativeDensity& p, const Point& x) {
  return PreparedDensity(p).log_density(x);
}

double exact_density(const GenerativeDensity& p, const Point& x) {
  return std::exp(exact_log_density(p, x));
}

double mc_log_density(const GenerativeDensity& p, const Point& x, std::size_t m, Rng& rng) {
  require(m >= 1, "mc_log_density: m must be >= 1");
  require(p.sigma > 0.0, "mc_log_density: sigma must be positive");
  std::vector<double> terms(m);
  if (p.is_shallow()) {
    const ShallowGenerator& g = p.shallow();
    for (std::size_t j = 0; j < m; ++j)
      terms[j] = log_gauss_iso(dist_sq(x, eval(g, rng.uniform01())), p.sigma, g.out_dim);
  } else {
    const StepGenerator& s = p.step();
    for (std::size_t j = 0; j < m; ++j)
      terms[j] = log_gauss_iso(dist_sq(x, step_eval(s, rng.uniform01())), p.sigma, s.out_dim);
  }
  return log_sum_exp(terms) - std::log(static_cast<double>(m));
}

McObjective grad_mc_objective(const GenerativeDensity& p, const std::vector<Point>& data,
                              std::size_t m, Rng& rng) {
  require(m >= 1, "grad_mc_objective: m must be >= 1");
  if (!p.is_shallow())
    throw std::invalid_argument("grad_mc_objective: shallow generators only");
  const ShallowGenerator& g = p.shallow();
  const int d = g.out_dim;
  const int d1 = g.hidden;
  const double sigma = p.sigma;
  const double s2 = sigma * sigma;

  McObjective out;
  out.grad.assign(g.param_count() + 1, 0.0);
  // latent draws shared between the value and the gradient, and across data
  std::vector<double> zs(m);
  for (auto& z : zs) z = rng.uniform01();
  if (data.empty()) return out;

  // forward pass for every draw
  std::vector<double> hidden(m * static_cast<std::size_t>(d1));
  std::vector<Point> gvals(m, Point(d, 0.0));
  for (std::size_t j = 0; j < m; ++j) {
    double* h = &hidden[j * d1];
    Point& gv = gvals[j];
    gv = g.out_bias;
    for (int u = 0; u < d1; ++u) {
      // subgradient 0 at the kink: units with w_in*z - b == 0 stay inactive
      const double a = g.w_in[u] * zs[j] - g.b[u];
      h[u] = a > 0.0 ? a : 0.0;
      if (a > 0.0)
        for (int i = 0; i < d; ++i) gv[i] += g.w_out[static_cast<std::size_t>(i) * d1 + u] * a;
    }
  }

  // self-normalized weights per datum; s_j accumulates sum_i w_ij (x_i - g_j)
  std::vector<Point> svec(m, Point(d, 0.0));
  std::vector<double> wsum(m, 0.0);
  std::vector<double> logk(m);
  double grad_sigma = 0.0;
  const double log_m = std::log(static_cast<double>(m));
  for (const Point& x : data) {
    require(static_cast<int>(x.size()) == d, "grad_mc_objective: datum dim mismatch");
    for (std::size_t j = 0; j < m; ++j)
      logk[j] = log_gauss_iso(dist_sq(x, gvals[j]), sigma, d);
    const double lse = log_sum_exp(logk);
    out.value += lse - log_m;
    for (std::size_t j = 0; j < m; ++j) {
      const double w = std::exp(logk[j] - lse);
      if (w == 0.0) continue;
      wsum[j] += w;
      double r2 = 0.0;
      for (int i = 0; i < d; ++i) {
        const double r = x[i] - gvals[j][i];
        svec[j][i] += w * r;
        r2 += r * r;
      }
      grad_sigma += w * (-d / sigma + r2 / (sigma * s2));
    }
  }

  // fold the per-draw aggregates into parameter gradients
  double* gw_in = out.grad.data();
  double* gb = gw_in + d1;
  double* gw_out = gb + d1;
  double* gbias = gw_out + static_cast<std::size_t>(d) * d1;
  for (std::size_t j = 0; j < m; ++j) {
    const double* h = &hidden[j * d1];
    const Point& s = svec[j];
    for (int i = 0; i < d; ++i) {
      const double si = s[i] / s2;
      gbias[i] += si;
      const double* wrow = &g.w_out[static_cast<std::size_t>(i) * d1];
      double* growout = &gw_out[static_cast<std::size_t>(i) * d1];
      for (int u = 0; u < d1; ++u) {
        if (h[u] > 0.0) growout[u] += si * h[u];
      }
      for (int u = 0; u < d1; ++u) {
        if (h[u] > 0.0) {
          const double t = si * wrow[u];
          gw_in[u] += t * zs[j];
          gb[u] -= t;
        }
      }
    }
  }
  out.grad.back() = grad_sigma;
  return out;
}

std::vector<Point> sample_density(const GenerativeDensity& p, Rng& rng, std::size_t n) {
  require(n >= 1, "sample_density: n must be >= 1");
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double z = rng.uniform01();
    Point x = p.is_shallow() ? eval(p.shallow(), z) : step_eval(p.step(), z);
    for (auto& xi : x) xi += p.sigma * rng.normal();
    out.push_back(std::move(x));
  }
  return out;
}

double log_likelihood(const GenerativeDensity& p, const std::vector<Point>& data) {
  require(!data.empty(), "log_likelihood: data must be nonempty");
  const PreparedDensity pd(p);
  double s = 0.0;
  for (const Point& x : data) s += pd.log_density(x);
  return s;
}

bool is_sieve_mle(const GenerativeDensity& candidate,
                  const std::vector<GenerativeDensity>& competitors,
                  const std::vector<Point>& data, double eta) {
  require(eta >= 0.0, "is_sieve_mle: eta must be nonnegative");
  const double n = static_cast<double>(data.size());
  const double cand = log_likelihood(candidate, data) / n;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& q : competitors) best = std::max(best, log_likelihood(q, data) / n);
  if (!std::isfinite(best)) return true;
  return cand >= best - eta;
}

void SieveSpec::validate() const {
  require(F > 0.0 && M > 0.0, "SieveSpec: F and M must be positive");
  require(d1 >= 1, "SieveSpec: d1 must be >= 1");
  require(sigma_min > 0.0 && sigma_min <= sigma_max, "SieveSpec: bad sigma range");
}

bool SieveSpec::contains(const GenerativeDensity& p) const {
  validate();
  if (!p.is_shallow()) return false;
  const ShallowGenerator& g = p.shallow();
  if (g.hidden != d1) return false;
  if (p.sigma < sigma_min || p.sigma > sigma_max) return false;
  if (g.max_param_magnitude() > M) return false;
  return sup_norm(g) <= F;
}

}  // namespace denest
