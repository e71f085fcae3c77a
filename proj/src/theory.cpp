#include "denest/theory.hpp"

#include <cmath>

namespace denest {

void SmoothnessParams::validate() const {
  require(beta > 0.0, "SmoothnessParams: beta must be positive");
  require(d >= 1, "SmoothnessParams: d must be >= 1");
  require(tau0 >= 0.0, "SmoothnessParams: tau0 must be nonnegative");
  require(tau1 > 0.0 && tau2 > 0.0 && tau3 > 0.0,
          "SmoothnessParams: tau1, tau2, tau3 must be positive");
}

void CompositeParams::validate() const {
  require(q >= 0, "CompositeParams: q must be >= 0");
  require(v.size() == static_cast<std::size_t>(q) + 2, "CompositeParams: v size");
  require(t.size() == static_cast<std::size_t>(q) + 1, "CompositeParams: t size");
  require(betas.size() == static_cast<std::size_t>(q) + 1, "CompositeParams: betas size");
  for (int x : v) require(x >= 1, "CompositeParams: dims must be >= 1");
  for (int x : t) require(x >= 1, "CompositeParams: active dims must be >= 1");
  for (double x : betas) require(x > 1.0, "CompositeParams: betas must exceed 1");
  require(tau6 > 0.0, "CompositeParams: tau6 must be positive");
}

int CompositeParams::worst_stage() const {
  int best = 0;
  for (int i = 1; i <= q; ++i)
    if (t[i] / betas[i] > t[best] / betas[best]) best = i;
  return best;
}

double rate_theorem1(double n, const SmoothnessParams& p, double C) {
  p.validate();
  require(n > 1.0, "rate_theorem1: n must exceed 1");
  require(C > 0.0, "rate_theorem1: C must be positive");
  const double ln = std::log(n);
  const double log_power = (2.0 * p.tau3 * p.d + 2.0 * p.tau3 + 2.0 * p.d + 1.0) / 2.0;
  return C * std::pow(n, -p.beta / (2.0 * p.beta + p.d)) * std::pow(ln, log_power);
}

Theorem1Schedule schedule_theorem1(double n, const SmoothnessParams& p, double C) {
  p.validate();
  require(n > 1.0, "schedule_theorem1: n must exceed 1");
  require(C > 0.0, "schedule_theorem1: C must be positive");
  const double ln = std::log(n);
  Theorem1Schedule s;
  s.F = C * std::pow(ln, p.tau3);
  s.d1 = static_cast<std::int64_t>(std::floor(
      C * std::pow(n, p.d / (2.0 * p.beta + p.d)) * std::pow(ln, p.tau3 * p.d + p.d)));
  s.M = C * std::pow(n, (2.0 * p.beta + 2.0 * p.d + 3.0) / (2.0 * p.beta + p.d));
  s.sigma_min = std::pow(n, -1.0 / (2.0 * p.beta + p.d));
  s.sigma_max = 1.0;
  s.eps_n = rate_theorem1(n, p, C);
  s.eta_n = s.eps_n * s.eps_n / 48.0;
  return s;
}

double rate_theorem3(double n, double beta, const CompositeParams& comp, double C) {
  comp.validate();
  require(n > 1.0, "rate_theorem3: n must exceed 1");
  require(beta > 0.0, "rate_theorem3: beta must be positive");
  require(C > 0.0, "rate_theorem3: C must be positive");
  const double bt = std::min(beta, 2.0);
  const int i_star = comp.worst_stage();
  const double beta_star = comp.betas[i_star];
  const double t_star = comp.t[i_star];
  const double expo = bt * beta_star / (2.0 * bt * beta_star + t_star * (bt + 1.0));
  return C * std::pow(n, -expo) * std::log(n);
}

double covering_bound_shallow(double delta, int d, std::int64_t d1, double M) {
  require(delta > 0.0, "covering_bound_shallow: delta must be positive");
  require(d >= 1 && d1 >= 1 && M > 0.0, "covering_bound_shallow: bad arguments");
  const double arg = 8.0 * M * M * static_cast<double>(d1);
  if (arg <= delta) return 0.0;  // vacuous bound
  return static_cast<double>(d1) * (d + 2) * std::log(arg / delta);
}

BracketBound bracket_bound(double delta, int d, double F, double sigma_min,
                           double sigma_max,
                           const std::function<double(double)>& covering_of_G, double C5,
                           double C6, double C7) {
  require(delta > 0.0, "bracket_bound: delta must be positive");
  require(d >= 1, "bracket_bound: d must be >= 1");
  require(F >= 1.0, "bracket_bound: F must be >= 1");
  require(sigma_min > 0.0 && sigma_min <= 1.0 / kSqrt2 && sigma_max >= 1.0,
          "bracket_bound: needs sigma_min <= 1/sqrt(2) <= 1 <= sigma_max");
  require(C5 > 0.0 && C6 > 0.0 && C7 > 0.0, "bracket_bound: constants must be positive");
  const double d4 = std::pow(delta, 4.0);
  const double logs = std::pow(std::log(sigma_max / sigma_min), d) + std::pow(F, 2.0 * d);
  const double radius = C5 * d4 * std::pow(sigma_min, d + 2.0) /
                        (F * std::pow(sigma_max, 2.0 * d) * logs);
  const double term2 =
      std::log(C6 * std::pow(sigma_max, 2.0 * d + 1.0) * logs /
               (d4 * std::pow(sigma_min, d + 1.0)));
  BracketBound b;
  b.value = covering_of_G(radius) + term2;
  b.delta_within_validity = delta <= C7;
  return b;
}

std::int64_t mixture_support_bound(double sigma, int d, double tau3, double D_const) {
  require(sigma > 0.0 && sigma < 1.0, "mixture_support_bound: sigma must be in (0,1)");
  require(d >= 1 && tau3 > 0.0 && D_const > 0.0, "mixture_support_bound: bad arguments");
  const double v = D_const * std::pow(sigma, -static_cast<double>(d)) *
                   std::pow(std::log(1.0 / sigma), tau3 * d + d);
  return static_cast<std::int64_t>(std::ceil(v));
}

TailCheck tail2_check(const DensityFn& density, const SmoothnessParams& p,
                      const QuadratureGrid& grid) {
  p.validate();
  grid.validate();
  TailCheck out;
  out.max_ratio = 0.0;
  const int d = grid.dim();
  const int n = grid.points_per_axis;
  std::vector<double> h(d);
  for (int i = 0; i < d; ++i) h[i] = (grid.hi[i] - grid.lo[i]) / (n - 1);
  std::vector<int> idx(d, 0);
  Point x(d);
  while (true) {
    for (int i = 0; i < d; ++i) x[i] = grid.lo[i] + idx[i] * h[i];
    const double envelope =
        p.tau1 * std::exp(-p.tau2 * std::pow(std::sqrt(norm_sq(x)), p.tau3));
    const double ratio = density(x) / envelope;
    if (ratio > out.max_ratio) {
      out.max_ratio = ratio;
      out.argmax_node = x;
    }
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == n) idx[axis--] = 0;
    if (axis < 0) break;
  }
  out.holds = out.max_ratio <= 1.0 + 1e-12;
  return out;
}

}  // namespace denest
