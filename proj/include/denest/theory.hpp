#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "denest/common.hpp"
#include "denest/metrics.hpp"

namespace denest {

// Smoothness and tail parameters of the target density class.
struct SmoothnessParams {
  double beta = 1.0;
  int d = 1;
  double tau0 = 0.0;
  double tau1 = 1.0;
  double tau2 = 1.0;
  double tau3 = 1.0;

  void validate() const;
};

// Composite-generator description: g = h_q o ... o h_0 with per-stage
// dimensions v, active dimensions t and smoothness beta_i.
struct CompositeParams {
  int q = 0;
  std::vector<int> v;          // size q+2
  std::vector<int> t;          // size q+1
  std::vector<double> betas;   // size q+1
  double tau6 = 1.0;

  void validate() const;
  // argmax t_i / beta_i, ties to the smallest index
  int worst_stage() const;
};

// eps_n = C n^{-beta/(2 beta + d)} (log n)^{(2 tau3 d + 2 tau3 + 2 d + 1)/2}
double rate_theorem1(double n, const SmoothnessParams& p, double C);

struct Theorem1Schedule {
  double F = 0.0;
  std::int64_t d1 = 0;
  double M = 0.0;
  double sigma_min = 0.0;
  double sigma_max = 1.0;
  double eps_n = 0.0;
  double eta_n = 0.0;
};

Theorem1Schedule schedule_theorem1(double n, const SmoothnessParams& p, double C);

// eps_n = C n^{-bt b* / (2 bt b* + t*(bt+1))} log n with bt = min(beta, 2)
double rate_theorem3(double n, double beta, const CompositeParams& comp, double C);

// log covering number bound d1 (d+2) log(8 M^2 d1 / delta); 0 when vacuous
double covering_bound_shallow(double delta, int d, std::int64_t d1, double M);

struct BracketBound {
  double value = 0.0;
  bool delta_within_validity = true;  // delta <= C7
};

// Two-term bracketing entropy bound: covering of the generator class at the
// shrunk radius plus the sigma-bracketing log term.
BracketBound bracket_bound(double delta, int d, double F, double sigma_min,
                           double sigma_max, const std::function<double(double)>& covering_of_G,
                           double C5 = 1.0, double C6 = 1.0, double C7 = 1.0);

// ceil(D sigma^{-d} (log(1/sigma))^{tau3 d + d})
std::int64_t mixture_support_bound(double sigma, int d, double tau3, double D_const);

struct TailCheck {
  bool holds = false;
  double max_ratio = 0.0;
  Point argmax_node;
};

// checks p0(x) <= tau1 exp(-tau2 ||x||^tau3) at every grid node
TailCheck tail2_check(const DensityFn& density, const SmoothnessParams& p,
                      const QuadratureGrid& grid);

}  // namespace denest
