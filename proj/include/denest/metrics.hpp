#pragma once

#include <functional>
#include <vector>

#include "denest/common.hpp"

namespace denest {

using DensityFn = std::function<double(const Point&)>;

// Tensorized composite Simpson rule on a box, d <= 3.
struct QuadratureGrid {
  std::vector<double> lo, hi;
  int points_per_axis = 401;  // odd, >= 3

  static constexpr std::size_t kNodeBudget = 1u << 24;

  static QuadratureGrid box(const std::vector<double>& lo, const std::vector<double>& hi,
                            int points_per_axis);
  // symmetric box [-r, r]^d
  static QuadratureGrid symmetric(int dim, double r, int points_per_axis);
  void validate() const;
  int dim() const { return static_cast<int>(lo.size()); }
};

// integral of f over the grid box
double integrate(const DensityFn& f, const QuadratureGrid& grid);

// Hellinger distance by Simpson quadrature. Normalized convention throughout:
// d_H^2 = 1 - int sqrt(pq), the one the closed-form Gaussian distance and the
// L2/(8 sigma^2) mixture bounds are stated in.
double hellinger_quadrature(const DensityFn& p, const DensityFn& q,
                            const QuadratureGrid& grid);

// closed-form Hellinger distance between two Gaussians; covariances are
// row-major dim x dim and must be symmetric positive definite
double gaussian_hellinger(const Point& mu1, const std::vector<double>& sigma1,
                          const Point& mu2, const std::vector<double>& sigma2);

// integral of p log(p/q) with the 0 log(0/q) = 0 convention
double kl_quadrature(const DensityFn& p, const DensityFn& q, const QuadratureGrid& grid);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Hellinger distance from n draws of p: d_H^2 = 1 - E_p[sqrt(q/p)]
McEstimate hellinger_mc(const DensityFn& p, const DensityFn& q,
                        const std::function<Point()>& sampler, std::size_t n);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> distances;
};

// least-squares slope of log d_H(N(0,I), N(0,(1+s^2)I)) against log s;
// the Gaussian-convolution rate is s^2 for a Gaussian target
SlopeFit convolution_rate_check(const std::vector<double>& sigma_values, int dim);

}  // namespace denest
