#pragma once

#include <vector>

#include "denest/common.hpp"

namespace denest {

// Gaussian KDE with a single isotropic bandwidth.
struct KdeModel {
  std::vector<Point> points;
  double bandwidth = 0.0;
};

// h = sigma_hat (n (d+2) / 4)^{-1/(d+4)}, sigma_hat the mean of the
// per-coordinate sample standard deviations
double silverman_bandwidth(const std::vector<Point>& data);

KdeModel fit_kde(const std::vector<Point>& data);

double kde_log_density(const KdeModel& model, const Point& x);
double kde_density(const KdeModel& model, const Point& x);

}  // namespace denest
