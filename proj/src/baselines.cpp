#include "denest/baselines.hpp"

#include <cmath>

namespace denest {

double silverman_bandwidth(const std::vector<Point>& data) {
  const std::size_t n = data.size();
  require(n >= 2, "silverman_bandwidth: need at least 2 points");
  const std::size_t d = data.front().size();
  double sigma_hat = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double mean = 0.0;
    for (const auto& x : data) mean += x[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& x : data) ss += sq(x[i] - mean);
    sigma_hat += std::sqrt(ss / static_cast<double>(n - 1));
  }
  sigma_hat /= static_cast<double>(d);
  if (sigma_hat <= 0.0)
    throw std::domain_error("silverman_bandwidth: data has zero variance");
  const double nd = static_cast<double>(n) * (static_cast<double>(d) + 2.0) / 4.0;
  return sigma_hat * std::pow(nd, -1.0 / (static_cast<double>(d) + 4.0));
}

KdeModel fit_kde(const std::vector<Point>& data) {
  KdeModel m;
  m.bandwidth = silverman_bandwidth(data);
  m.points = data;
  return m;
}

double kde_log_density(const KdeModel& model, const Point& x) {
  require(model.bandwidth > 0.0, "kde_density: bandwidth must be positive");
  require(!model.points.empty(), "kde_density: empty model");
  const int d = static_cast<int>(x.size());
  std::vector<double> terms(model.points.size());
  for (std::size_t i = 0; i < model.points.size(); ++i)
    terms[i] = log_gauss_iso(dist_sq(x, model.points[i]), model.bandwidth, d);
  return log_sum_exp(terms) - std::log(static_cast<double>(model.points.size()));
}

double kde_density(const KdeModel& model, const Point& x) {
  return std::exp(kde_log_density(model, x));
}

}  // namespace denest
