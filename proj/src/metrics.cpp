#include "denest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace denest {

namespace {

std::string node_string(const Point& x) {
  std::string s = "(";
  char buf[48];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.10g", x[i]);
    s += buf;
    if (i + 1 < x.size()) s += ", ";
  }
  return s + ")";
}

// Cholesky factor of a symmetric positive definite matrix; throws domain_error
// if the matrix is not SPD.
std::vector<double> cholesky(const std::vector<double>& a, int n) {
  std::vector<double> l(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[static_cast<std::size_t>(i) * n + j];
      for (int k = 0; k < j; ++k)
        s -= l[static_cast<std::size_t>(i) * n + k] * l[static_cast<std::size_t>(j) * n + k];
      if (i == j) {
        if (s <= 0.0) throw std::domain_error("gaussian_hellinger: covariance not SPD");
        l[static_cast<std::size_t>(i) * n + j] = std::sqrt(s);
      } else {
        l[static_cast<std::size_t>(i) * n + j] = s / l[static_cast<std::size_t>(j) * n + j];
      }
    }
  }
  return l;
}

double log_det_from_chol(const std::vector<double>& l, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::log(l[static_cast<std::size_t>(i) * n + i]);
  return 2.0 * s;
}

// solve L L^T x = b
Point chol_solve(const std::vector<double>& l, int n, const Point& b) {
  Point y(n), x(n);
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l[static_cast<std::size_t>(i) * n + k] * y[k];
    y[i] = s / l[static_cast<std::size_t>(i) * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= l[static_cast<std::size_t>(k) * n + i] * x[k];
    x[i] = s / l[static_cast<std::size_t>(i) * n + i];
  }
  return x;
}

}  // namespace

QuadratureGrid QuadratureGrid::box(const std::vector<double>& lo,
                                   const std::vector<double>& hi, int points_per_axis) {
  QuadratureGrid g;
  g.lo = lo;
  g.hi = hi;
  g.points_per_axis = points_per_axis;
  g.validate();
  return g;
}

QuadratureGrid QuadratureGrid::symmetric(int dim, double r, int points_per_axis) {
  return box(std::vector<double>(dim, -r), std::vector<double>(dim, r), points_per_axis);
}

void QuadratureGrid::validate() const {
  require(!lo.empty() && lo.size() == hi.size(), "QuadratureGrid: bad bounds");
  require(lo.size() <= 3, "QuadratureGrid: d <= 3 only");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    require(std::isfinite(lo[i]) && std::isfinite(hi[i]), "QuadratureGrid: bounds must be finite");
    require(lo[i] < hi[i], "QuadratureGrid: lo < hi required");
  }
  require(points_per_axis >= 3 && points_per_axis % 2 == 1,
          "QuadratureGrid: points per axis must be odd and >= 3");
  double nodes = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) nodes *= points_per_axis;
  require(nodes <= static_cast<double>(kNodeBudget), "QuadratureGrid: node budget exceeded");
}

namespace {

// Applies fn(node, simpson_weight) over the tensor grid in row-major order.
template <typename F>
void for_each_node(const QuadratureGrid& g, F&& fn) {
  const int d = g.dim();
  const int n = g.points_per_axis;
  std::vector<double> h(d);
  for (int i = 0; i < d; ++i) h[i] = (g.hi[i] - g.lo[i]) / (n - 1);
  auto axis_w = [n](int k) -> double {
    if (k == 0 || k == n - 1) return 1.0;
    return (k % 2 == 1) ? 4.0 : 2.0;
  };
  std::vector<int> idx(d, 0);
  Point x(d);
  while (true) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      x[i] = g.lo[i] + idx[i] * h[i];
      w *= axis_w(idx[i]) * h[i] / 3.0;
    }
    fn(x, w);
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == n) idx[axis--] = 0;
    if (axis < 0) break;
  }
}

double checked_density(const DensityFn& f, const Point& x, const char* role) {
  const double v = f(x);
  if (!std::isfinite(v) || v < 0.0)
    throw std::runtime_error(std::string("quadrature: non-finite or negative ") + role +
                             " value at node " + node_string(x));
  return v;
}

}  // namespace

double integrate(const DensityFn& f, const QuadratureGrid& grid) {
  grid.validate();
  double acc = 0.0;
  for_each_node(grid, [&](const Point& x, double w) { acc += w * f(x); });
  return acc;
}

double hellinger_quadrature(const DensityFn& p, const DensityFn& q,
                            const QuadratureGrid& grid) {
  grid.validate();
  double acc = 0.0;
  for_each_node(grid, [&](const Point& x, double w) {
    const double pv = checked_density(p, x, "p");
    const double qv = checked_density(q, x, "q");
    acc += w * sq(std::sqrt(pv) - std::sqrt(qv));
  });
  // normalized convention d_H^2 = 1 - int sqrt(pq) = (1/2) int (sqrt p - sqrt q)^2,
  // matching the closed-form Gaussian distance and the L2/(8 sigma^2) bounds
  acc = std::clamp(0.5 * acc, 0.0, 1.0);
  return std::sqrt(acc);
}

double gaussian_hellinger(const Point& mu1, const std::vector<double>& sigma1,
                          const Point& mu2, const std::vector<double>& sigma2) {
  const int n = static_cast<int>(mu1.size());
  require(n >= 1 && mu2.size() == mu1.size(), "gaussian_hellinger: mean size mismatch");
  require(sigma1.size() == static_cast<std::size_t>(n) * n &&
              sigma2.size() == static_cast<std::size_t>(n) * n,
          "gaussian_hellinger: covariance size mismatch");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      if (std::abs(sigma1[i * n + j] - sigma1[j * n + i]) > 1e-12 ||
          std::abs(sigma2[i * n + j] - sigma2[j * n + i]) > 1e-12)
        throw std::domain_error("gaussian_hellinger: covariance not symmetric");
    }
  const auto l1 = cholesky(sigma1, n);
  const auto l2 = cholesky(sigma2, n);
  std::vector<double> avg(static_cast<std::size_t>(n) * n);
  for (std::size_t k = 0; k < avg.size(); ++k) avg[k] = 0.5 * (sigma1[k] + sigma2[k]);
  const auto lavg = cholesky(avg, n);

  Point diff(n);
  for (int i = 0; i < n; ++i) diff[i] = mu1[i] - mu2[i];
  const Point sol = chol_solve(lavg, n, diff);
  const double qform = dot(diff, sol);

  const double log_coef = 0.25 * log_det_from_chol(l1, n) + 0.25 * log_det_from_chol(l2, n) -
                          0.5 * log_det_from_chol(lavg, n);
  const double dh2 = 1.0 - std::exp(log_coef - qform / 8.0);
  return std::sqrt(std::clamp(dh2, 0.0, 2.0));
}

double kl_quadrature(const DensityFn& p, const DensityFn& q, const QuadratureGrid& grid) {
  grid.validate();
  double acc = 0.0;
  for_each_node(grid, [&](const Point& x, double w) {
    const double pv = checked_density(p, x, "p");
    if (pv == 0.0) return;
    const double qv = checked_density(q, x, "q");
    if (qv <= 0.0)
      throw std::runtime_error("kl_quadrature: q vanishes where p > 0 at node " +
                               node_string(x));
    acc += w * pv * std::log(pv / qv);
  });
  return acc;
}

McEstimate hellinger_mc(const DensityFn& p, const DensityFn& q,
                        const std::function<Point()>& sampler, std::size_t n) {
  require(n >= 2, "hellinger_mc: n must be >= 2");
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point x = sampler();
    const double pv = p(x);
    const double qv = q(x);
    if (!(pv > 0.0) || !std::isfinite(pv) || !std::isfinite(qv) || qv < 0.0)
      throw std::runtime_error("hellinger_mc: invalid density value at a sampled point");
    const double r = std::sqrt(qv / pv);
    sum += r;
    sum_sq += r * r;
  }
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean) / (n - 1);
  const double dh2 = std::clamp(1.0 - mean, 0.0, 1.0);
  const double dh = std::sqrt(dh2);
  const double se_dh2 = std::sqrt(var);
  McEstimate est;
  est.value = dh;
  // delta method, floored to avoid blowing up at dh ~ 0
  est.std_error = se_dh2 / (2.0 * std::max(dh, 1e-6));
  return est;
}

SlopeFit convolution_rate_check(const std::vector<double>& sigma_values, int dim) {
  require(sigma_values.size() >= 3, "convolution_rate_check: need at least 3 sigma values");
  require(dim >= 1, "convolution_rate_check: dim must be >= 1");
  SlopeFit fit;
  std::vector<double> xs, ys;
  for (double s : sigma_values) {
    require(s > 0.0, "convolution_rate_check: sigma values must be positive");
    std::vector<double> id(static_cast<std::size_t>(dim) * dim, 0.0);
    std::vector<double> conv(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) {
      id[static_cast<std::size_t>(i) * dim + i] = 1.0;
      conv[static_cast<std::size_t>(i) * dim + i] = 1.0 + s * s;
    }
    const Point zero(dim, 0.0);
    const double dh = gaussian_hellinger(zero, id, zero, conv);
    fit.distances.push_back(dh);
    xs.push_back(std::log(s));
    ys.push_back(std::log(dh));
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace denest
