#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace denest {

// Raised when a construction step cannot proceed (weights too small, ramps
// too wide, ...). The CLI maps it to exit code 3.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Point = std::vector<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kLog2Pi = 1.8378770664093454836;
inline constexpr double kSqrt2 = std::numbers::sqrt2;

inline double sq(double x) { return x * x; }

inline double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Point& a) { return dot(a, a); }

inline double dist_sq(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += sq(a[i] - b[i]);
  return s;
}

// log N(0, sigma^2 I_d) density evaluated at squared radius r2
inline double log_gauss_iso(double r2, double sigma, int d) {
  return -0.5 * d * (kLog2Pi + 2.0 * std::log(sigma)) - r2 / (2.0 * sigma * sigma);
}

// log(sum_i exp(v_i)); returns -inf for an empty or all -inf input
inline double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// log(erfc(x)) valid for all x; asymptotic series past the erfc underflow point
inline double log_erfc(double x) {
  if (x < 25.0) return std::log(std::erfc(x));
  const double ix2 = 1.0 / (x * x);
  // erfc(x) = exp(-x^2)/(x sqrt(pi)) * (1 - 1/(2x^2) + 3/(4x^4) - 15/(8x^6) + ...)
  const double series = 1.0 + ix2 * (-0.5 + ix2 * (0.75 - 1.875 * ix2));
  return -x * x - std::log(x) - 0.5 * std::log(kPi) + std::log(series);
}

// log(erf(hi) - erf(lo)) for hi >= lo, stable when both tails are far out
inline double log_erf_diff(double lo, double hi) {
  if (hi < lo) throw std::invalid_argument("log_erf_diff: hi < lo");
  if (hi == lo) return -std::numeric_limits<double>::infinity();
  if (lo >= 0.0) {
    // erf(hi)-erf(lo) = erfc(lo)-erfc(hi)
    const double la = log_erfc(lo), lb = log_erfc(hi);
    return la + std::log1p(-std::exp(lb - la));
  }
  if (hi <= 0.0) return log_erf_diff(-hi, -lo);
  // straddles zero: both summands nonnegative, no cancellation
  return std::log(std::erf(hi) - std::erf(lo));
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace denest
