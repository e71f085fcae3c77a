#pragma once

#include <variant>
#include <vector>

#include "denest/common.hpp"
#include "denest/networks.hpp"
#include "denest/rng.hpp"

namespace denest {

// Implicit density of g(Z) + eps with Z ~ U[0,1] and eps ~ N(0, sigma^2 I).
struct GenerativeDensity {
  std::variant<ShallowGenerator, StepGenerator> generator;
  double sigma = 1.0;

  int dim() const;
  bool is_shallow() const { return std::holds_alternative<ShallowGenerator>(generator); }
  const ShallowGenerator& shallow() const { return std::get<ShallowGenerator>(generator); }
  const StepGenerator& step() const { return std::get<StepGenerator>(generator); }
};

// Per-segment closed-form evaluator. Building one hoists the piecewise-linear
// decomposition out of density loops (quadrature, likelihood).
class PreparedDensity {
 public:
  explicit PreparedDensity(const GenerativeDensity& p);

  double log_density(const Point& x) const;
  double density(const Point& x) const;
  int dim() const { return dim_; }
  double sigma() const { return sigma_; }

  // bounding box of the generator range, for quadrature domain defaults
  void range_box(Point& lo, Point& hi) const;

 private:
  struct Segment {
    double z_lo, z_hi;
    Point intercept;
    Point slope;  // zero vector for constant segments
    double speed;          // l2 norm of slope
    double log_half_width; // log(z_hi - z_lo), used by constant segments
  };
  int dim_ = 0;
  double sigma_ = 0.0;
  std::vector<Segment> segments_;
};

double exact_log_density(const GenerativeDensity& p, const Point& x);
double exact_density(const GenerativeDensity& p, const Point& x);

// log((1/m) sum_j phi_sigma(x - g(Z_j))) with Z_j ~ U[0,1]
double mc_log_density(const GenerativeDensity& p, const Point& x, std::size_t m, Rng& rng);

struct McObjective {
  double value = 0.0;            // sum over data of the MC log-density
  std::vector<double> grad;      // d/d(generator params..., sigma)
};

// Exact gradient of the Monte-Carlo objective holding the latent draws fixed.
// The same m draws are shared across all data points. Shallow generators only.
McObjective grad_mc_objective(const GenerativeDensity& p, const std::vector<Point>& data,
                              std::size_t m, Rng& rng);

std::vector<Point> sample_density(const GenerativeDensity& p, Rng& rng, std::size_t n);

double log_likelihood(const GenerativeDensity& p, const std::vector<Point>& data);

// eta-sieve MLE test: mean log-likelihood within eta of the best competitor
bool is_sieve_mle(const GenerativeDensity& candidate,
                  const std::vector<GenerativeDensity>& competitors,
                  const std::vector<Point>& data, double eta);

// The sieve of Theorem-1 type: shallow generators with sup-norm bound F,
// parameter magnitude bound M, hidden width d1 and sigma in range.
struct SieveSpec {
  double F = 0.0;
  double M = 0.0;
  std::int64_t d1 = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;

  void validate() const;
  bool contains(const GenerativeDensity& p) const;
};

}  // namespace denest
