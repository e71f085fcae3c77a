#pragma once

#include <string>
#include <vector>

#include "denest/gen_density.hpp"
#include "denest/measures.hpp"
#include "denest/networks.hpp"

namespace denest {

// Scaled interval indicator approximated by a 4-unit ReLU block: 0 outside
// [q_lo, q_hi], equal to `value` on [q_lo + kappa, q_hi - kappa], linear on
// the two kappa-wide ramps.
struct IndicatorSpec {
  Point value;
  double q_lo = 0.0;
  double q_hi = 1.0;
  double kappa = 0.0;

  void validate() const;
};

// Step generator whose pushforward of U[0,1] is exactly the measure:
// cut points are the cumulative weights, values the atoms in measure order.
StepGenerator step_from_measure(const DiscreteMeasure& m);

ShallowGenerator relu_indicator(const IndicatorSpec& spec);

// Sum of per-interval indicator blocks sharing hidden units across output
// coordinates: exactly 4N hidden units for N intervals.
ShallowGenerator relu_from_step(const StepGenerator& s, double kappa);

// Closed-form squared L2 distance between a step generator and its ReLU
// approximation: (2/3) kappa sum_t sum_i value^2 (two ramps per interval).
double l2_step_gap(const StepGenerator& s, double kappa);

// The two-mixture benchmark generator: sigma = 1, values (+m, -m) on
// [0, 1/2], (1/2, 1], 8 hidden units.
GenerativeDensity brute_force_two_mixture(const Point& m_vec, double kappa);

struct StageDiagnostic {
  std::string stage;
  std::size_t atom_count = 0;
  double measured = 0.0;  // Hellinger increment by quadrature
  double bound = 0.0;     // theoretical bound for the stage
};

struct PipelineOptions {
  double beta = 1.0;
  double tau3 = 2.0;
  double c4 = 1.0;            // a_sigma = c4 {log(1/sigma)}^tau3
  double d2 = 1.0;            // constant in the grid-stage bound
  double kappa_override = 0.0; // 0: use sigma^{2 beta + 2 d + 3} / 2
  bool discretize = true;      // false: step + ReLU stages only
  int quad_points = 401;
};

struct PipelineResult {
  ShallowGenerator generator;
  double sigma = 0.0;
  double kappa = 0.0;
  double a_sigma = 0.0;
  DiscreteMeasure final_measure;  // mixing measure fed into the step generator
  StepGenerator step;
  double l2_gap = 0.0;
  std::vector<StageDiagnostic> stages;
  double end_to_end = 0.0;  // d_H(phi_sigma * input, p_{g*, sigma}) by quadrature

  SieveSpec sieve() const;  // F = a_sigma, M = 1/kappa, d1 = hidden width
};

// Full constructive pipeline: quantize -> merge -> extend -> step -> ReLU,
// with per-stage Hellinger increments measured by quadrature next to their
// theoretical bounds.
PipelineResult theorem1_generator(const DiscreteMeasure& m, double sigma,
                                  const PipelineOptions& opt);

void write_diagnostics_csv(const std::vector<StageDiagnostic>& stages,
                           const std::string& path);

}  // namespace denest
