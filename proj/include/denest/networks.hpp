#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "denest/common.hpp"

namespace denest {

// One-hidden-layer ReLU generator [0,1] -> R^d:
//   g(z) = w_out * relu(w_in * z - b) + out_bias
// out_bias is an artifact convenience and defaults to zero; the step->ReLU
// construction never sets it.
struct ShallowGenerator {
  int out_dim = 0;
  int hidden = 0;
  std::vector<double> w_in;     // hidden
  std::vector<double> b;        // hidden
  std::vector<double> w_out;    // out_dim x hidden, row-major
  std::vector<double> out_bias; // out_dim

  static ShallowGenerator zeros(int out_dim, int hidden);
  void validate() const;

  std::size_t param_count() const;          // w_in, b, w_out, out_bias
  std::vector<double> pack_params() const;  // in that order
  void unpack_params(const std::vector<double>& p);

  double max_param_magnitude() const;

  // flat text: header "d d1" then the packed parameter vector
  void save(std::ostream& os) const;
  static ShallowGenerator load(std::istream& is);
  void save_file(const std::string& path) const;
  static ShallowGenerator load_file(const std::string& path);
};

// Piecewise-constant generator. values[t] rules on (cuts[t], cuts[t+1]], and
// z = 0 maps to the first value.
struct StepGenerator {
  int out_dim = 0;
  std::vector<double> cuts;          // size N+1, 0 = cuts[0] < ... < cuts[N] = 1
  std::vector<Point> values;         // size N

  static StepGenerator create(std::vector<double> cuts, std::vector<Point> values);
  void validate() const;
  std::size_t intervals() const { return values.size(); }
  double min_interval_length() const;
};

// Canonical exactly-affine-per-segment form used for closed-form integrals.
struct PiecewiseLinearForm {
  int out_dim = 0;
  std::vector<double> knots;          // size k+1, spans [0,1]
  std::vector<Point> intercept;       // k segments
  std::vector<Point> slope;           // k segments
};

Point eval(const ShallowGenerator& g, double z);

// {b_j / w_in_j : w_in_j != 0} within (0,1), sorted, deduplicated to 1e-14
std::vector<double> breakpoints(const ShallowGenerator& g);

PiecewiseLinearForm to_piecewise_linear(const ShallowGenerator& g);

Point eval_form(const PiecewiseLinearForm& f, double z);

// exact sup over [0,1] of the max coordinate magnitude
double sup_norm(const ShallowGenerator& g);

Point step_eval(const StepGenerator& s, double z);

}  // namespace denest
