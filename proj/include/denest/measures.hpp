#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "denest/common.hpp"
#include "denest/rng.hpp"

namespace denest {

// Discrete mixing measure: atoms x^(t) in R^d with positive weights summing
// to one. Immutable after construction; all operations return new measures.
struct DiscreteMeasure {
  int dim = 0;
  std::vector<Point> atoms;
  std::vector<double> weights;

  static DiscreteMeasure create(std::vector<Point> atoms, std::vector<double> weights);

  std::size_t size() const { return atoms.size(); }
  void validate() const;

  // plain-text table: one row per atom, d coordinates then the weight
  void save(std::ostream& os) const;
  static DiscreteMeasure load(std::istream& is);
  void save_file(const std::string& path) const;
  static DiscreteMeasure load_file(const std::string& path);
};

// Lattice of pitch `spacing` clipped to the cube [-half_width, half_width]^d.
struct GridSpec {
  double spacing = 0.0;
  double half_width = 0.0;
  int dim = 0;

  void validate() const;
};

// Snap every atom to the nearest lattice multiple of spacing (ties toward
// -inf), clip to the cube, and merge atoms that land on the same point.
DiscreteMeasure quantize_to_grid(const DiscreteMeasure& m, const GridSpec& grid);

// Remove atoms below `threshold` and add their mass to the heaviest
// surviving atom. Output sorted by weight descending.
DiscreteMeasure merge_small_atoms(const DiscreteMeasure& m, double threshold);

// Cover the cube with axis-aligned cells of l2-diameter <= diameter_cap,
// skipping cells whose center lies within spacing/3 of an existing atom, and
// place one filler atom (weight filler_weight) at each remaining cell center,
// donated by the heaviest atom.
DiscreteMeasure extend_partition(const DiscreteMeasure& m, const GridSpec& grid,
                                 double diameter_cap, double filler_weight);

// log and plain value of (phi_sigma * m)(x)
double mixture_log_density(const DiscreteMeasure& m, double sigma, const Point& x);
double mixture_density(const DiscreteMeasure& m, double sigma, const Point& x);

// categorical atom draw plus N(0, sigma^2 I) noise; sigma = 0 gives pure
// atom draws
std::vector<Point> sample_mixture(const DiscreteMeasure& m, double sigma, Rng& rng,
                                  std::size_t n);

}  // namespace denest
