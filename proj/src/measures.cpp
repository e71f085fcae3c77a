#include "denest/measures.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace denest {

namespace {

constexpr double kWeightSumTol = 1e-12;

std::string format_point(const Point& x) {
  std::string s = "(";
  char buf[64];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", x[i]);
    s += buf;
    if (i + 1 < x.size()) s += ", ";
  }
  return s + ")";
}

}  // namespace

DiscreteMeasure DiscreteMeasure::create(std::vector<Point> atoms,
                                        std::vector<double> weights) {
  DiscreteMeasure m;
  m.dim = atoms.empty() ? 0 : static_cast<int>(atoms.front().size());
  m.atoms = std::move(atoms);
  m.weights = std::move(weights);
  m.validate();
  return m;
}

void DiscreteMeasure::validate() const {
  require(!atoms.empty(), "DiscreteMeasure: needs at least one atom");
  require(atoms.size() == weights.size(), "DiscreteMeasure: atoms/weights length mismatch");
  for (const auto& a : atoms)
    require(static_cast<int>(a.size()) == dim, "DiscreteMeasure: inconsistent atom dim");
  double sum = 0.0;
  for (double w : weights) {
    require(w > 0.0, "DiscreteMeasure: weights must be positive");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= kWeightSumTol, "DiscreteMeasure: weights must sum to 1");
  // pairwise distinct under exact coordinate equality
  std::map<Point, std::size_t> seen;
  for (std::size_t t = 0; t < atoms.size(); ++t) {
    auto [it, inserted] = seen.emplace(atoms[t], t);
    if (!inserted)
      throw std::invalid_argument("DiscreteMeasure: duplicate atom " + format_point(atoms[t]));
  }
}

void DiscreteMeasure::save(std::ostream& os) const {
  char buf[64];
  for (std::size_t t = 0; t < atoms.size(); ++t) {
    for (int i = 0; i < dim; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", atoms[t][i]);
      os << buf << ' ';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", weights[t]);
    os << buf << '\n';
  }
}

DiscreteMeasure DiscreteMeasure::load(std::istream& is) {
  std::vector<Point> atoms;
  std::vector<double> weights;
  std::string line;
  int dim = -1;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.empty()) continue;
    if (row.size() < 2) throw std::invalid_argument("measure table: row needs d coords + weight");
    if (dim < 0) dim = static_cast<int>(row.size()) - 1;
    if (static_cast<int>(row.size()) != dim + 1)
      throw std::invalid_argument("measure table: ragged row");
    weights.push_back(row.back());
    row.pop_back();
    atoms.push_back(std::move(row));
  }
  return create(std::move(atoms), std::move(weights));
}

void DiscreteMeasure::save_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  save(os);
}

DiscreteMeasure DiscreteMeasure::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  return load(is);
}

void GridSpec::validate() const {
  require(spacing > 0.0, "GridSpec: spacing must be positive");
  require(half_width >= spacing, "GridSpec: half_width must be >= spacing");
  require(dim >= 1, "GridSpec: dim must be >= 1");
}

DiscreteMeasure quantize_to_grid(const DiscreteMeasure& m, const GridSpec& grid) {
  grid.validate();
  require(grid.dim == m.dim, "quantize_to_grid: grid dim mismatch");
  const double s = grid.spacing;
  // largest lattice index inside the cube
  const auto max_index = static_cast<std::int64_t>(std::floor(grid.half_width / s + 1e-9));

  std::vector<Point> snapped(m.size());
  for (std::size_t t = 0; t < m.size(); ++t) {
    Point p(m.dim);
    for (int i = 0; i < m.dim; ++i) {
      const double x = m.atoms[t][i];
      if (std::abs(x) > grid.half_width)
        throw std::invalid_argument("quantize_to_grid: atom outside cube: " +
                                    format_point(m.atoms[t]));
      // nearest multiple; exact midpoints snap toward -inf
      std::int64_t k = static_cast<std::int64_t>(std::ceil(x / s - 0.5));
      k = std::clamp(k, -max_index, max_index);
      p[i] = static_cast<double>(k) * s;
    }
    snapped[t] = std::move(p);
  }

  // merge atoms landing on the same lattice point, keeping first-seen order
  std::vector<Point> atoms;
  std::vector<double> weights;
  std::map<Point, std::size_t> index;
  for (std::size_t t = 0; t < snapped.size(); ++t) {
    auto it = index.find(snapped[t]);
    if (it == index.end()) {
      index.emplace(snapped[t], atoms.size());
      atoms.push_back(snapped[t]);
      weights.push_back(m.weights[t]);
    } else {
      weights[it->second] += m.weights[t];
    }
  }
  return DiscreteMeasure::create(std::move(atoms), std::move(weights));
}

DiscreteMeasure merge_small_atoms(const DiscreteMeasure& m, double threshold) {
  require(threshold > 0.0, "merge_small_atoms: threshold must be positive");
  std::vector<std::size_t> keep, drop;
  for (std::size_t t = 0; t < m.size(); ++t)
    (m.weights[t] >= threshold ? keep : drop).push_back(t);
  if (keep.empty())
    throw InfeasibleError("merge_small_atoms: all weights below threshold");

  double moved = 0.0;
  for (std::size_t t : drop) moved += m.weights[t];

  std::vector<Point> atoms;
  std::vector<double> weights;
  for (std::size_t t : keep) {
    atoms.push_back(m.atoms[t]);
    weights.push_back(m.weights[t]);
  }
  // heaviest survivor receives the mass; weight ties broken by lexicographic
  // atom order
  std::size_t target = 0;
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    if (weights[i] > weights[target] ||
        (weights[i] == weights[target] && atoms[i] < atoms[target]))
      target = i;
  }
  weights[target] += moved;

  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (weights[a] != weights[b]) return weights[a] > weights[b];
    return atoms[a] < atoms[b];
  });
  std::vector<Point> out_atoms;
  std::vector<double> out_weights;
  for (std::size_t i : order) {
    out_atoms.push_back(std::move(atoms[i]));
    out_weights.push_back(weights[i]);
  }
  return DiscreteMeasure::create(std::move(out_atoms), std::move(out_weights));
}

DiscreteMeasure extend_partition(const DiscreteMeasure& m, const GridSpec& grid,
                                 double diameter_cap, double filler_weight) {
  grid.validate();
  require(grid.dim == m.dim, "extend_partition: grid dim mismatch");
  require(diameter_cap > 0.0, "extend_partition: diameter_cap must be positive");
  require(filler_weight > 0.0, "extend_partition: filler_weight must be positive");

  const int d = m.dim;
  const double target_side = diameter_cap / std::sqrt(static_cast<double>(d));
  const auto cells_per_axis = static_cast<std::int64_t>(
      std::ceil(2.0 * grid.half_width / target_side - 1e-12));
  require(cells_per_axis >= 1, "extend_partition: degenerate cell layout");
  double total_cells = 1.0;
  for (int i = 0; i < d; ++i) total_cells *= static_cast<double>(cells_per_axis);
  require(total_cells <= 4e6, "extend_partition: cell count exceeds budget");
  const double side = 2.0 * grid.half_width / static_cast<double>(cells_per_axis);
  const double exclusion = grid.spacing / 3.0;

  // enumerate cell centers in lexicographic index order
  std::vector<Point> fillers;
  std::vector<std::int64_t> idx(d, 0);
  while (true) {
    Point center(d);
    for (int i = 0; i < d; ++i)
      center[i] = -grid.half_width + (static_cast<double>(idx[i]) + 0.5) * side;
    bool occupied = false;
    for (const auto& a : m.atoms) {
      if (std::sqrt(dist_sq(center, a)) <= exclusion) {
        occupied = true;
        break;
      }
    }
    if (!occupied) fillers.push_back(std::move(center));
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == cells_per_axis) idx[axis--] = 0;
    if (axis < 0) break;
  }

  if (fillers.empty()) return m;

  std::size_t donor = 0;
  for (std::size_t t = 1; t < m.size(); ++t) {
    if (m.weights[t] > m.weights[donor] ||
        (m.weights[t] == m.weights[donor] && m.atoms[t] < m.atoms[donor]))
      donor = t;
  }
  const double donated = filler_weight * static_cast<double>(fillers.size());
  if (m.weights[donor] - donated < filler_weight)
    throw InfeasibleError("extend_partition: donor weight would drop below filler_weight");

  std::vector<Point> atoms = m.atoms;
  std::vector<double> weights = m.weights;
  weights[donor] -= donated;
  for (auto& f : fillers) {
    atoms.push_back(std::move(f));
    weights.push_back(filler_weight);
  }
  return DiscreteMeasure::create(std::move(atoms), std::move(weights));
}

double mixture_log_density(const DiscreteMeasure& m, double sigma, const Point& x) {
  require(sigma > 0.0, "mixture_density: sigma must be positive");
  require(static_cast<int>(x.size()) == m.dim, "mixture_density: point dim mismatch");
  std::vector<double> terms(m.size());
  for (std::size_t t = 0; t < m.size(); ++t)
    terms[t] = std::log(m.weights[t]) + log_gauss_iso(dist_sq(x, m.atoms[t]), sigma, m.dim);
  return log_sum_exp(terms);
}

double mixture_density(const DiscreteMeasure& m, double sigma, const Point& x) {
  return std::exp(mixture_log_density(m, sigma, x));
}

std::vector<Point> sample_mixture(const DiscreteMeasure& m, double sigma, Rng& rng,
                                  std::size_t n) {
  require(sigma >= 0.0, "sample_mixture: sigma must be nonnegative");
  require(n >= 1, "sample_mixture: n must be >= 1");
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = rng.categorical(m.weights);
    Point x = m.atoms[t];
    if (sigma > 0.0)
      for (int i = 0; i < m.dim; ++i) x[i] += sigma * rng.normal();
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace denest
