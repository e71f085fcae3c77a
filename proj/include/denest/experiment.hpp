#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "denest/measures.hpp"
#include "denest/metrics.hpp"
#include "denest/training.hpp"

namespace denest {

// Seeds: repetition r uses base_seed + r * kSeedStride; the data stream is
// derived from (cell seed, n) so every method in a cell sees the same sample,
// and the training stream additionally salts in the method id.
inline constexpr std::uint64_t kSeedStride = 1000003;

struct ExperimentSpec {
  Point m_vec = {1.3, 1.3};
  std::vector<double> mix_weights = {0.5, 0.5};
  std::vector<int> sample_sizes = {100, 200, 400};
  int repetitions = 10;
  std::vector<std::string> methods = {"vae-mc", "vae-aevb", "kde", "brute-force"};
  std::uint64_t base_seed = 20240817;
  TrainConfig train;
  double sigma_init = 1.0;
  double kappa = 1e-5;   // brute-force ramp width
  int quad_points = 401;
  double quad_pad = 8.0;

  void validate() const;
  // profile presets: "desk" (default) or "full" (paper-scale reps/epochs/m)
  static ExperimentSpec from_file(const std::string& path, const std::string& profile);
  static ExperimentSpec profile_defaults(const std::string& profile);

  DiscreteMeasure true_measure() const;  // p0 = sum_k w_k N(atom_k, I)
};

struct CellResult {
  std::string method;
  int n = 0;
  int repetition = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double hellinger_sq = 0.0;
  double final_objective = 0.0;   // mean log-likelihood per datum on training data
  double theory_bound = 0.0;      // brute-force only: Lemma-A.2 d_H^2 bound
  double wall_seconds = 0.0;
  std::vector<double> trace;      // per-epoch objective, training methods only
};

struct ExperimentOutput {
  std::vector<CellResult> cells;
};

ExperimentOutput run_experiment(const ExperimentSpec& spec, int threads);

// results.csv, summary.csv, timings.csv and per-figure plot data
void write_experiment_outputs(const ExperimentSpec& spec, const ExperimentOutput& out,
                              const std::string& out_dir);

// rows of d whitespace-separated doubles
std::vector<Point> load_points(const std::string& path);
void save_points(const std::vector<Point>& pts, const std::string& path);

// density evaluated on a Simpson grid, one "x1,...,xd,value" row per node
void export_density_csv(const DensityFn& f, const QuadratureGrid& grid,
                        const std::string& path);

}  // namespace denest
