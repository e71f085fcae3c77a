#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "denest/gen_density.hpp"
#include "denest/networks.hpp"
#include "denest/rng.hpp"

namespace denest {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  std::vector<double> m, v;
  long step = 0;

  AdamState(std::size_t n, AdamConfig c = {}) : cfg(c), m(n, 0.0), v(n, 0.0) {}
};

// Bias-corrected Adam ascent step. Throws on non-finite gradients, leaving
// parameters and state untouched.
void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grad);

struct TrainConfig {
  int epochs = 1000;
  int batch = 20;
  int mc_samples = 100000;
  std::uint64_t seed = 0;
  bool sigma_trainable = true;
  double sigma_min = 0.2;
  double sigma_max = 2.0;
  int hidden = 50;
  AdamConfig adam;
  bool refresh_latent = true;      // false: reuse one fixed latent batch (the
                                   // objective is then deterministic in the params)
  bool best_by_objective = true;

  void validate(std::size_t n) const;
  static TrainConfig from_file(const std::string& path);
};

// Scalar-output shallow ReLU net used for the encoder heads.
struct ScalarNet {
  int in_dim = 0;
  int hidden = 0;
  std::vector<double> w0;  // hidden x in_dim, row-major
  std::vector<double> b;   // hidden
  std::vector<double> w1;  // hidden
  double out_bias = 0.0;

  static ScalarNet zeros(int in_dim, int hidden);
  std::size_t param_count() const;
  std::vector<double> pack_params() const;
  void unpack_params(const double* p);

  double forward(const Point& x, std::vector<double>* pre_act) const;
  // accumulate d(out)/d(params) * upstream into grad[0..param_count)
  void backward(const Point& x, const std::vector<double>& pre_act, double upstream,
                double* grad) const;
};

// q(z|x) = N(mu(x), sigma_psi^2(x)) with 2 log sigma_psi parameterized, so the
// scale is positive by construction.
struct GaussianEncoder {
  ScalarNet mean_head;
  ScalarNet logvar_head;

  std::size_t param_count() const;
  std::vector<double> pack_params() const;
  void unpack_params(const std::vector<double>& p);
};

struct TrainRun {
  ShallowGenerator generator;
  double sigma = 1.0;
  GaussianEncoder encoder;          // populated by fit_aevb
  std::vector<double> trace;        // per-epoch mean objective per datum
  double best_objective = 0.0;
  int best_epoch = -1;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

// Raised when the training objective stops being finite; carries what was
// observed so far.
class TrainDiverged : public std::runtime_error {
 public:
  TrainDiverged(const std::string& msg, std::vector<double> trace)
      : std::runtime_error(msg), partial_trace(std::move(trace)) {}
  std::vector<double> partial_trace;
};

double standard_normal_cdf(double z);

// Monte-Carlo maximum likelihood: Adam ascent on the batched MC log-likelihood.
TrainRun fit_mc(const std::vector<Point>& data, const GenerativeDensity& init,
                const TrainConfig& cfg, Rng& rng);

struct AevbEval {
  double value = 0.0;
  std::vector<double> grad_generator;  // d/d(generator params..., sigma)
  std::vector<double> grad_encoder;
};

// Single-sample evidence lower bound and its exact gradient through the
// reparameterized draw Z = mu(x) + sigma_psi(x) * eps.
AevbEval aevb_objective(const ShallowGenerator& gen, double sigma,
                        const GaussianEncoder& enc, const Point& x, Rng& rng);

TrainRun fit_aevb(const std::vector<Point>& data, const GenerativeDensity& init,
                  const GaussianEncoder& encoder_init, const TrainConfig& cfg, Rng& rng);

// seedable small-uniform initialization, U[-1/sqrt(fan_in), 1/sqrt(fan_in)]
ShallowGenerator random_shallow(int out_dim, int hidden, Rng& rng);
GaussianEncoder random_encoder(int in_dim, int hidden, Rng& rng);

void write_trace_csv(const std::vector<double>& trace, const std::string& path);

}  // namespace denest
