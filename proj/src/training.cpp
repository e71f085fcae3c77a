#include "denest/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "denest/kv.hpp"

namespace denest {

void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grad) {
  require(params.size() == state.m.size() && grad.size() == params.size(),
          "adam_step: shape mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) throw std::runtime_error("adam_step: non-finite gradient");
  ++state.step;
  const auto& c = state.cfg;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grad[i];
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] += c.lr * mhat / (std::sqrt(vhat) + c.eps);  // ascent
  }
}

void TrainConfig::validate(std::size_t n) const {
  require(epochs >= 1, "TrainConfig: epochs must be >= 1");
  require(batch >= 1 && static_cast<std::size_t>(batch) <= n,
          "TrainConfig: batch must be in [1, n]");
  require(mc_samples >= 1, "TrainConfig: mc_samples must be >= 1");
  require(sigma_min > 0.0 && sigma_min <= sigma_max, "TrainConfig: bad sigma bounds");
  require(hidden >= 1, "TrainConfig: hidden must be >= 1");
}

TrainConfig TrainConfig::from_file(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::parse_file(path);
  TrainConfig c;
  c.epochs = static_cast<int>(kv.get_int("epochs", c.epochs));
  c.batch = static_cast<int>(kv.get_int("batch", c.batch));
  c.mc_samples = static_cast<int>(kv.get_int("mc_samples", c.mc_samples));
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  c.sigma_trainable = kv.get_bool("sigma_trainable", c.sigma_trainable);
  c.sigma_min = kv.get_double("sigma_min", c.sigma_min);
  c.sigma_max = kv.get_double("sigma_max", c.sigma_max);
  c.hidden = static_cast<int>(kv.get_int("hidden", c.hidden));
  c.adam.lr = kv.get_double("learning_rate", c.adam.lr);
  c.refresh_latent = kv.get_bool("refresh_latent", c.refresh_latent);
  c.best_by_objective = kv.get_bool("best_by_objective", c.best_by_objective);
  return c;
}

ScalarNet ScalarNet::zeros(int in_dim, int hidden) {
  ScalarNet n;
  n.in_dim = in_dim;
  n.hidden = hidden;
  n.w0.assign(static_cast<std::size_t>(hidden) * in_dim, 0.0);
  n.b.assign(hidden, 0.0);
  n.w1.assign(hidden, 0.0);
  return n;
}

std::size_t ScalarNet::param_count() const { return w0.size() + b.size() + w1.size() + 1; }

std::vector<double> ScalarNet::pack_params() const {
  std::vector<double> p;
  p.reserve(param_count());
  p.insert(p.end(), w0.begin(), w0.end());
  p.insert(p.end(), b.begin(), b.end());
  p.insert(p.end(), w1.begin(), w1.end());
  p.push_back(out_bias);
  return p;
}

void ScalarNet::unpack_params(const double* p) {
  std::size_t i = 0;
  for (auto& v : w0) v = p[i++];
  for (auto& v : b) v = p[i++];
  for (auto& v : w1) v = p[i++];
  out_bias = p[i];
}

double ScalarNet::forward(const Point& x, std::vector<double>* pre_act) const {
  double out = out_bias;
  if (pre_act) pre_act->resize(hidden);
  for (int j = 0; j < hidden; ++j) {
    double a = -b[j];
    for (int k = 0; k < in_dim; ++k) a += w0[static_cast<std::size_t>(j) * in_dim + k] * x[k];
    if (pre_act) (*pre_act)[j] = a;
    if (a > 0.0) out += w1[j] * a;
  }
  return out;
}

void ScalarNet::backward(const Point& x, const std::vector<double>& pre_act,
                         double upstream, double* grad) const {
  double* gw0 = grad;
  double* gb = gw0 + w0.size();
  double* gw1 = gb + b.size();
  double* gbias = gw1 + w1.size();
  *gbias += upstream;
  for (int j = 0; j < hidden; ++j) {
    const double a = pre_act[j];
    if (a > 0.0) {
      gw1[j] += upstream * a;
      const double t = upstream * w1[j];
      gb[j] -= t;
      for (int k = 0; k < in_dim; ++k)
        gw0[static_cast<std::size_t>(j) * in_dim + k] += t * x[k];
    }
  }
}

std::size_t GaussianEncoder::param_count() const {
  return mean_head.param_count() + logvar_head.param_count();
}

std::vector<double> GaussianEncoder::pack_params() const {
  std::vector<double> p = mean_head.pack_params();
  const std::vector<double> q = logvar_head.pack_params();
  p.insert(p.end(), q.begin(), q.end());
  return p;
}

void GaussianEncoder::unpack_params(const std::vector<double>& p) {
  require(p.size() == param_count(), "GaussianEncoder: unpack size mismatch");
  mean_head.unpack_params(p.data());
  logvar_head.unpack_params(p.data() + mean_head.param_count());
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

namespace {

double clamp_log_sigma(double log_sigma, const TrainConfig& cfg) {
  return std::clamp(log_sigma, std::log(cfg.sigma_min), std::log(cfg.sigma_max));
}

struct EpochStats {
  double objective_sum = 0.0;
  std::size_t count = 0;
};

}  // namespace

TrainRun fit_mc(const std::vector<Point>& data, const GenerativeDensity& init,
                const TrainConfig& cfg, Rng& rng) {
  require(!data.empty(), "fit_mc: data must be nonempty");
  require(init.is_shallow(), "fit_mc: initial generator must be shallow");
  cfg.validate(data.size());
  require(init.shallow().hidden == cfg.hidden, "fit_mc: init width does not match config");
  const auto t_start = std::chrono::steady_clock::now();

  ShallowGenerator gen = init.shallow();
  double log_sigma = std::log(init.sigma);
  const std::size_t gen_params = gen.param_count();

  std::vector<double> params = gen.pack_params();
  if (cfg.sigma_trainable) params.push_back(clamp_log_sigma(log_sigma, cfg));
  AdamState adam(params.size(), cfg.adam);

  // fixed-draw mode replays the same latent stream every batch
  const std::uint64_t fixed_seed = rng.next_u64();

  TrainRun run;
  run.seed = cfg.seed;
  ShallowGenerator best_gen = gen;
  double best_log_sigma = log_sigma;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(params.size());
  std::vector<Point> batch;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    EpochStats stats;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(data[order[k]]);

      GenerativeDensity current;
      current.generator = gen;
      current.sigma = std::exp(log_sigma);
      McObjective obj;
      if (cfg.refresh_latent) {
        obj = grad_mc_objective(current, batch, cfg.mc_samples, rng);
      } else {
        Rng replay(fixed_seed);
        obj = grad_mc_objective(current, batch, cfg.mc_samples, replay);
      }
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (std::size_t i = 0; i < gen_params; ++i) grad[i] = obj.grad[i] * scale;
      if (cfg.sigma_trainable)
        grad[gen_params] = obj.grad[gen_params] * current.sigma * scale;  // log-sigma chain
      adam_step(adam, params, grad);
      if (cfg.sigma_trainable) {
        params[gen_params] = clamp_log_sigma(params[gen_params], cfg);
        log_sigma = params[gen_params];
      }
      gen.unpack_params(std::vector<double>(params.begin(), params.begin() + gen_params));
      stats.objective_sum += obj.value;
      stats.count += batch.size();
    }
    const double epoch_obj = stats.objective_sum / static_cast<double>(stats.count);
    if (!std::isfinite(epoch_obj))
      throw TrainDiverged("fit_mc: objective became non-finite at epoch " +
                              std::to_string(epoch),
                          run.trace);
    run.trace.push_back(epoch_obj);
    if (run.best_epoch < 0 || epoch_obj > run.best_objective) {
      run.best_objective = epoch_obj;
      run.best_epoch = epoch;
      best_gen = gen;
      best_log_sigma = log_sigma;
    }
  }

  if (cfg.best_by_objective) {
    run.generator = best_gen;
    run.sigma = std::exp(best_log_sigma);
  } else {
    run.generator = gen;
    run.sigma = std::exp(log_sigma);
  }
  if (!cfg.sigma_trainable) run.sigma = init.sigma;
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return run;
}

AevbEval aevb_objective(const ShallowGenerator& gen, double sigma,
                        const GaussianEncoder& enc, const Point& x, Rng& rng) {
  require(sigma > 0.0, "aevb_objective: sigma must be positive");
  const int d = gen.out_dim;
  require(static_cast<int>(x.size()) == d, "aevb_objective: datum dim mismatch");

  AevbEval out;
  out.grad_generator.assign(gen.param_count() + 1, 0.0);
  out.grad_encoder.assign(enc.param_count(), 0.0);

  std::vector<double> pre_mu, pre_lv;
  const double mu = enc.mean_head.forward(x, &pre_mu);
  const double lv = enc.logvar_head.forward(x, &pre_lv);
  const double s_psi = std::exp(0.5 * lv);
  const double eps = rng.normal();
  const double z = mu + s_psi * eps;
  const double u = standard_normal_cdf(z);

  // generator forward with pre-activations kept for backprop
  std::vector<double> pre(gen.hidden);
  Point y = gen.out_bias;
  for (int j = 0; j < gen.hidden; ++j) {
    pre[j] = gen.w_in[j] * u - gen.b[j];
    if (pre[j] > 0.0)
      for (int i = 0; i < d; ++i)
        y[i] += gen.w_out[static_cast<std::size_t>(i) * gen.hidden + j] * pre[j];
  }
  Point r(d);
  double r2 = 0.0;
  for (int i = 0; i < d; ++i) {
    r[i] = x[i] - y[i];
    r2 += r[i] * r[i];
  }
  const double s2 = sigma * sigma;

  // log p(x, Z) - log q(Z | x) with the Gaussian entropy terms folded in
  out.value = -0.5 * d * (kLog2Pi + 2.0 * std::log(sigma)) - r2 / (2.0 * s2) -
              0.5 * z * z + 0.5 * lv + 0.5 * eps * eps;

  // generator parameters (u held fixed)
  double* gw_in = out.grad_generator.data();
  double* gb = gw_in + gen.hidden;
  double* gw_out = gb + gen.hidden;
  double* gbias = gw_out + static_cast<std::size_t>(d) * gen.hidden;
  double slope_dot = 0.0;  // sum_i delta_y[i] * dg_i/du
  for (int i = 0; i < d; ++i) {
    const double dy = r[i] / s2;
    gbias[i] += dy;
    for (int j = 0; j < gen.hidden; ++j) {
      if (pre[j] > 0.0) {
        const double w = gen.w_out[static_cast<std::size_t>(i) * gen.hidden + j];
        gw_out[static_cast<std::size_t>(i) * gen.hidden + j] += dy * pre[j];
        gw_in[j] += dy * w * u;
        gb[j] -= dy * w;
        slope_dot += dy * w * gen.w_in[j];
      }
    }
  }
  out.grad_generator.back() = -d / sigma + r2 / (sigma * s2);

  // reparameterized path: dZ feeds both encoder heads
  const double phi_z = std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
  const double dvalue_dz = slope_dot * phi_z - z;
  const double dmu = dvalue_dz;
  const double dlv = dvalue_dz * 0.5 * s_psi * eps + 0.5;
  enc.mean_head.backward(x, pre_mu, dmu, out.grad_encoder.data());
  enc.logvar_head.backward(x, pre_lv, dlv,
                           out.grad_encoder.data() + enc.mean_head.param_count());
  return out;
}

TrainRun fit_aevb(const std::vector<Point>& data, const GenerativeDensity& init,
                  const GaussianEncoder& encoder_init, const TrainConfig& cfg, Rng& rng) {
  require(!data.empty(), "fit_aevb: data must be nonempty");
  require(init.is_shallow(), "fit_aevb: initial generator must be shallow");
  cfg.validate(data.size());
  require(init.shallow().hidden == cfg.hidden, "fit_aevb: init width does not match config");
  const auto t_start = std::chrono::steady_clock::now();

  ShallowGenerator gen = init.shallow();
  GaussianEncoder enc = encoder_init;
  double log_sigma = std::log(init.sigma);
  const std::size_t gen_params = gen.param_count();
  const std::size_t enc_params = enc.param_count();
  const std::size_t sigma_slot = cfg.sigma_trainable ? 1 : 0;

  std::vector<double> params = gen.pack_params();
  if (cfg.sigma_trainable) params.push_back(clamp_log_sigma(log_sigma, cfg));
  {
    const std::vector<double> ep = enc.pack_params();
    params.insert(params.end(), ep.begin(), ep.end());
  }
  AdamState adam(params.size(), cfg.adam);

  TrainRun run;
  run.seed = cfg.seed;
  ShallowGenerator best_gen = gen;
  GaussianEncoder best_enc = enc;
  double best_log_sigma = log_sigma;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(params.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    EpochStats stats;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_value = 0.0;
      const double sigma = std::exp(log_sigma);
      for (std::size_t k = start; k < stop; ++k) {
        const AevbEval ev = aevb_objective(gen, sigma, enc, data[order[k]], rng);
        batch_value += ev.value;
        for (std::size_t i = 0; i < gen_params; ++i) grad[i] += ev.grad_generator[i];
        if (cfg.sigma_trainable) grad[gen_params] += ev.grad_generator[gen_params] * sigma;
        for (std::size_t i = 0; i < enc_params; ++i)
          grad[gen_params + sigma_slot + i] += ev.grad_encoder[i];
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (auto& g : grad) g *= scale;
      adam_step(adam, params, grad);
      if (cfg.sigma_trainable) {
        params[gen_params] = clamp_log_sigma(params[gen_params], cfg);
        log_sigma = params[gen_params];
      }
      gen.unpack_params(std::vector<double>(params.begin(), params.begin() + gen_params));
      enc.unpack_params(std::vector<double>(params.begin() + gen_params + sigma_slot,
                                            params.end()));
      stats.objective_sum += batch_value;
      stats.count += stop - start;
    }
    const double epoch_obj = stats.objective_sum / static_cast<double>(stats.count);
    if (!std::isfinite(epoch_obj))
      throw TrainDiverged("fit_aevb: objective became non-finite at epoch " +
                              std::to_string(epoch),
                          run.trace);
    run.trace.push_back(epoch_obj);
    if (run.best_epoch < 0 || epoch_obj > run.best_objective) {
      run.best_objective = epoch_obj;
      run.best_epoch = epoch;
      best_gen = gen;
      best_enc = enc;
      best_log_sigma = log_sigma;
    }
  }

  if (cfg.best_by_objective) {
    run.generator = best_gen;
    run.encoder = best_enc;
    run.sigma = std::exp(best_log_sigma);
  } else {
    run.generator = gen;
    run.encoder = enc;
    run.sigma = std::exp(log_sigma);
  }
  if (!cfg.sigma_trainable) run.sigma = init.sigma;
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return run;
}

ShallowGenerator random_shallow(int out_dim, int hidden, Rng& rng) {
  ShallowGenerator g = ShallowGenerator::zeros(out_dim, hidden);
  const double s_out = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto& v : g.w_in) v = rng.uniform(-1.0, 1.0);
  for (auto& v : g.b) v = rng.uniform(-1.0, 1.0);
  for (auto& v : g.w_out) v = rng.uniform(-s_out, s_out);
  for (auto& v : g.out_bias) v = rng.uniform(-s_out, s_out);
  return g;
}

GaussianEncoder random_encoder(int in_dim, int hidden, Rng& rng) {
  const double s_in = 1.0 / std::sqrt(static_cast<double>(in_dim));
  const double s_hidden = 1.0 / std::sqrt(static_cast<double>(hidden));
  GaussianEncoder enc;
  for (ScalarNet* net : {&enc.mean_head, &enc.logvar_head}) {
    *net = ScalarNet::zeros(in_dim, hidden);
    for (auto& v : net->w0) v = rng.uniform(-s_in, s_in);
    for (auto& v : net->b) v = rng.uniform(-s_in, s_in);
    for (auto& v : net->w1) v = rng.uniform(-s_hidden, s_hidden);
    net->out_bias = rng.uniform(-s_hidden, s_hidden);
  }
  return enc;
}

void write_trace_csv(const std::vector<double>& trace, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "epoch,objective\n";
  char buf[64];
  for (std::size_t e = 0; e < trace.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", e, trace[e]);
    os << buf;
  }
}

}  // namespace denest
