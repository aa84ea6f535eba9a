#include "ctcd/estimator/cdiffusion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "ctcd/common/error.hpp"
#include "ctcd/nn/layers.hpp"
#include "ctcd/nn/ops.hpp"
#include "ctcd/nn/optim.hpp"

namespace ctcd::estimator {

using nn::Matrix;
using nn::Tensor;

namespace {

// nn.Linear-style initialization scale (uniform fan-in bound has sd 1/sqrt(3 fan_in)).
constexpr double kInitScale = 0.5773502691896258;
constexpr double kMinNoiseFeature = 1e-10;

void add_residual_mlp(nn::ParameterSet& p, int in, int out, const DenoiserConfig& c, Rng& rng) {
  nn::add_linear(p, "in", in, c.width, rng, kInitScale);
  for (int b = 0; b < c.blocks; ++b) {
    nn::add_linear(p, "block" + std::to_string(b) + ".fc1", c.width, c.width, rng, kInitScale);
    nn::add_linear(p, "block" + std::to_string(b) + ".fc2", c.width, c.width, rng, kInitScale);
  }
  p.add("out.weight", Matrix::Zero(c.width, out));
  p.add("out.bias", Matrix::Zero(1, out));
}

Tensor residual_mlp(const nn::ParameterSet& p, const Tensor& x, int blocks) {
  Tensor h = nn::linear(p, "in", x);
  for (int b = 0; b < blocks; ++b) {
    const std::string name = "block" + std::to_string(b);
    h = nn::add(h, nn::linear(p, name + ".fc2", nn::silu(nn::linear(p, name + ".fc1", nn::silu(h)))));
  }
  return nn::linear(p, "out", nn::silu(h));
}

Matrix time_embedding(std::span<const int> t, int freqs) {
  Matrix e(static_cast<Eigen::Index>(t.size()), 2 * freqs);
  for (std::size_t r = 0; r < t.size(); ++r) {
    for (int i = 0; i < freqs; ++i) {
      const double f = std::exp(-std::log(1000.0) * i / freqs);
      e(static_cast<Eigen::Index>(r), i) = std::sin(t[r] * f);
      e(static_cast<Eigen::Index>(r), freqs + i) = std::cos(t[r] * f);
    }
  }
  return e;
}

void scaled_pairs(std::span<const cplx> h, double* out) {
  for (std::size_t k = 0; k < h.size(); ++k) {
    out[2 * k] = std::numbers::sqrt2 * h[k].real();
    out[2 * k + 1] = std::numbers::sqrt2 * h[k].imag();
  }
}

CVector unscaled_pairs(const double* x, int K) {
  CVector h(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) h[k] = cplx(x[2 * k], x[2 * k + 1]) / std::numbers::sqrt2;
  return h;
}

bool all_finite(const nn::ParameterSet& p) {
  for (const auto& [n, t] : p.entries())
    if (!t.value().allFinite()) return false;
  return true;
}

void check_channels(std::span<const channel::ChannelRealization> channels, int K) {
  if (channels.empty()) throw ConfigError("estimator training needs at least one channel");
  for (const auto& h : channels)
    if (static_cast<int>(h.gains.size()) != K) throw InputError("channel length differs from estimator K");
}

}  // namespace

void DenoiserConfig::validate() const {
  if (width < 1 || blocks < 0 || time_frequencies < 1) throw ConfigError("denoiser widths must be positive");
  if (!(prior_floor > 0.0)) throw ConfigError("denoiser prior_floor must be positive");
}

void TrainConfig::validate() const {
  if (steps < 0 || batch < 1) throw ConfigError("training steps must be >= 0 and batch >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (snr_max_db < snr_min_db) throw ConfigError("training SNR range is empty");
  if (log_every < 1 || validation_rows < 1) throw ConfigError("log_every and validation_rows must be positive");
}

EstimatorParams EstimatorParams::clone() const {
  EstimatorParams c;
  c.num_subcarriers = num_subcarriers;
  c.pilot_positions = pilot_positions;
  c.schedule = schedule;
  c.config = config;
  c.net = net.clone();
  return c;
}

bool EstimatorParams::identical(const EstimatorParams& o) const {
  return num_subcarriers == o.num_subcarriers && pilot_positions == o.pilot_positions && schedule == o.schedule &&
         config == o.config && net.identical(o.net);
}

EstimatorParams init_estimator(int num_subcarriers, std::vector<int> pilot_positions,
                               const DiffusionSchedule& schedule, const DenoiserConfig& config, std::uint64_t seed) {
  config.validate();
  if (num_subcarriers < 8) throw ConfigError("estimator needs K >= 8");
  if (pilot_positions.empty()) throw ConfigError("estimator needs at least one pilot");
  if (schedule.num_steps() < 1) throw ConfigError("estimator needs a diffusion schedule");
  EstimatorParams p;
  p.num_subcarriers = num_subcarriers;
  p.pilot_positions = std::move(pilot_positions);
  p.schedule = schedule;
  p.config = config;
  Rng rng(seed);
  const int dim = 2 * num_subcarriers;
  add_residual_mlp(p.net, dim + dim + 1 + 2 * config.time_frequencies, dim, config, rng);
  return p;
}

std::vector<double> make_condition(const channel::PilotObservation& obs, int num_subcarriers) {
  const auto ls = ls_estimate(obs, num_subcarriers);
  std::vector<double> c(static_cast<std::size_t>(2 * num_subcarriers + 1));
  scaled_pairs(ls.gains_hat, c.data());
  c.back() = std::log10(std::max(obs.noise_variance, kMinNoiseFeature)) + 1.0;
  return c;
}

ConditionBatch draw_condition_batch(std::span<const channel::ChannelRealization> channels,
                                    std::span<const int> pilot_positions, int rows, double snr_min_db,
                                    double snr_max_db, Rng& rng) {
  const int K = static_cast<int>(channels.front().gains.size());
  ConditionBatch b;
  b.x0.resize(rows, 2 * K);
  b.condition.resize(rows, 2 * K + 1);
  b.noise_variance.resize(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    const auto& h = channels[rng.uniform_index(channels.size())];
    const double snr = rng.uniform(snr_min_db, snr_max_db);
    const auto obs = channel::make_pilot_observation(h, pilot_positions, snr, rng.next_u64());
    scaled_pairs(h.gains, b.x0.row(r).data());
    const auto c = make_condition(obs, K);
    std::copy(c.begin(), c.end(), b.condition.row(r).data());
    b.noise_variance[r] = obs.noise_variance;
  }
  return b;
}

Tensor predict_noise(const EstimatorParams& params, const Matrix& x_t, std::span<const int> t,
                     const Matrix& condition, std::span<const double> noise_variance) {
  const auto B = x_t.rows();
  const auto dim = x_t.cols();
  if (dim != 2 * params.num_subcarriers || condition.rows() != B || condition.cols() != dim + 1 ||
      static_cast<Eigen::Index>(t.size()) != B || static_cast<Eigen::Index>(noise_variance.size()) != B)
    throw InputError("denoiser input shapes are inconsistent");

  Matrix input(B, dim + dim + 1 + 2 * params.config.time_frequencies);
  input << x_t, condition, time_embedding(t, params.config.time_frequencies);
  const Tensor o = residual_mlp(params.net, Tensor::constant(std::move(input)), params.config.blocks);

  // x0_hat = c_skip x_t + c_mean m + c_out F, with m the LS condition and the prior
  // variance v around it; eps_hat follows from x_t = a x0 + s eps.
  Matrix base(B, dim);
  Matrix out_scale(B, 1);
  for (Eigen::Index r = 0; r < B; ++r) {
    const double ab = params.schedule.alpha_bar(t[r]);
    const double a = std::sqrt(ab);
    const double s = std::sqrt(1.0 - ab);
    const double v = noise_variance[r] + params.config.prior_floor;
    const double den = a * a * v + s * s;
    const double c_skip = a * v / den;
    const double c_mean = s * s / den;
    const double c_out = s * std::sqrt(v) / std::sqrt(den);
    base.row(r) = (x_t.row(r) - a * (c_skip * x_t.row(r) + c_mean * condition.row(r).head(dim))) / s;
    out_scale(r, 0) = -a * c_out / s;
  }
  return nn::add(Tensor::constant(std::move(base)), nn::scale_rows(o, Tensor::constant(std::move(out_scale))));
}

Tensor diffusion_loss(const EstimatorParams& params, const ConditionBatch& batch, Rng& rng) {
  const auto B = batch.x0.rows();
  const auto dim = batch.x0.cols();
  std::vector<int> t(static_cast<std::size_t>(B));
  Matrix eps(B, dim), x_t(B, dim);
  const int T = params.schedule.num_steps();
  for (Eigen::Index r = 0; r < B; ++r) {
    t[r] = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(T)));
    const double ab = params.schedule.alpha_bar(t[r]);
    for (Eigen::Index i = 0; i < dim; ++i) eps(r, i) = rng.normal();
    x_t.row(r) = std::sqrt(ab) * batch.x0.row(r) + std::sqrt(1.0 - ab) * eps.row(r);
  }
  const Tensor pred = predict_noise(params, x_t, t, batch.condition, batch.noise_variance);
  return nn::mse(pred, Tensor::constant(std::move(eps)));
}

double validation_loss(const EstimatorParams& params, std::span<const channel::ChannelRealization> channels,
                       int rows, double snr_min_db, double snr_max_db, std::uint64_t seed) {
  check_channels(channels, params.num_subcarriers);
  nn::NoGradGuard guard;
  Rng rng(seed);
  const auto batch = draw_condition_batch(channels, params.pilot_positions, rows, snr_min_db, snr_max_db, rng);
  return diffusion_loss(params, batch, rng).value()(0, 0);
}

TrainLog train_diffusion(EstimatorParams& params, std::span<const channel::ChannelRealization> channels,
                         std::span<const channel::ChannelRealization> validation, const TrainConfig& config) {
  config.validate();
  check_channels(channels, params.num_subcarriers);
  const auto val = validation.empty() ? channels : validation;
  const auto val_seed = derive_seed(config.seed, {0x7661});
  const auto t0 = std::chrono::steady_clock::now();

  TrainLog log;
  log.initial_validation_loss =
      validation_loss(params, val, config.validation_rows, config.snr_min_db, config.snr_max_db, val_seed);
  nn::Adam adam(params.net, {.clip_norm = 1.0});
  Rng rng(derive_seed(config.seed, {0x7472}));
  nn::ParameterSet last_finite = params.net.clone();
  double running = 0.0;
  int running_n = 0;
  for (int step = 0; step < config.steps; ++step) {
    const auto batch = draw_condition_batch(channels, params.pilot_positions, config.batch, config.snr_min_db,
                                            config.snr_max_db, rng);
    const Tensor loss = diffusion_loss(params, batch, rng);
    const double value = loss.value()(0, 0);
    if (!std::isfinite(value) || !all_finite(params.net)) {
      std::string where;
      if (!config.failure_checkpoint.empty()) {
        EstimatorParams snapshot = params.clone();
        snapshot.net = last_finite;
        nn::Archive a;
        store_estimator(a, "estimator.", snapshot);
        nn::save_archive(a, config.failure_checkpoint);
        where = config.failure_checkpoint.string();
      }
      throw TrainingError("diffusion training diverged at step " + std::to_string(step), where);
    }
    loss.backward();
    adam.step(nn::cosine_lr(config.learning_rate, step, config.steps, 0.02));
    running += value;
    ++running_n;
    if ((step + 1) % config.log_every == 0 || step + 1 == config.steps) {
      log.entries.push_back({step + 1, running / running_n});
      running = 0.0;
      running_n = 0;
      last_finite = params.net.clone();
    }
  }
  log.final_validation_loss =
      validation_loss(params, val, config.validation_rows, config.snr_min_db, config.snr_max_db, val_seed);
  log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return log;
}

CDiffusionResult cdiffusion_train(const channel::CsiDataset& dataset, std::span<const int> pilot_positions,
                                  const DiffusionSchedule& schedule, const DenoiserConfig& net_config,
                                  const TrainConfig& train_config) {
  const auto train = dataset.select(channel::Split::Train);
  if (train.empty()) throw ConfigError("dataset has no train split");
  const auto val = dataset.select(channel::Split::Validation);
  CDiffusionResult r{init_estimator(dataset.grid.num_subcarriers, {pilot_positions.begin(), pilot_positions.end()},
                                    schedule, net_config, derive_seed(train_config.seed, {0x696e6974})),
                     {}};
  r.log = train_diffusion(r.params, train, val, train_config);
  return r;
}

std::vector<ChannelEstimate> cdiffusion_sample(std::span<const channel::PilotObservation> obs,
                                               const EstimatorParams& params, std::uint64_t seed, int num_draws) {
  if (num_draws < 1) throw ConfigError("num_draws must be >= 1");
  const int K = params.num_subcarriers;
  const int dim = 2 * K;
  const int T = params.schedule.num_steps();
  std::vector<ChannelEstimate> out;
  out.reserve(obs.size());
  nn::NoGradGuard guard;

  const std::size_t chunk = std::max<std::size_t>(1, 1024 / static_cast<std::size_t>(num_draws));
  for (std::size_t first = 0; first < obs.size(); first += chunk) {
    const std::size_t n = std::min(chunk, obs.size() - first);
    const auto rows = static_cast<Eigen::Index>(n * num_draws);
    std::vector<Rng> rngs;
    Matrix cond(rows, dim + 1);
    std::vector<double> nv(static_cast<std::size_t>(rows));
    for (std::size_t i = 0; i < n; ++i) {
      if (obs[first + i].pilot_positions != params.pilot_positions)
        throw InputError("observation pilot layout differs from the trained layout");
      rngs.emplace_back(derive_seed(seed, {first + i}));
      const auto c = make_condition(obs[first + i], K);
      for (int d = 0; d < num_draws; ++d) {
        const auto r = static_cast<Eigen::Index>(i * num_draws + d);
        std::copy(c.begin(), c.end(), cond.row(r).data());
        nv[r] = obs[first + i].noise_variance;
      }
    }
    Matrix x(rows, dim);
    auto fill_noise = [&](Matrix& z) {
      for (std::size_t i = 0; i < n; ++i)
        for (int d = 0; d < num_draws; ++d)
          for (int j = 0; j < dim; ++j) z(static_cast<Eigen::Index>(i * num_draws + d), j) = rngs[i].normal();
    };
    fill_noise(x);
    Matrix z(rows, dim);
    std::vector<int> tv(static_cast<std::size_t>(rows));
    for (int t = T; t >= 1; --t) {
      std::fill(tv.begin(), tv.end(), t);
      const Matrix eps = predict_noise(params, x, tv, cond, nv).value();
      const double beta = params.schedule.beta(t);
      const double ab = params.schedule.alpha_bar(t);
      x = (x - (beta / std::sqrt(1.0 - ab)) * eps) / std::sqrt(1.0 - beta);
      if (t > 1) {
        const double var = beta * (1.0 - params.schedule.alpha_bar(t - 1)) / (1.0 - ab);
        fill_noise(z);
        x += std::sqrt(var) * z;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const nn::RowVector mean = x.middleRows(static_cast<Eigen::Index>(i * num_draws), num_draws).colwise().mean();
      ChannelEstimate e;
      e.method = Method::CDIFFUSION;
      e.gains_hat = unscaled_pairs(mean.data(), K);
      e.pilot_positions = obs[first + i].pilot_positions;
      e.noise_variance = obs[first + i].noise_variance;
      e.num_draws = num_draws;
      out.push_back(std::move(e));
    }
  }
  return out;
}

ChannelEstimate cdiffusion_sample(const channel::PilotObservation& obs, const EstimatorParams& params,
                                  std::uint64_t seed, int num_draws) {
  return cdiffusion_sample(std::span(&obs, 1), params, seed, num_draws).front();
}

RegressionResult train_regression_denoiser(std::span<const channel::ChannelRealization> channels,
                                           std::span<const int> pilot_positions, int num_subcarriers,
                                           const DenoiserConfig& net_config, const TrainConfig& config) {
  net_config.validate();
  config.validate();
  check_channels(channels, num_subcarriers);
  const auto t0 = std::chrono::steady_clock::now();
  RegressionResult r;
  r.model.num_subcarriers = num_subcarriers;
  r.model.pilot_positions.assign(pilot_positions.begin(), pilot_positions.end());
  r.model.config = net_config;
  Rng init(derive_seed(config.seed, {0x696e6974}));
  const int dim = 2 * num_subcarriers;
  add_residual_mlp(r.model.net, dim + 1, dim, net_config, init);

  auto loss_of = [&](const ConditionBatch& b) {
    const Tensor o = residual_mlp(r.model.net, Tensor::constant(b.condition), net_config.blocks);
    const Tensor pred = nn::add(Tensor::constant(b.condition.leftCols(dim)), o);
    return nn::mse(pred, Tensor::constant(b.x0));
  };
  auto val_loss = [&] {
    nn::NoGradGuard guard;
    Rng vr(derive_seed(config.seed, {0x7661}));
    return loss_of(draw_condition_batch(channels, pilot_positions, config.validation_rows, config.snr_min_db,
                                        config.snr_max_db, vr))
        .value()(0, 0);
  };

  r.log.initial_validation_loss = val_loss();
  nn::Adam adam(r.model.net, {.clip_norm = 1.0});
  Rng rng(derive_seed(config.seed, {0x7472}));
  double running = 0.0;
  int running_n = 0;
  for (int step = 0; step < config.steps; ++step) {
    const Tensor loss = loss_of(draw_condition_batch(channels, pilot_positions, config.batch, config.snr_min_db,
                                                     config.snr_max_db, rng));
    const double value = loss.value()(0, 0);
    if (!std::isfinite(value)) throw TrainingError("regression denoiser diverged at step " + std::to_string(step));
    loss.backward();
    adam.step(nn::cosine_lr(config.learning_rate, step, config.steps, 0.02));
    running += value;
    ++running_n;
    if ((step + 1) % config.log_every == 0 || step + 1 == config.steps) {
      r.log.entries.push_back({step + 1, running / running_n});
      running = 0.0;
      running_n = 0;
    }
  }
  r.log.final_validation_loss = val_loss();
  r.log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<ChannelEstimate> regression_estimate(std::span<const channel::PilotObservation> obs,
                                                 const RegressionDenoiser& model) {
  const int K = model.num_subcarriers;
  const int dim = 2 * K;
  nn::NoGradGuard guard;
  Matrix cond(static_cast<Eigen::Index>(obs.size()), dim + 1);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto c = make_condition(obs[i], K);
    std::copy(c.begin(), c.end(), cond.row(static_cast<Eigen::Index>(i)).data());
  }
  const Matrix o = residual_mlp(model.net, Tensor::constant(cond), model.config.blocks).value();
  const Matrix pred = cond.leftCols(dim) + o;
  std::vector<ChannelEstimate> out;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    ChannelEstimate e;
    e.method = Method::DENOISER;
    e.gains_hat = unscaled_pairs(pred.row(static_cast<Eigen::Index>(i)).data(), K);
    e.pilot_positions = obs[i].pilot_positions;
    e.noise_variance = obs[i].noise_variance;
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

nlohmann::json config_json(const DenoiserConfig& c) {
  return {{"width", c.width}, {"blocks", c.blocks}, {"time_frequencies", c.time_frequencies},
          {"prior_floor", c.prior_floor}};
}

DenoiserConfig config_from_json(const nlohmann::json& j) {
  DenoiserConfig c;
  c.width = j.at("width").get<int>();
  c.blocks = j.at("blocks").get<int>();
  c.time_frequencies = j.at("time_frequencies").get<int>();
  c.prior_floor = j.at("prior_floor").get<double>();
  return c;
}

const nlohmann::json& section(const nn::Archive& a, const std::string& prefix, const char* kind) {
  if (!a.meta.contains(prefix)) throw InputError("archive has no '" + prefix + "' section");
  const auto& j = a.meta.at(prefix);
  if (j.value("kind", "") != kind) throw InputError("archive section '" + prefix + "' is not a " + kind);
  return j;
}

}  // namespace

void store_estimator(nn::Archive& archive, const std::string& prefix, const EstimatorParams& params) {
  archive.meta[prefix] = {{"kind", "cdiffusion"},
                          {"num_subcarriers", params.num_subcarriers},
                          {"pilot_positions", params.pilot_positions},
                          {"schedule",
                           {{"num_steps", params.schedule.num_steps()},
                            {"beta_start", params.schedule.beta_start()},
                            {"beta_end", params.schedule.beta_end()}}},
                          {"network", config_json(params.config)}};
  archive.put_parameters(prefix, params.net);
}

EstimatorParams load_estimator(const nn::Archive& archive, const std::string& prefix) {
  const auto& j = section(archive, prefix, "cdiffusion");
  EstimatorParams p;
  try {
    p.num_subcarriers = j.at("num_subcarriers").get<int>();
    p.pilot_positions = j.at("pilot_positions").get<std::vector<int>>();
    const auto& s = j.at("schedule");
    p.schedule = DiffusionSchedule::linear(s.at("num_steps").get<int>(), s.at("beta_start").get<double>(),
                                           s.at("beta_end").get<double>());
    p.config = config_from_json(j.at("network"));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed estimator metadata: ") + e.what());
  }
  p.net = archive.parameters(prefix);
  return p;
}

void store_regression(nn::Archive& archive, const std::string& prefix, const RegressionDenoiser& model) {
  archive.meta[prefix] = {{"kind", "regression"},
                          {"num_subcarriers", model.num_subcarriers},
                          {"pilot_positions", model.pilot_positions},
                          {"network", config_json(model.config)}};
  archive.put_parameters(prefix, model.net);
}

RegressionDenoiser load_regression(const nn::Archive& archive, const std::string& prefix) {
  const auto& j = section(archive, prefix, "regression");
  RegressionDenoiser m;
  try {
    m.num_subcarriers = j.at("num_subcarriers").get<int>();
    m.pilot_positions = j.at("pilot_positions").get<std::vector<int>>();
    m.config = config_from_json(j.at("network"));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed denoiser metadata: ") + e.what());
  }
  m.net = archive.parameters(prefix);
  return m;
}

nlohmann::json to_json(const TrainLog& log) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : log.entries) entries.push_back({{"step", e.step}, {"loss", e.loss}});
  return {{"entries", entries},
          {"initial_validation_loss", log.initial_validation_loss},
          {"final_validation_loss", log.final_validation_loss}};
}

}  // namespace ctcd::estimator
