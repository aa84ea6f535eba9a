#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ctcd/channel/channel_sim.hpp"
#include "ctcd/channel/csi_dataset.hpp"
#include "ctcd/common/random.hpp"
#include "ctcd/estimator/classical.hpp"
#include "ctcd/estimator/schedule.hpp"
#include "ctcd/nn/archive.hpp"
#include "ctcd/nn/parameters.hpp"

namespace ctcd::estimator {

/// Residual MLP denoiser. Channel vectors enter as 2K reals, consecutive (re, im) pairs,
/// scaled by sqrt(2) so every coordinate has unit variance.
struct DenoiserConfig {
  int width = 256;
  int blocks = 3;
  int time_frequencies = 16;  // sinusoidal timestep embedding uses sin and cos of each
  /// Added to the pilot noise variance when forming the prior around the LS condition.
  double prior_floor = 0.003;

  void validate() const;
  bool operator==(const DenoiserConfig&) const = default;
};

struct TrainConfig {
  int steps = 3000;
  int batch = 256;
  double learning_rate = 1e-3;
  double snr_min_db = 0.0;
  double snr_max_db = 20.0;
  std::uint64_t seed = 1;
  int log_every = 100;
  int validation_rows = 512;
  /// Where the last finite parameters are written if training diverges. Empty: not written.
  std::filesystem::path failure_checkpoint;

  void validate() const;
};

struct TrainLogEntry {
  int step = 0;
  double loss = 0.0;
};

struct TrainLog {
  std::vector<TrainLogEntry> entries;
  double initial_validation_loss = 0.0;
  double final_validation_loss = 0.0;
  double wall_seconds = 0.0;
};

/// Trained pilot-conditioned denoiser plus everything needed to sample from it.
struct EstimatorParams {
  int num_subcarriers = 64;
  std::vector<int> pilot_positions;
  DiffusionSchedule schedule;
  DenoiserConfig config;
  nn::ParameterSet net;

  /// Deep copy.
  EstimatorParams clone() const;
  bool identical(const EstimatorParams& other) const;
};

/// Freshly initialized parameters. The output layer starts at zero, so the untrained
/// model predicts the Gaussian posterior mean around the LS condition.
EstimatorParams init_estimator(int num_subcarriers, std::vector<int> pilot_positions,
                               const DiffusionSchedule& schedule, const DenoiserConfig& config,
                               std::uint64_t seed);

/// Training example stream: channels, per-row SNR, the pilot observation drawn from it.
struct ConditionBatch {
  nn::Matrix x0;         // [B, 2K] scaled true channels
  nn::Matrix condition;  // [B, 2K + 1] scaled LS estimate, log10 noise variance + 1
  std::vector<double> noise_variance;
};

/// Builds the condition vector for one observation.
std::vector<double> make_condition(const channel::PilotObservation& obs, int num_subcarriers);

/// Draws `rows` (channel, observation) pairs from `channels` with SNR uniform in
/// [snr_min_db, snr_max_db].
ConditionBatch draw_condition_batch(std::span<const channel::ChannelRealization> channels,
                                    std::span<const int> pilot_positions, int rows, double snr_min_db,
                                    double snr_max_db, Rng& rng);

/// Per-row epsilon prediction of the denoiser for x_t at steps t.
nn::Tensor predict_noise(const EstimatorParams& params, const nn::Matrix& x_t, std::span<const int> t,
                         const nn::Matrix& condition, std::span<const double> noise_variance);

/// mean ||eps - eps_theta||^2 / (2K) on a noised batch. t and eps are drawn from `rng`.
nn::Tensor diffusion_loss(const EstimatorParams& params, const ConditionBatch& batch, Rng& rng);

/// Deterministic validation loss over `rows` pairs drawn from `channels` with `seed`.
double validation_loss(const EstimatorParams& params, std::span<const channel::ChannelRealization> channels,
                       int rows, double snr_min_db, double snr_max_db, std::uint64_t seed);

/// Minimizes the diffusion loss on `channels` starting from `params` (updated in place).
/// Throws TrainingError on a non-finite loss.
TrainLog train_diffusion(EstimatorParams& params, std::span<const channel::ChannelRealization> channels,
                         std::span<const channel::ChannelRealization> validation, const TrainConfig& config);

/// Initializes and trains on the train split of every scene in `dataset`.
struct CDiffusionResult {
  EstimatorParams params;
  TrainLog log;
};
CDiffusionResult cdiffusion_train(const channel::CsiDataset& dataset, std::span<const int> pilot_positions,
                                  const DiffusionSchedule& schedule, const DenoiserConfig& net_config,
                                  const TrainConfig& train_config);

/// Ancestral DDPM reverse chain from N(0, I), conditioned on each observation; the
/// estimate is the mean of `num_draws` chains. Observation i uses seed derive_seed(seed, {i}).
std::vector<ChannelEstimate> cdiffusion_sample(std::span<const channel::PilotObservation> obs,
                                               const EstimatorParams& params, std::uint64_t seed,
                                               int num_draws = 4);
/// Same as a batch of one.
ChannelEstimate cdiffusion_sample(const channel::PilotObservation& obs, const EstimatorParams& params,
                                  std::uint64_t seed, int num_draws = 4);

/// Single-shot regression baseline: LS estimate refined by a residual MLP.
struct RegressionDenoiser {
  int num_subcarriers = 64;
  std::vector<int> pilot_positions;
  DenoiserConfig config;
  nn::ParameterSet net;
};

struct RegressionResult {
  RegressionDenoiser model;
  TrainLog log;
};
RegressionResult train_regression_denoiser(std::span<const channel::ChannelRealization> channels,
                                           std::span<const int> pilot_positions, int num_subcarriers,
                                           const DenoiserConfig& net_config, const TrainConfig& train_config);
std::vector<ChannelEstimate> regression_estimate(std::span<const channel::PilotObservation> obs,
                                                 const RegressionDenoiser& model);

// Persistence inside a checkpoint archive; `prefix` namespaces the tensors.
void store_estimator(nn::Archive& archive, const std::string& prefix, const EstimatorParams& params);
EstimatorParams load_estimator(const nn::Archive& archive, const std::string& prefix);
void store_regression(nn::Archive& archive, const std::string& prefix, const RegressionDenoiser& model);
RegressionDenoiser load_regression(const nn::Archive& archive, const std::string& prefix);

nlohmann::json to_json(const TrainLog& log);

}  // namespace ctcd::estimator
