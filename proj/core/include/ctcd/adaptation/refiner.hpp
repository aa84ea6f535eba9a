#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ctcd/channel/csi_dataset.hpp"
#include "ctcd/estimator/cdiffusion.hpp"

namespace ctcd::adaptation {

/// Multi-scene foundation estimator plus per-scene channel statistics.
struct RefinerState {
  estimator::EstimatorParams foundation;
  std::vector<estimator::ChannelStatistics> scene_stats;
  estimator::TrainLog log;

  const estimator::ChannelStatistics* stats_for(const std::string& scene_id) const;
};

/// Trains one estimator jointly on the train split of every scene. Throws ConfigError
/// when the dataset spans fewer than 3 scenes.
RefinerState pretrain_refiner(const channel::CsiDataset& dataset, std::span<const int> pilot_positions,
                              const estimator::DiffusionSchedule& schedule,
                              const estimator::DenoiserConfig& net_config, const estimator::TrainConfig& train_config);

struct RefineOptions {
  int step_budget = 300;
  double learning_rate = 5e-4;
  int batch = 128;
  double snr_min_db = 0.0;
  double snr_max_db = 20.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct RefineResult {
  estimator::EstimatorParams params;
  double refinement_seconds = 0.0;  // measured wall clock
};

/// Starts from the foundation parameters and takes exactly step_budget Adam steps of
/// the diffusion loss on the adaptation channels (pilot observations are drawn from them
/// at SNRs uniform over the configured range). The refiner state is not modified.
RefineResult refine(const RefinerState& state, std::span<const channel::ChannelRealization> adaptation_set,
                    const RefineOptions& options);

void store_refiner(nn::Archive& archive, const RefinerState& state);
RefinerState load_refiner(const nn::Archive& archive);

}  // namespace ctcd::adaptation
