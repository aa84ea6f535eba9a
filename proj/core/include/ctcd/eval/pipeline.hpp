#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ctcd/codec/codec.hpp"
#include "ctcd/estimator/cdiffusion.hpp"
#include "ctcd/estimator/classical.hpp"

namespace ctcd::eval {

/// One estimation method together with whatever it needs. Pointers are borrowed.
struct EstimatorBundle {
  estimator::Method method = estimator::Method::LS;
  std::vector<int> pilot_positions;
  const estimator::EstimatorParams* cdiffusion = nullptr;
  const estimator::RegressionDenoiser* regression = nullptr;
  const estimator::ChannelStatistics* statistics = nullptr;
  int num_draws = 4;

  /// Throws InputError naming the missing model.
  void validate() const;
};

/// Estimates for observation i of channel i. CDIFFUSION uses derive_seed(seed, {i}) per
/// observation, so results do not depend on how calls are batched.
std::vector<estimator::ChannelEstimate> estimate_channels(const EstimatorBundle& bundle,
                                                          std::span<const channel::ChannelRealization> channels,
                                                          std::span<const channel::PilotObservation> obs,
                                                          std::uint64_t seed);

/// Draws one pilot observation per channel at snr_db (seed derive_seed(seed, {i})) and
/// returns per-channel NMSE of the bundle's estimate.
std::vector<double> nmse_trials(const EstimatorBundle& bundle, std::span<const channel::ChannelRealization> channels,
                                double snr_db, std::uint64_t seed);

struct LinkResult {
  std::vector<double> psnr_db;  // per image, +inf for identical reconstructions
  std::vector<double> ssim;
  std::vector<double> nmse;  // per transmitted frame
  std::vector<codec::ImageSample> reconstructed;
};

/// End-to-end link: encode, transmit every frame over a channel from `channel`, estimate
/// it from pilots with `bundle`, compensate, decode. Image i draws from derive_seed(seed, {i}).
LinkResult run_link(const codec::SemanticCodec& codec, std::span<const codec::ImageSample> images,
                    const codec::ChannelSampler& channel, const EstimatorBundle& bundle, double snr_db,
                    std::uint64_t seed);

/// Samples uniformly from a fixed list of realizations.
codec::ChannelSampler pool_sampler(std::vector<channel::ChannelRealization> pool);

}  // namespace ctcd::eval
