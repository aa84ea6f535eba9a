#include "ctcd/eval/pipeline.hpp"

#include <memory>

#include "ctcd/common/error.hpp"
#include "ctcd/eval/metrics.hpp"

namespace ctcd::eval {

using estimator::Method;

void EstimatorBundle::validate() const {
  if (method != Method::PERFECT && pilot_positions.empty())
    throw InputError(std::string(estimator::to_string(method)) + " estimation needs pilot positions");
  if (method == Method::CDIFFUSION && !cdiffusion) throw InputError("CDIFFUSION needs a trained estimator checkpoint");
  if (method == Method::DENOISER && !regression) throw InputError("DENOISER needs a trained denoiser checkpoint");
  if (method == Method::LMMSE && !statistics) throw InputError("LMMSE needs channel statistics");
}

std::vector<estimator::ChannelEstimate> estimate_channels(const EstimatorBundle& bundle,
                                                          std::span<const channel::ChannelRealization> channels,
                                                          std::span<const channel::PilotObservation> obs,
                                                          std::uint64_t seed) {
  bundle.validate();
  if (channels.size() != obs.size()) throw InputError("estimate_channels: channel and observation counts differ");
  std::vector<estimator::ChannelEstimate> out;
  out.reserve(obs.size());
  switch (bundle.method) {
    case Method::PERFECT:
      for (const auto& h : channels) out.push_back(estimator::perfect_estimate(h));
      break;
    case Method::LS:
      for (std::size_t i = 0; i < obs.size(); ++i)
        out.push_back(estimator::ls_estimate(obs[i], static_cast<int>(channels[i].gains.size())));
      break;
    case Method::LMMSE:
      for (std::size_t i = 0; i < obs.size(); ++i)
        out.push_back(
            estimator::lmmse_estimate(obs[i], *bundle.statistics, static_cast<int>(channels[i].gains.size())));
      break;
    case Method::DENOISER:
      out = estimator::regression_estimate(obs, *bundle.regression);
      break;
    case Method::CDIFFUSION:
      out = estimator::cdiffusion_sample(obs, *bundle.cdiffusion, seed, bundle.num_draws);
      break;
  }
  return out;
}

std::vector<double> nmse_trials(const EstimatorBundle& bundle, std::span<const channel::ChannelRealization> channels,
                                double snr_db, std::uint64_t seed) {
  std::vector<channel::PilotObservation> obs;
  obs.reserve(channels.size());
  const std::vector<int> pilots =
      bundle.pilot_positions.empty() ? std::vector<int>{0} : bundle.pilot_positions;
  for (std::size_t i = 0; i < channels.size(); ++i)
    obs.push_back(channel::make_pilot_observation(channels[i], pilots, snr_db, derive_seed(seed, {i})));
  const auto est = estimate_channels(bundle, channels, obs, derive_seed(seed, {0x6573}));
  std::vector<double> out(channels.size());
  for (std::size_t i = 0; i < channels.size(); ++i) out[i] = nmse(channels[i].gains, est[i].gains_hat);
  return out;
}

LinkResult run_link(const codec::SemanticCodec& codec, std::span<const codec::ImageSample> images,
                    const codec::ChannelSampler& channel, const EstimatorBundle& bundle, double snr_db,
                    std::uint64_t seed) {
  bundle.validate();
  const auto frames = codec.encode(images);
  const int F = codec.config().latent_frames;
  const int K = codec.config().num_subcarriers;
  const std::vector<int> pilots =
      bundle.pilot_positions.empty() ? std::vector<int>{0} : bundle.pilot_positions;

  std::vector<channel::ChannelRealization> hs;
  std::vector<channel::PilotObservation> obs;
  std::vector<CVector> received;
  std::vector<double> noise_variance;
  for (std::size_t i = 0; i < images.size(); ++i) {
    Rng rng(derive_seed(seed, {i}));
    for (int f = 0; f < F; ++f) {
      auto h = channel(rng);
      if (static_cast<int>(h.gains.size()) != K) throw InputError("channel length differs from codec K");
      const auto x = frames[i].frame(f);
      obs.push_back(channel::make_pilot_observation(h, pilots, snr_db, rng.next_u64()));
      received.push_back(channel::transmit(x, h, snr_db, rng.next_u64()));
      noise_variance.push_back(channel::realized_noise_variance(x, h, snr_db));
      hs.push_back(std::move(h));
    }
  }
  const auto est = estimate_channels(bundle, hs, obs, derive_seed(seed, {0x6573}));

  LinkResult r;
  std::vector<CVector> compensated(images.size());
  for (std::size_t n = 0; n < hs.size(); ++n) {
    r.nmse.push_back(nmse(hs[n].gains, est[n].gains_hat));
    const auto x_hat = estimator::compensate(received[n], est[n], noise_variance[n]);
    auto& dst = compensated[n / static_cast<std::size_t>(F)];
    dst.insert(dst.end(), x_hat.begin(), x_hat.end());
  }
  r.reconstructed = codec.decode(compensated);
  for (std::size_t i = 0; i < images.size(); ++i) {
    r.psnr_db.push_back(psnr(images[i], r.reconstructed[i]));
    r.ssim.push_back(ssim(images[i], r.reconstructed[i]));
  }
  return r;
}

codec::ChannelSampler pool_sampler(std::vector<channel::ChannelRealization> pool) {
  if (pool.empty()) throw InputError("channel pool is empty");
  auto shared = std::make_shared<const std::vector<channel::ChannelRealization>>(std::move(pool));
  return [shared](Rng& rng) { return (*shared)[rng.uniform_index(shared->size())]; };
}

}  // namespace ctcd::eval
