#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ctcd/channel/channel_sim.hpp"

namespace ctcd::estimator {

enum class Method { LS, LMMSE, DENOISER, CDIFFUSION, PERFECT };

std::string_view to_string(Method m);
/// Accepts the upper- or lower-case name. Throws ConfigError otherwise.
Method method_from_string(std::string_view s);

struct ChannelEstimate {
  CVector gains_hat;
  Method method = Method::LS;
  std::vector<int> pilot_positions;
  double noise_variance = 0.0;
  int num_draws = 0;  // reverse chains averaged, CDIFFUSION only
};

ChannelEstimate perfect_estimate(const channel::ChannelRealization& h);

/// Pilot division, then linear interpolation between neighbouring pilots and constant
/// extrapolation past the first and last pilot.
ChannelEstimate ls_estimate(const channel::PilotObservation& obs, int num_subcarriers);

/// Second-order statistics of one scene's channel.
struct ChannelStatistics {
  std::string scene_id;
  Eigen::MatrixXcd covariance;  // E[h h^H], K x K
  std::size_t count = 0;

  /// Uncentered sample covariance. Throws ConfigError with fewer than `min_count` inputs.
  static ChannelStatistics estimate(std::span<const channel::ChannelRealization> realizations,
                                    std::size_t min_count = 100);
};

/// h_hat = R_hp (R_pp + sigma^2 I)^-1 (y_p / p).
ChannelEstimate lmmse_estimate(const channel::PilotObservation& obs, const ChannelStatistics& stats,
                               int num_subcarriers);

/// Guard on |h_hat|^2 + noise_variance below which compensate outputs zero.
inline constexpr double kCompensationGuard = 1e-12;

/// x_hat[k] = y[k] conj(h_hat[k]) / (|h_hat[k]|^2 + noise_variance).
CVector compensate(std::span<const cplx> y, const ChannelEstimate& est, double noise_variance);

}  // namespace ctcd::estimator
