#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ctcd/common/types.hpp"

namespace ctcd::channel {

/// Rician K-factors at or above this value are treated as pure line-of-sight.
inline constexpr double kPureLosRicianK = 1e6;

/// Pass as snr_db to request a noiseless link.
inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

/// OFDM grid shared by every realization of an experiment.
struct OfdmGrid {
  int num_subcarriers = 64;
  double carrier_spacing = 15e3;  // Hz

  void validate() const;
  bool operator==(const OfdmGrid&) const = default;
};

/// Propagation hyperparameters of one scene. A scene change is a profile change.
struct SceneProfile {
  std::string scene_id;
  int num_paths = 8;
  double max_delay = 1e-6;     // s, scattered delays are uniform on [0, max_delay]
  double power_decay = 1e6;    // 1/s, path power ~ exp(-power_decay * delay)
  double rician_k = 0.0;       // line-of-sight to scattered power ratio
  double doppler_scale = 1.0;  // 0: frozen channel, 1: independent snapshots
  std::uint64_t seed_base = 0;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
  bool operator==(const SceneProfile&) const = default;
};

struct ChannelRealization {
  CVector gains;  // frequency response over the K subcarriers
  std::string scene_id;
  std::int64_t snapshot_index = 0;
  double carrier_spacing = 15e3;

  bool operator==(const ChannelRealization&) const = default;
};

struct PilotObservation {
  std::vector<int> pilot_positions;  // strictly increasing, within [0, K)
  CVector pilot_symbols;             // unit modulus
  CVector received;
  double noise_variance = 0.0;  // linear, exactly as applied
};

/// Scattered-path geometry a scene's seed fixes: delays and normalized powers.
struct PathGeometry {
  std::vector<double> delays;
  std::vector<double> powers;  // sums to 1
};

PathGeometry scene_geometry(const SceneProfile& profile);

/// Frequency response of snapshot `snapshot_index` of a scene.
///
/// gains[k] = sqrt(K/(K+1)) + sqrt(1/(K+1)) * sum_p a_p exp(-j 2 pi k tau_p df), with
/// the line-of-sight path at zero excess delay. Path delays and powers are fixed per
/// scene by seed_base. Each path amplitude is sqrt(power_p) * (sqrt(1-d) c_p + sqrt(d) w_p[n])
/// with c_p a per-scene complex Gaussian and w_p[n] a fresh one per snapshot, so the
/// lag-one correlation of consecutive snapshots is 1 - doppler_scale.
ChannelRealization draw_channel(const SceneProfile& profile, std::int64_t snapshot_index,
                                const OfdmGrid& grid);

/// Noise variance transmit() applies: mean |h x|^2 * 10^(-snr_db/10). Zero when noiseless.
double realized_noise_variance(std::span<const cplx> x, const ChannelRealization& h, double snr_db);

/// y[k] = h[k] x[k] + n[k]. Requires |x| of length K with average power 1 +- 1e-6.
CVector transmit(std::span<const cplx> x, const ChannelRealization& h, double snr_db,
                 std::uint64_t seed);

/// Fixed unit-modulus pilot symbol for subcarrier k (quadrature alphabet 1, j, -1, -j cycling with k).
cplx pilot_symbol(int subcarrier);

/// {0, K/n, 2K/n, ...}; requires n to divide K.
std::vector<int> equally_spaced_pilots(int num_subcarriers, int num_pilots);

/// Sends a full-band pilot symbol through transmit() and keeps the pilot positions.
PilotObservation make_pilot_observation(const ChannelRealization& h,
                                        std::span<const int> pilot_positions, double snr_db,
                                        std::uint64_t seed);

}  // namespace ctcd::channel
