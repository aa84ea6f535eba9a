#include "ctcd/channel/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ctcd/common/error.hpp"
#include "ctcd/common/random.hpp"

namespace ctcd::channel {

namespace {

constexpr std::uint64_t kDelayStream = 0x64656c6179ULL;   // "delay"
constexpr std::uint64_t kCommonStream = 0x636f6d6dULL;    // "comm"
constexpr std::uint64_t kSnapshotStream = 0x736e6170ULL;  // "snap"

}  // namespace

void OfdmGrid::validate() const {
  if (num_subcarriers < 8) throw ConfigError("OFDM grid needs at least 8 subcarriers");
  if (!(carrier_spacing > 0.0) || !std::isfinite(carrier_spacing))
    throw ConfigError("carrier spacing must be positive");
}

void SceneProfile::validate() const {
  if (scene_id.empty()) throw ConfigError("scene_id must not be empty");
  if (num_paths < 1) throw ConfigError("scene '" + scene_id + "': num_paths must be >= 1");
  if (!(max_delay > 0.0) || !std::isfinite(max_delay))
    throw ConfigError("scene '" + scene_id + "': max_delay must be > 0");
  if (!std::isfinite(power_decay) || power_decay < 0.0)
    throw ConfigError("scene '" + scene_id + "': power_decay must be finite and >= 0");
  if (!(rician_k >= 0.0)) throw ConfigError("scene '" + scene_id + "': rician_k must be >= 0");
  if (!(doppler_scale >= 0.0 && doppler_scale <= 1.0))
    throw ConfigError("scene '" + scene_id + "': doppler_scale must lie in [0, 1]");
  // the CSI file stores seed_base as f64
  if (seed_base > (std::uint64_t{1} << 53))
    throw ConfigError("scene '" + scene_id + "': seed_base must be <= 2^53");
}

PathGeometry scene_geometry(const SceneProfile& profile) {
  profile.validate();
  Rng rng(derive_seed(profile.seed_base, {kDelayStream}));
  PathGeometry g;
  g.delays.resize(static_cast<std::size_t>(profile.num_paths));
  g.powers.resize(g.delays.size());
  for (auto& tau : g.delays) tau = rng.uniform(0.0, profile.max_delay);
  double total = 0.0;
  for (std::size_t p = 0; p < g.delays.size(); ++p) {
    g.powers[p] = std::exp(-profile.power_decay * g.delays[p]);
    total += g.powers[p];
  }
  for (auto& w : g.powers) w /= total;
  return g;
}

ChannelRealization draw_channel(const SceneProfile& profile, std::int64_t snapshot_index,
                                const OfdmGrid& grid) {
  grid.validate();
  const PathGeometry geo = scene_geometry(profile);
  const auto num_paths = geo.delays.size();

  const bool pure_los = profile.rician_k >= kPureLosRicianK;
  const double los_amp = pure_los ? 1.0 : std::sqrt(profile.rician_k / (profile.rician_k + 1.0));
  const double scat_amp = pure_los ? 0.0 : std::sqrt(1.0 / (profile.rician_k + 1.0));

  const double d = profile.doppler_scale;
  Rng common(derive_seed(profile.seed_base, {kCommonStream}));
  Rng innov(derive_seed(profile.seed_base,
                        {kSnapshotStream, static_cast<std::uint64_t>(snapshot_index)}));
  CVector amps(num_paths);
  for (std::size_t p = 0; p < num_paths; ++p) {
    const cplx c = common.complex_normal();
    const cplx w = innov.complex_normal();
    amps[p] = std::sqrt(geo.powers[p]) * (std::sqrt(1.0 - d) * c + std::sqrt(d) * w);
  }

  ChannelRealization out;
  out.scene_id = profile.scene_id;
  out.snapshot_index = snapshot_index;
  out.carrier_spacing = grid.carrier_spacing;
  out.gains.resize(static_cast<std::size_t>(grid.num_subcarriers));
  for (int k = 0; k < grid.num_subcarriers; ++k) {
    cplx scattered{0.0, 0.0};
    if (scat_amp > 0.0) {
      for (std::size_t p = 0; p < num_paths; ++p) {
        const double phase = -2.0 * std::numbers::pi * k * geo.delays[p] * grid.carrier_spacing;
        scattered += amps[p] * cplx(std::cos(phase), std::sin(phase));
      }
    }
    out.gains[static_cast<std::size_t>(k)] = cplx(los_amp, 0.0) + scat_amp * scattered;
  }
  return out;
}

double realized_noise_variance(std::span<const cplx> x, const ChannelRealization& h,
                               double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += std::norm(h.gains[k] * x[k]);
  const double signal = x.empty() ? 0.0 : acc / static_cast<double>(x.size());
  return signal * db_to_linear(-snr_db);
}

CVector transmit(std::span<const cplx> x, const ChannelRealization& h, double snr_db,
                 std::uint64_t seed) {
  if (x.size() != h.gains.size())
    throw PreconditionError("transmit: symbol length " + std::to_string(x.size()) +
                            " does not match channel length " + std::to_string(h.gains.size()));
  const double p = mean_power(x);
  if (std::abs(p - 1.0) > 1e-6)
    throw PreconditionError("transmit: average symbol power " + std::to_string(p) +
                            " is not 1 +- 1e-6");
  if (std::isnan(snr_db)) throw PreconditionError("transmit: snr_db is NaN");

  const double sigma2 = realized_noise_variance(x, h, snr_db);
  CVector y(x.size());
  Rng rng(seed);
  for (std::size_t k = 0; k < x.size(); ++k) {
    y[k] = h.gains[k] * x[k];
    if (sigma2 > 0.0) y[k] += rng.complex_normal(sigma2);
  }
  return y;
}

cplx pilot_symbol(int subcarrier) {
  // axis-aligned quadrature alphabet: 1, j, -1, -j
  switch (((subcarrier % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

std::vector<int> equally_spaced_pilots(int num_subcarriers, int num_pilots) {
  if (num_pilots < 1) throw ConfigError("pilot count must be >= 1");
  if (num_subcarriers % num_pilots != 0)
    throw ConfigError("pilot count must divide the subcarrier count");
  const int spacing = num_subcarriers / num_pilots;
  std::vector<int> pos(static_cast<std::size_t>(num_pilots));
  for (int i = 0; i < num_pilots; ++i) pos[static_cast<std::size_t>(i)] = i * spacing;
  return pos;
}

PilotObservation make_pilot_observation(const ChannelRealization& h,
                                        std::span<const int> pilot_positions, double snr_db,
                                        std::uint64_t seed) {
  if (pilot_positions.empty()) throw ConfigError("pilot set must not be empty");
  const int num_subcarriers = static_cast<int>(h.gains.size());
  for (std::size_t i = 0; i < pilot_positions.size(); ++i) {
    if (pilot_positions[i] < 0 || pilot_positions[i] >= num_subcarriers)
      throw ConfigError("pilot position " + std::to_string(pilot_positions[i]) +
                        " outside [0, " + std::to_string(num_subcarriers) + ")");
    if (i > 0 && pilot_positions[i] <= pilot_positions[i - 1])
      throw ConfigError("pilot positions must be strictly increasing");
  }

  CVector symbol(static_cast<std::size_t>(num_subcarriers));
  for (int k = 0; k < num_subcarriers; ++k) symbol[static_cast<std::size_t>(k)] = pilot_symbol(k);
  const CVector y = transmit(symbol, h, snr_db, seed);

  PilotObservation obs;
  obs.noise_variance = realized_noise_variance(symbol, h, snr_db);
  obs.pilot_positions.assign(pilot_positions.begin(), pilot_positions.end());
  obs.pilot_symbols.reserve(pilot_positions.size());
  obs.received.reserve(pilot_positions.size());
  for (int p : pilot_positions) {
    obs.pilot_symbols.push_back(symbol[static_cast<std::size_t>(p)]);
    obs.received.push_back(y[static_cast<std::size_t>(p)]);
  }
  return obs;
}

}  // namespace ctcd::channel
