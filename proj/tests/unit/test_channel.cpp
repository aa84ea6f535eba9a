#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ctcd/channel/channel_sim.hpp"
#include "ctcd/common/error.hpp"
#include "ctcd/common/random.hpp"

namespace ctcd::channel {
namespace {

SceneProfile profile(std::string id = "s", int paths = 8, double max_delay = 1e-6, double k = 0.0) {
  SceneProfile p;
  p.scene_id = std::move(id);
  p.num_paths = paths;
  p.max_delay = max_delay;
  p.power_decay = 1e6;
  p.rician_k = k;
  p.seed_base = 11;
  return p;
}

CVector unit_power_symbols(int n, std::uint64_t seed) {
  Rng rng(seed);
  CVector x(static_cast<std::size_t>(n));
  for (auto& v : x) v = rng.complex_normal();
  const double s = std::sqrt(mean_power(x));
  for (auto& v : x) v /= s;
  return x;
}

TEST(SceneProfile, RejectsInvalidFields) {
  auto p = profile();
  p.num_paths = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = profile();
  p.max_delay = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = profile();
  p.rician_k = -1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = profile();
  p.doppler_scale = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = profile();
  p.doppler_scale = -0.1;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_THROW(draw_channel(p, 0, OfdmGrid{}), ConfigError);
}

TEST(OfdmGrid, RejectsTooFewSubcarriers) {
  OfdmGrid g;
  g.num_subcarriers = 4;
  EXPECT_THROW(g.validate(), ConfigError);
  EXPECT_THROW(draw_channel(profile(), 0, g), ConfigError);
}

TEST(DrawChannel, PureLineOfSightIsAllOnes) {
  auto p = profile("los", 1, 1e-6, kPureLosRicianK);
  const auto h = draw_channel(p, 3, OfdmGrid{});
  ASSERT_EQ(h.gains.size(), 64u);
  for (const auto& g : h.gains) {
    EXPECT_NEAR(g.real(), 1.0, 1e-12);
    EXPECT_NEAR(g.imag(), 0.0, 1e-12);
  }
}

TEST(DrawChannel, DeterministicPerSnapshot) {
  const auto p = profile();
  const auto a = draw_channel(p, 17, OfdmGrid{});
  const auto b = draw_channel(p, 17, OfdmGrid{});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.scene_id, "s");
  EXPECT_EQ(a.snapshot_index, 17);
  EXPECT_NE(a.gains, draw_channel(p, 18, OfdmGrid{}).gains);
}

TEST(DrawChannel, EqualProfilesGiveEqualSequences) {
  const auto p = profile("x");
  const auto q = profile("x");
  for (int n = 0; n < 5; ++n) EXPECT_EQ(draw_channel(p, n, OfdmGrid{}), draw_channel(q, n, OfdmGrid{}));
}

TEST(DrawChannel, PerSubcarrierMeanPowerIsOne) {
  const auto p = profile("rayleigh", 8, 1e-6, 0.0);
  const OfdmGrid grid;
  constexpr int kDraws = 100000;
  std::vector<double> power(64, 0.0);
  for (int n = 0; n < kDraws; ++n) {
    const auto h = draw_channel(p, n, grid);
    for (int k = 0; k < 64; ++k) power[static_cast<std::size_t>(k)] += std::norm(h.gains[static_cast<std::size_t>(k)]);
  }
  for (int k = 0; k < 64; ++k) EXPECT_NEAR(power[static_cast<std::size_t>(k)] / kDraws, 1.0, 0.05) << "k=" << k;
}

TEST(DrawChannel, TemporalCorrelationFollowsDopplerScale) {
  const OfdmGrid grid;
  auto frozen = profile("frozen", 6, 2e-6, 1.0);
  frozen.doppler_scale = 0.0;
  for (int n = 0; n < 10; ++n)
    EXPECT_EQ(draw_channel(frozen, n, grid).gains, draw_channel(frozen, n + 1, grid).gains);

  auto fast = profile("fast", 6, 2e-6, 1.0);
  fast.doppler_scale = 1.0;
  constexpr int kPairs = 10000;
  const std::size_t k = 5;
  std::vector<cplx> a, b;
  for (int n = 0; n < kPairs; ++n) {
    a.push_back(draw_channel(fast, 2 * n, grid).gains[k]);
    b.push_back(draw_channel(fast, 2 * n + 1, grid).gains[k]);
  }
  const cplx ma = std::accumulate(a.begin(), a.end(), cplx{}) / double(kPairs);
  const cplx mb = std::accumulate(b.begin(), b.end(), cplx{}) / double(kPairs);
  cplx cov{};
  double va = 0.0, vb = 0.0;
  for (int i = 0; i < kPairs; ++i) {
    cov += (a[i] - ma) * std::conj(b[i] - mb);
    va += std::norm(a[i] - ma);
    vb += std::norm(b[i] - mb);
  }
  EXPECT_LT(std::abs(cov) / std::sqrt(va * vb), 0.05);
}

// Equal up to rounding: the compiler may fuse the complex multiply-add.
TEST(Transmit, NoiselessIsProduct) {
  const auto h = draw_channel(profile(), 2, OfdmGrid{});
  const auto x = unit_power_symbols(64, 3);
  const auto y = transmit(x, h, kNoiseless, 99);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_LT(std::abs(y[k] - h.gains[k] * x[k]), 1e-14);
}

TEST(Transmit, Deterministic) {
  const auto h = draw_channel(profile(), 2, OfdmGrid{});
  const auto x = unit_power_symbols(64, 3);
  EXPECT_EQ(transmit(x, h, 5.0, 4), transmit(x, h, 5.0, 4));
  EXPECT_NE(transmit(x, h, 5.0, 4), transmit(x, h, 5.0, 5));
}

TEST(Transmit, RejectsUnnormalizedInput) {
  const auto h = draw_channel(profile(), 2, OfdmGrid{});
  auto x = unit_power_symbols(64, 3);
  x[0] *= 2.0;
  EXPECT_THROW(transmit(x, h, 10.0, 1), PreconditionError);
  const auto shorter = unit_power_symbols(32, 3);
  EXPECT_THROW(transmit(shorter, h, 10.0, 1), PreconditionError);
}

TEST(Transmit, MeasuredSnrMatchesRequest) {
  ChannelRealization h;
  h.gains.assign(64, cplx(1.0, 0.0));
  constexpr int kFrames = 1563;  // ~1e5 symbols
  for (double snr_db : {0.0, 10.0}) {
    double signal = 0.0, noise = 0.0;
    for (int f = 0; f < kFrames; ++f) {
      const auto x = unit_power_symbols(64, 1000 + f);
      const auto y = transmit(x, h, snr_db, static_cast<std::uint64_t>(f));
      for (std::size_t k = 0; k < 64; ++k) {
        signal += std::norm(x[k]);
        noise += std::norm(y[k] - x[k]);
      }
    }
    EXPECT_NEAR(linear_to_db(signal / noise), snr_db, 0.1);
  }
}

TEST(Transmit, NoiseVarianceUsesRealizedChannel) {
  auto h = draw_channel(profile(), 4, OfdmGrid{});
  const auto x = unit_power_symbols(64, 8);
  double hx = 0.0;
  for (std::size_t k = 0; k < 64; ++k) hx += std::norm(h.gains[k] * x[k]);
  EXPECT_NEAR(realized_noise_variance(x, h, 10.0), hx / 64.0 * 0.1, 1e-15);
  EXPECT_EQ(realized_noise_variance(x, h, kNoiseless), 0.0);
}

TEST(Pilots, EquallySpacedLayout) {
  EXPECT_EQ(equally_spaced_pilots(64, 8), (std::vector<int>{0, 8, 16, 24, 32, 40, 48, 56}));
  EXPECT_THROW(equally_spaced_pilots(64, 0), ConfigError);
}

TEST(Pilots, SymbolsAreUnitModulusQuadrature) {
  for (int k = 0; k < 16; ++k) EXPECT_NEAR(std::abs(pilot_symbol(k)), 1.0, 1e-15);
  EXPECT_EQ(pilot_symbol(0), cplx(1, 0));
  EXPECT_EQ(pilot_symbol(1), cplx(0, 1));
  EXPECT_EQ(pilot_symbol(2), cplx(-1, 0));
  EXPECT_EQ(pilot_symbol(3), cplx(0, -1));
}

TEST(Pilots, NoiselessObservationIsGainTimesSymbol) {
  const auto h = draw_channel(profile(), 1, OfdmGrid{});
  const auto pos = equally_spaced_pilots(64, 8);
  const auto obs = make_pilot_observation(h, pos, kNoiseless, 3);
  ASSERT_EQ(obs.pilot_positions, pos);
  EXPECT_EQ(obs.noise_variance, 0.0);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const auto k = static_cast<std::size_t>(pos[i]);
    EXPECT_NEAR(std::abs(obs.received[i] - h.gains[k] * obs.pilot_symbols[i]), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(obs.pilot_symbols[i]), 1.0, 1e-15);
  }
}

TEST(Pilots, RecordsExactNoiseVariance) {
  ChannelRealization h;
  h.gains.assign(64, cplx(1.0, 0.0));
  const auto obs = make_pilot_observation(h, equally_spaced_pilots(64, 8), 10.0, 5);
  EXPECT_NEAR(obs.noise_variance, 0.1, 1e-15);
}

TEST(Pilots, RejectsEmptyOrInvalidLayouts) {
  const auto h = draw_channel(profile(), 1, OfdmGrid{});
  EXPECT_THROW(make_pilot_observation(h, std::vector<int>{}, 10.0, 1), ConfigError);
  EXPECT_THROW(make_pilot_observation(h, std::vector<int>{4, 2}, 10.0, 1), ConfigError);
  EXPECT_THROW(make_pilot_observation(h, std::vector<int>{0, 64}, 10.0, 1), ConfigError);
}

}  // namespace
}  // namespace ctcd::channel
