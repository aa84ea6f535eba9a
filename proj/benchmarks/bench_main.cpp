#include <benchmark/benchmark.h>

#include "ctcd/channel/channel_sim.hpp"
#include "ctcd/codec/codec.hpp"
#include "ctcd/estimator/cdiffusion.hpp"
#include "ctcd/estimator/classical.hpp"

namespace {

using namespace ctcd;

channel::SceneProfile urban() {
  channel::SceneProfile p;
  p.scene_id = "urban";
  p.num_paths = 12;
  p.seed_base = 11;
  return p;
}

const std::vector<int>& pilots() {
  static const auto p = channel::equally_spaced_pilots(64, 8);
  return p;
}

void BM_DrawChannel(benchmark::State& state) {
  const auto p = urban();
  std::int64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(channel::draw_channel(p, i++, channel::OfdmGrid{}));
}
BENCHMARK(BM_DrawChannel);

void BM_LsEstimate(benchmark::State& state) {
  const auto h = channel::draw_channel(urban(), 0, channel::OfdmGrid{});
  const auto obs = channel::make_pilot_observation(h, pilots(), 10.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(estimator::ls_estimate(obs, 64));
}
BENCHMARK(BM_LsEstimate);

void BM_LmmseEstimate(benchmark::State& state) {
  std::vector<channel::ChannelRealization> hs;
  for (int i = 0; i < 200; ++i) hs.push_back(channel::draw_channel(urban(), i, channel::OfdmGrid{}));
  const auto stats = estimator::ChannelStatistics::estimate(hs);
  const auto obs = channel::make_pilot_observation(hs[0], pilots(), 10.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(estimator::lmmse_estimate(obs, stats, 64));
}
BENCHMARK(BM_LmmseEstimate);

// Batch of observations through the reverse chain, untrained default-size network.
void BM_CDiffusionSample(benchmark::State& state) {
  const auto params = estimator::init_estimator(64, pilots(), estimator::DiffusionSchedule::rescaled_standard(100),
                                                estimator::DenoiserConfig{}, 1);
  std::vector<channel::PilotObservation> obs;
  for (int i = 0; i < state.range(0); ++i)
    obs.push_back(channel::make_pilot_observation(channel::draw_channel(urban(), i, channel::OfdmGrid{}), pilots(),
                                                  10.0, i));
  for (auto _ : state) benchmark::DoNotOptimize(estimator::cdiffusion_sample(obs, params, 5, 4));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CDiffusionSample)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_CodecEncodeDecode(benchmark::State& state) {
  codec::CodecConfig c;
  const codec::SemanticCodec k(c, 1);
  const auto images = codec::synthetic_corpus(3, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const auto frames = k.encode(images);
    std::vector<CVector> symbols;
    for (const auto& f : frames) symbols.push_back(f.symbols);
    benchmark::DoNotOptimize(k.decode(symbols));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CodecEncodeDecode)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
