#include "ctcd/adaptation/refiner.hpp"

#include <chrono>
#include <cmath>

#include "ctcd/common/error.hpp"
#include "ctcd/nn/optim.hpp"

namespace ctcd::adaptation {

const estimator::ChannelStatistics* RefinerState::stats_for(const std::string& scene_id) const {
  for (const auto& s : scene_stats)
    if (s.scene_id == scene_id) return &s;
  return nullptr;
}

RefinerState pretrain_refiner(const channel::CsiDataset& dataset, std::span<const int> pilot_positions,
                              const estimator::DiffusionSchedule& schedule,
                              const estimator::DenoiserConfig& net_config, const estimator::TrainConfig& train_config) {
  if (dataset.profiles.size() < 3)
    throw ConfigError("refiner pretraining needs at least 3 scenes, dataset has " +
                      std::to_string(dataset.profiles.size()));
  RefinerState state;
  for (const auto& p : dataset.profiles) {
    const auto train = dataset.select(p.scene_id, channel::Split::Train);
    state.scene_stats.push_back(estimator::ChannelStatistics::estimate(train, 1));
  }
  auto r = estimator::cdiffusion_train(dataset, pilot_positions, schedule, net_config, train_config);
  state.foundation = std::move(r.params);
  state.log = std::move(r.log);
  return state;
}

void RefineOptions::validate() const {
  if (step_budget < 0) throw ConfigError("step_budget must be >= 0");
  if (!(learning_rate > 0.0) || batch < 1) throw ConfigError("refinement learning rate and batch must be positive");
  if (snr_max_db < snr_min_db) throw ConfigError("refinement SNR range is empty");
}

RefineResult refine(const RefinerState& state, std::span<const channel::ChannelRealization> adaptation_set,
                    const RefineOptions& options) {
  options.validate();
  if (adaptation_set.empty()) throw ConfigError("adaptation set is empty");
  for (const auto& h : adaptation_set)
    if (static_cast<int>(h.gains.size()) != state.foundation.num_subcarriers)
      throw InputError("adaptation channel length differs from the estimator K");

  const auto t0 = std::chrono::steady_clock::now();
  RefineResult r{state.foundation.clone(), 0.0};
  nn::Adam adam(r.params.net, {.clip_norm = 1.0});
  Rng rng(derive_seed(options.seed, {0x726566}));
  for (int step = 0; step < options.step_budget; ++step) {
    const auto batch = estimator::draw_condition_batch(adaptation_set, r.params.pilot_positions, options.batch,
                                                       options.snr_min_db, options.snr_max_db, rng);
    const auto loss = estimator::diffusion_loss(r.params, batch, rng);
    if (!std::isfinite(loss.value()(0, 0)))
      throw TrainingError("refinement diverged at step " + std::to_string(step));
    loss.backward();
    adam.step(nn::cosine_lr(options.learning_rate, step, options.step_budget));
  }
  r.refinement_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void store_refiner(nn::Archive& archive, const RefinerState& state) {
  estimator::store_estimator(archive, "foundation.", state.foundation);
  nlohmann::json scenes = nlohmann::json::array();
  for (const auto& s : state.scene_stats) {
    scenes.push_back({{"scene_id", s.scene_id}, {"count", s.count}});
    archive.put("stats." + s.scene_id + ".re", s.covariance.real());
    archive.put("stats." + s.scene_id + ".im", s.covariance.imag());
  }
  archive.meta["refiner"] = {{"scenes", scenes}, {"log", estimator::to_json(state.log)}};
}

RefinerState load_refiner(const nn::Archive& archive) {
  if (!archive.meta.contains("refiner")) throw InputError("archive holds no refiner state");
  RefinerState state;
  state.foundation = estimator::load_estimator(archive, "foundation.");
  try {
    const auto& meta = archive.meta.at("refiner");
    for (const auto& s : meta.at("scenes")) {
      estimator::ChannelStatistics st;
      st.scene_id = s.at("scene_id").get<std::string>();
      st.count = s.at("count").get<std::size_t>();
      const auto& re = archive.at("stats." + st.scene_id + ".re");
      const auto& im = archive.at("stats." + st.scene_id + ".im");
      st.covariance.resize(re.rows(), re.cols());
      st.covariance.real() = re;
      st.covariance.imag() = im;
      state.scene_stats.push_back(std::move(st));
    }
    for (const auto& e : meta.at("log").at("entries"))
      state.log.entries.push_back({e.at("step").get<int>(), e.at("loss").get<double>()});
    state.log.initial_validation_loss = meta.at("log").at("initial_validation_loss").get<double>();
    state.log.final_validation_loss = meta.at("log").at("final_validation_loss").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed refiner metadata: ") + e.what());
  }
  return state;
}

}  // namespace ctcd::adaptation
