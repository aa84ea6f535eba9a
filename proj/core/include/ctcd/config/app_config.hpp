#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctcd/adaptation/drive.hpp"
#include "ctcd/adaptation/refiner.hpp"
#include "ctcd/channel/channel_sim.hpp"
#include "ctcd/channel/csi_dataset.hpp"
#include "ctcd/codec/codec.hpp"
#include "ctcd/estimator/cdiffusion.hpp"
#include "ctcd/eval/experiment.hpp"

namespace ctcd::config {

struct DatasetSection {
  std::filesystem::path path = "data/csi.bin";  // relative to the output root
  int realizations_per_scene = 2000;
  channel::SplitFractions fractions;
};

struct ImageSection {
  std::filesystem::path directory;  // empty: synthetic corpus
  std::uint64_t seed = 1;
  int train_count = 1000;
  int validation_count = 100;
};

struct CodecSection {
  codec::CodecConfig model;
  codec::TrainingCsi csi = codec::TrainingCsi::Perfect;
  std::string train_scene = "urban_canyon";  // or "awgn"
  ImageSection images;
  std::filesystem::path checkpoint = "checkpoints/codec.ckpt";
};

struct EstimatorSection {
  int num_steps = 100;
  double beta_start = 1e-3;
  double beta_end = 0.2;
  estimator::DenoiserConfig denoiser;
  estimator::TrainConfig train;
  std::string scene = "urban_canyon";
  std::filesystem::path checkpoint = "checkpoints/estimator.ckpt";
  std::filesystem::path denoiser_checkpoint = "checkpoints/denoiser.ckpt";

  estimator::DiffusionSchedule schedule() const;
};

struct RefinerSection {
  std::vector<std::string> scenes;  // foundation training scenes; empty: every seen scene
  estimator::TrainConfig pretrain;
  adaptation::RefineOptions refine;
  int adaptation_size = 64;  // channels of the new scene available to refinement
  std::filesystem::path checkpoint = "checkpoints/refiner.ckpt";
};

struct AppConfig {
  std::filesystem::path output_dir = "out";
  channel::OfdmGrid grid;
  int num_pilots = 8;
  std::vector<channel::SceneProfile> scenes;
  DatasetSection dataset;
  CodecSection codec;
  EstimatorSection estimator;
  RefinerSection refiner;
  adaptation::DriveConfig drive;
  std::vector<eval::ExperimentConfig> experiments;

  /// Throws ConfigError on an invalid section or duplicate scene ids.
  void validate() const;
  const channel::SceneProfile& scene(const std::string& id) const;
  std::vector<int> pilot_positions() const;
};

/// Built-in defaults; configs/default.yaml mirrors them.
AppConfig default_config();

/// Parses YAML (or JSON) into generic JSON. Quoted scalars stay strings; plain scalars
/// become null, bool, integer or double when they parse as such.
nlohmann::json load_structured(const std::filesystem::path& path);
nlohmann::json parse_structured(const std::string& text);

/// Missing keys keep their default; unknown keys and wrong types raise ConfigError naming
/// the dotted key path.
AppConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AppConfig& config);

/// Reads a config file; throws InputError when the file is missing.
AppConfig load_config(const std::filesystem::path& path);

/// Route and scene map documents.
adaptation::RoutePlan route_from_json(const nlohmann::json& j);
adaptation::SceneMap scene_map_from_json(const nlohmann::json& j);
nlohmann::json to_json(const adaptation::RoutePlan& route);
nlohmann::json to_json(const adaptation::SceneMap& map);
adaptation::RoutePlan load_route(const std::filesystem::path& path);
adaptation::SceneMap load_scene_map(const std::filesystem::path& path);

}  // namespace ctcd::config
