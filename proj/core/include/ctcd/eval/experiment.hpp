#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ctcd/estimator/cdiffusion.hpp"
#include "ctcd/estimator/classical.hpp"
#include "ctcd/eval/records.hpp"

namespace ctcd::eval {

/// Scene id for the unit-gain channel (plain AWGN).
inline constexpr const char* kAwgnScene = "awgn";

/// Archive prefixes the CLI uses for estimator checkpoints.
inline constexpr const char* kEstimatorPrefix = "estimator";
inline constexpr const char* kDenoiserPrefix = "denoiser";

struct MethodSpec {
  std::string label;  // method column of the records; empty means the method name
  estimator::Method method = estimator::Method::LS;
  std::filesystem::path checkpoint;  // CDIFFUSION and DENOISER only

  std::string name() const;
};

struct ExperimentConfig {
  std::string id = "experiment";
  std::vector<double> snr_grid_db{0, 5, 10, 15, 20};
  std::vector<MethodSpec> methods;
  std::vector<std::string> scenes{kAwgnScene};
  std::vector<std::string> metrics{"psnr_db", "ssim"};
  std::filesystem::path dataset;  // CSI file; test split is evaluated, train split feeds LMMSE
  std::filesystem::path codec;    // codec checkpoint, needed for psnr_db and ssim
  std::filesystem::path image_dir;  // empty: synthetic corpus
  std::uint64_t image_seed = 1000;
  int num_images = 200;
  int num_pilots = 8;
  int num_channels = 500;  // test channels per scene for nmse_db
  int num_draws = 4;
  std::uint64_t seed = 7;
  int jobs = 1;

  /// Throws ConfigError on an empty or unsorted grid, unknown metric, duplicate labels or
  /// missing inputs the metrics require.
  void validate() const;
};

struct ExperimentOutputs {
  std::vector<MetricRecord> records;  // cell order: method, scene, snr, metric
  std::vector<std::filesystem::path> files;
};

/// Estimator checkpoint: a "cdiffusion" archive section or a refiner's foundation model.
/// Throws InputError naming the path when missing.
estimator::EstimatorParams load_estimator_checkpoint(const std::filesystem::path& path);
estimator::RegressionDenoiser load_denoiser_checkpoint(const std::filesystem::path& path);

/// Evaluates every (method, scene, snr) cell. Methods see the same noise and channels in a
/// cell. Writes records.csv, nmse.csv, summary_<id>.csv, <id>.svg and reconstruction
/// strips under out_dir. Cells run on `jobs` threads; each cell's records go to their own
/// file and are merged in cell order.
ExperimentOutputs run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace ctcd::eval
