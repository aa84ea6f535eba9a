#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace ctcd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Parsed flag values. Unset optionals fall back to the config file.
struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string dataset;
  std::string scene;
  std::optional<int> steps;
  std::string images;

  // gen-data
  std::optional<int> scenes;
  std::optional<int> realizations;
  bool force = false;

  // train-codec
  std::optional<int> epochs;

  // train-channel
  std::string method = "cdiffusion";

  // pretrain-refiner
  std::vector<std::string> scene_list;

  // refine / simulate-drive
  std::string refiner;

  // evaluate
  std::vector<std::string> experiments;
  std::optional<int> jobs;
  std::optional<int> num_images;
  std::optional<int> num_channels;

  // simulate-drive
  std::string route;
  std::string map;
  std::string codec;
  std::string start_model;
  std::optional<double> snr;

  // plot
  std::vector<std::string> records;
};

/// Command tree with every subcommand and flag registered against `options`.
std::unique_ptr<CLI::App> make_app(Options& options);

/// Parses argv, runs the chosen subcommand and maps failures to exit codes.
int run(int argc, const char* const* argv);

}  // namespace ctcd::cli
