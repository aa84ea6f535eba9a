#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ctcd::config {

/// Hex SHA-1 of "blob <size>\0<content>", as git names objects.
std::string git_blob_hash(const std::string& content);

/// Record of one CLI invocation: what went in, what came out.
struct RunManifest {
  std::string subcommand;
  nlohmann::json arguments = nlohmann::json::object();
  nlohmann::json config = nlohmann::json::object();  // snapshot after defaults and overrides
  std::vector<std::filesystem::path> inputs;
  std::string input_hash;  // over the config snapshot, arguments and every input file
  std::vector<std::filesystem::path> checkpoints;
  std::vector<std::filesystem::path> outputs;  // every produced artifact, checkpoints included
  nlohmann::json details = nlohmann::json::object();  // run statistics such as wall-clock times
  std::string started_at;
  std::string finished_at;

  /// Fills input_hash. Directories contribute every regular file below them in sorted order.
  void hash_inputs();
  void add_output(const std::filesystem::path& p, bool checkpoint = false);
  nlohmann::json to_json() const;
};

std::string utc_timestamp();

/// Writes <dir>/manifest_<subcommand>.json and returns its path.
std::filesystem::path write_manifest(const RunManifest& manifest, const std::filesystem::path& dir);

}  // namespace ctcd::config
