#include "ctcd/config/manifest.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>

#include <openssl/sha.h>

#include "ctcd/common/bytes.hpp"
#include "ctcd/common/error.hpp"

namespace ctcd::config {

namespace fs = std::filesystem;

namespace {

std::string hex(const unsigned char* d, std::size_t n) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    s += digits[d[i] >> 4];
    s += digits[d[i] & 15];
  }
  return s;
}

std::vector<fs::path> expand(const fs::path& p) {
  if (!fs::is_directory(p)) return {p};
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(p))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char d[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), d);
  return hex(d, sizeof d);
}

void RunManifest::hash_inputs() {
  std::string tree = "config " + git_blob_hash(config.dump()) + "\nargs " + git_blob_hash(arguments.dump()) + "\n";
  for (const auto& in : inputs)
    for (const auto& f : expand(in)) {
      if (!fs::exists(f)) throw InputError("manifest input not found: '" + f.string() + "'");
      tree += git_blob_hash(read_text_file(f)) + " " + f.generic_string() + "\n";
    }
  input_hash = git_blob_hash(tree);
}

void RunManifest::add_output(const fs::path& p, bool checkpoint) {
  if (std::find(outputs.begin(), outputs.end(), p) == outputs.end()) outputs.push_back(p);
  if (checkpoint && std::find(checkpoints.begin(), checkpoints.end(), p) == checkpoints.end())
    checkpoints.push_back(p);
}

nlohmann::json RunManifest::to_json() const {
  auto strs = [](const std::vector<fs::path>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : v) a.push_back(p.generic_string());
    return a;
  };
  return {{"subcommand", subcommand}, {"arguments", arguments},       {"config", config},
          {"inputs", strs(inputs)},   {"input_hash", input_hash},     {"checkpoints", strs(checkpoints)},
          {"outputs", strs(outputs)}, {"details", details},           {"started_at", started_at},     {"finished_at", finished_at}};
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path write_manifest(const RunManifest& manifest, const fs::path& dir) {
  const auto path = dir / ("manifest_" + manifest.subcommand + ".json");
  write_text_atomic(path, manifest.to_json().dump(2) + "\n");
  return path;
}

}  // namespace ctcd::config
