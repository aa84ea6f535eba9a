#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctcd/nn/parameters.hpp"

namespace ctcd::nn {

/// Checkpoint container: a JSON header (free-form metadata plus a tensor index)
/// followed by the raw little-endian f64 tensor data.
///
///   "CTCDARC1" | u32 version | u64 header_len | header JSON | tensor data
struct Archive {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, Matrix>> tensors;

  void put(const std::string& name, Matrix m);
  bool has(const std::string& name) const;
  const Matrix& at(const std::string& name) const;

  /// Stores every parameter as `<prefix><name>`.
  void put_parameters(const std::string& prefix, const ParameterSet& p);
  /// Rebuilds a parameter set from all tensors whose name starts with `prefix`.
  ParameterSet parameters(const std::string& prefix) const;
};

std::vector<std::uint8_t> encode_archive(const Archive& a);
Archive decode_archive(std::span<const std::uint8_t> bytes);

void save_archive(const Archive& a, const std::filesystem::path& path);
/// Throws InputError naming the path when it does not exist.
Archive load_archive(const std::filesystem::path& path);

}  // namespace ctcd::nn
