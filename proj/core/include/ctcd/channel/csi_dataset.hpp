#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctcd/channel/channel_sim.hpp"

namespace ctcd::channel {

enum class Split : std::uint8_t { Train, Validation, Test };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

/// Realizations grouped by scene, in profile order and snapshot order within a scene.
struct CsiDataset {
  OfdmGrid grid;
  std::vector<SceneProfile> profiles;
  std::vector<ChannelRealization> realizations;
  std::vector<Split> splits;  // one tag per realization

  /// Throws ConfigError when scene ids, grouping, lengths or split tags are inconsistent.
  void validate() const;

  std::size_t count_for_scene(std::string_view scene_id) const;

  /// Realizations of `scene_id` carrying tag `split`.
  std::vector<ChannelRealization> select(std::string_view scene_id, Split split) const;

  /// Realizations of every scene carrying tag `split`.
  std::vector<ChannelRealization> select(Split split) const;

  const SceneProfile& profile(std::string_view scene_id) const;

  /// The listed scenes only, in the given order. Throws InputError on an unknown id.
  CsiDataset subset(std::span<const std::string> scene_ids) const;

  bool operator==(const CsiDataset&) const = default;
};

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;  // remainder goes to test
};

/// Draws snapshots 0..per_scene-1 of every profile. Gains are rounded to float precision
/// so the dataset survives the f32 file payload unchanged. Splits are contiguous snapshot
/// blocks: train first, then validation, then test.
CsiDataset generate_dataset(std::span<const SceneProfile> profiles, int per_scene,
                            const OfdmGrid& grid, const SplitFractions& fractions = {});

inline constexpr std::uint32_t kCsiFormatVersion = 1;

/// Sidecar path holding split tags: "<path>.splits.csv".
std::filesystem::path split_sidecar_path(const std::filesystem::path& path);

/// Writes the binary CSI file and the split sidecar.
void export_csi(const CsiDataset& dataset, const std::filesystem::path& path);

/// Reads a CSI file and, when present, its split sidecar (otherwise every realization is
/// tagged Train and snapshot indices count from zero). Throws IngestionError naming the
/// byte offset of the first inconsistency.
CsiDataset import_csi(const std::filesystem::path& path);

/// Binary payload only; exposed for tests of the format contract.
std::vector<std::uint8_t> encode_csi(const CsiDataset& dataset);
CsiDataset decode_csi(std::span<const std::uint8_t> bytes);

}  // namespace ctcd::channel
