#include "ctcd/channel/csi_dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ctcd/common/bytes.hpp"
#include "ctcd/common/error.hpp"

namespace ctcd::channel {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "validation") return Split::Validation;
  if (s == "test") return Split::Test;
  throw InputError("unknown split tag '" + std::string(s) + "'");
}

void CsiDataset::validate() const {
  grid.validate();
  if (splits.size() != realizations.size())
    throw ConfigError("dataset has " + std::to_string(realizations.size()) + " realizations but " +
                      std::to_string(splits.size()) + " split tags");
  for (const auto& p : profiles) p.validate();
  for (std::size_t i = 0; i < profiles.size(); ++i)
    for (std::size_t j = i + 1; j < profiles.size(); ++j)
      if (profiles[i].scene_id == profiles[j].scene_id)
        throw ConfigError("duplicate scene id '" + profiles[i].scene_id + "'");

  // realizations must be grouped by scene in profile order
  std::size_t scene = 0;
  for (const auto& r : realizations) {
    if (r.gains.size() != static_cast<std::size_t>(grid.num_subcarriers))
      throw ConfigError("realization length does not match the grid");
    while (scene < profiles.size() && profiles[scene].scene_id != r.scene_id) ++scene;
    if (scene == profiles.size())
      throw ConfigError("realization scene '" + r.scene_id +
                        "' is unknown or out of profile order");
  }
}

std::size_t CsiDataset::count_for_scene(std::string_view scene_id) const {
  std::size_t n = 0;
  for (const auto& r : realizations) n += (r.scene_id == scene_id);
  return n;
}

std::vector<ChannelRealization> CsiDataset::select(std::string_view scene_id, Split split) const {
  std::vector<ChannelRealization> out;
  for (std::size_t i = 0; i < realizations.size(); ++i)
    if (realizations[i].scene_id == scene_id && splits[i] == split) out.push_back(realizations[i]);
  return out;
}

std::vector<ChannelRealization> CsiDataset::select(Split split) const {
  std::vector<ChannelRealization> out;
  for (std::size_t i = 0; i < realizations.size(); ++i)
    if (splits[i] == split) out.push_back(realizations[i]);
  return out;
}

const SceneProfile& CsiDataset::profile(std::string_view scene_id) const {
  for (const auto& p : profiles)
    if (p.scene_id == scene_id) return p;
  throw InputError("dataset has no scene '" + std::string(scene_id) + "'");
}

CsiDataset CsiDataset::subset(std::span<const std::string> scene_ids) const {
  CsiDataset out;
  out.grid = grid;
  for (const auto& id : scene_ids) {
    out.profiles.push_back(profile(id));
    for (std::size_t i = 0; i < realizations.size(); ++i)
      if (realizations[i].scene_id == id) {
        out.realizations.push_back(realizations[i]);
        out.splits.push_back(splits[i]);
      }
  }
  return out;
}

CsiDataset generate_dataset(std::span<const SceneProfile> profiles, int per_scene,
                            const OfdmGrid& grid, const SplitFractions& fractions) {
  if (per_scene < 1) throw ConfigError("realizations per scene must be >= 1");
  if (fractions.train < 0 || fractions.validation < 0 || fractions.train + fractions.validation > 1)
    throw ConfigError("split fractions must be non-negative and sum to at most 1");
  CsiDataset ds;
  ds.grid = grid;
  ds.profiles.assign(profiles.begin(), profiles.end());
  const int n_train = static_cast<int>(std::lround(fractions.train * per_scene));
  const int n_val = static_cast<int>(std::lround(fractions.validation * per_scene));
  for (const auto& profile : profiles) {
    for (int n = 0; n < per_scene; ++n) {
      ChannelRealization r = draw_channel(profile, n, grid);
      for (auto& g : r.gains)
        g = cplx(static_cast<float>(g.real()), static_cast<float>(g.imag()));
      ds.realizations.push_back(std::move(r));
      ds.splits.push_back(n < n_train ? Split::Train
                                      : (n < n_train + n_val ? Split::Validation : Split::Test));
    }
  }
  ds.validate();
  return ds;
}

namespace {

constexpr char kMagic[4] = {'C', 'S', 'I', '1'};

}  // namespace

std::vector<std::uint8_t> encode_csi(const CsiDataset& dataset) {
  dataset.validate();
  ByteWriter w;
  w.bytes(kMagic, 4);
  w.le<std::uint32_t>(kCsiFormatVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(dataset.profiles.size()));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(dataset.grid.num_subcarriers));
  w.le<double>(dataset.grid.carrier_spacing);
  for (const auto& p : dataset.profiles) {
    w.le<std::uint32_t>(static_cast<std::uint32_t>(p.scene_id.size()));
    w.bytes(p.scene_id.data(), p.scene_id.size());
    w.le<std::uint32_t>(static_cast<std::uint32_t>(p.num_paths));
    w.le<double>(p.max_delay);
    w.le<double>(p.power_decay);
    w.le<double>(p.rician_k);
    w.le<double>(p.doppler_scale);
    w.le<double>(static_cast<double>(p.seed_base));
    w.le<std::uint32_t>(static_cast<std::uint32_t>(dataset.count_for_scene(p.scene_id)));
  }
  for (const auto& r : dataset.realizations) {
    for (const auto& g : r.gains) {
      w.le<float>(static_cast<float>(g.real()));
      w.le<float>(static_cast<float>(g.imag()));
    }
  }
  return w.take();
}

CsiDataset decode_csi(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "CSI file");
  const std::string magic = r.str(4, "magic");
  if (magic != std::string(kMagic, 4)) throw IngestionError("bad magic, expected \"CSI1\"", 0);
  const auto version_at = r.offset();
  const auto version = r.le<std::uint32_t>("version");
  if (version != kCsiFormatVersion)
    throw IngestionError("unknown CSI format version " + std::to_string(version), version_at);
  const auto num_scenes = r.le<std::uint32_t>("scene count");
  const auto k_at = r.offset();
  const auto num_subcarriers = r.le<std::uint32_t>("subcarrier count");
  if (num_subcarriers < 8 || num_subcarriers > (1u << 20))
    throw IngestionError("implausible subcarrier count " + std::to_string(num_subcarriers), k_at);
  const auto spacing_at = r.offset();
  const auto spacing = r.le<double>("carrier spacing");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw IngestionError("carrier spacing must be positive", spacing_at);

  CsiDataset ds;
  ds.grid.num_subcarriers = static_cast<int>(num_subcarriers);
  ds.grid.carrier_spacing = spacing;
  std::vector<std::uint32_t> counts;
  for (std::uint32_t s = 0; s < num_scenes; ++s) {
    const auto len = r.le<std::uint32_t>("scene id length");
    SceneProfile p;
    p.scene_id = r.str(len, "scene id");
    const auto fields_at = r.offset();
    p.num_paths = static_cast<int>(r.le<std::uint32_t>("num_paths"));
    p.max_delay = r.le<double>("max_delay");
    p.power_decay = r.le<double>("power_decay");
    p.rician_k = r.le<double>("rician_k");
    p.doppler_scale = r.le<double>("doppler_scale");
    const double seed = r.le<double>("seed_base");
    if (!(seed >= 0.0) || seed > 9007199254740992.0 || seed != std::floor(seed))
      throw IngestionError("seed_base is not a non-negative integer", fields_at);
    p.seed_base = static_cast<std::uint64_t>(seed);
    try {
      p.validate();
    } catch (const ConfigError& e) {
      throw IngestionError(e.what(), fields_at);
    }
    counts.push_back(r.le<std::uint32_t>("realization count"));
    ds.profiles.push_back(std::move(p));
  }

  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  const std::uint64_t payload = total * num_subcarriers * 8;
  if (r.remaining() != payload)
    throw IngestionError("payload holds " + std::to_string(r.remaining()) +
                             " bytes but header declares " + std::to_string(payload) +
                             " (K=" + std::to_string(num_subcarriers) + ")",
                         r.offset());

  for (std::size_t s = 0; s < ds.profiles.size(); ++s) {
    for (std::uint32_t n = 0; n < counts[s]; ++n) {
      ChannelRealization real;
      real.scene_id = ds.profiles[s].scene_id;
      real.snapshot_index = n;
      real.carrier_spacing = spacing;
      real.gains.resize(num_subcarriers);
      for (auto& g : real.gains) {
        const float re = r.le<float>("gain");
        const float im = r.le<float>("gain");
        g = cplx(re, im);
      }
      ds.realizations.push_back(std::move(real));
      ds.splits.push_back(Split::Train);
    }
  }
  return ds;
}

std::filesystem::path split_sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".splits.csv");
}

void export_csi(const CsiDataset& dataset, const std::filesystem::path& path) {
  write_file_atomic(path, encode_csi(dataset));
  std::string side = "scene_id,snapshot_index,split\n";
  for (std::size_t i = 0; i < dataset.realizations.size(); ++i)
    side += dataset.realizations[i].scene_id + ',' + std::to_string(dataset.realizations[i].snapshot_index) + ',' +
            std::string(to_string(dataset.splits[i])) + '\n';
  write_text_atomic(split_sidecar_path(path), side);
}

CsiDataset import_csi(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open CSI file '" + path.string() + "'", 0);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CsiDataset ds = decode_csi(bytes);

  const auto side_path = split_sidecar_path(path);
  std::ifstream side(side_path);
  if (!side) return ds;
  std::string line;
  std::uint64_t offset = 0;
  std::getline(side, line);
  offset += line.size() + 1;
  if (line != "scene_id,snapshot_index,split")
    throw IngestionError("split sidecar '" + side_path.string() + "' has an unexpected header", 0);
  std::size_t i = 0;
  while (std::getline(side, line)) {
    if (line.empty()) {
      offset += 1;
      continue;
    }
    std::stringstream ss(line);
    std::string scene, snap, tag;
    if (!std::getline(ss, scene, ',') || !std::getline(ss, snap, ',') || !std::getline(ss, tag))
      throw IngestionError("malformed split sidecar row in '" + side_path.string() + "'", offset);
    if (i >= ds.realizations.size() || ds.realizations[i].scene_id != scene)
      throw IngestionError("split sidecar row does not match realization " + std::to_string(i),
                           offset);
    try {
      ds.realizations[i].snapshot_index = std::stoll(snap);
      ds.splits[i] = split_from_string(tag);
    } catch (const std::exception& e) {
      throw IngestionError(std::string("bad split sidecar value: ") + e.what(), offset);
    }
    offset += line.size() + 1;
    ++i;
  }
  if (i != ds.realizations.size())
    throw IngestionError("split sidecar lists " + std::to_string(i) + " rows for " +
                             std::to_string(ds.realizations.size()) + " realizations",
                         offset);
  return ds;
}

}  // namespace ctcd::channel
