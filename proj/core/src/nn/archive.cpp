#include "ctcd/nn/archive.hpp"

#include "ctcd/common/bytes.hpp"
#include "ctcd/common/error.hpp"

namespace ctcd::nn {

namespace {
constexpr char kMagic[8] = {'C', 'T', 'C', 'D', 'A', 'R', 'C', '1'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void Archive::put(const std::string& name, Matrix m) {
  for (auto& [n, t] : tensors)
    if (n == name) {
      t = std::move(m);
      return;
    }
  tensors.emplace_back(name, std::move(m));
}

bool Archive::has(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return true;
  return false;
}

const Matrix& Archive::at(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw InputError("archive has no tensor '" + name + "'");
}

void Archive::put_parameters(const std::string& prefix, const ParameterSet& p) {
  for (const auto& [n, t] : p.entries()) put(prefix + n, t.value());
}

ParameterSet Archive::parameters(const std::string& prefix) const {
  ParameterSet p;
  for (const auto& [n, t] : tensors)
    if (n.compare(0, prefix.size(), prefix) == 0) p.add(n.substr(prefix.size()), t);
  return p;
}

std::vector<std::uint8_t> encode_archive(const Archive& a) {
  nlohmann::json header;
  header["meta"] = a.meta;
  auto& index = header["tensors"] = nlohmann::json::array();
  for (const auto& [n, t] : a.tensors) index.push_back({{"name", n}, {"rows", t.rows()}, {"cols", t.cols()}});
  const std::string text = header.dump();

  ByteWriter w;
  w.bytes(kMagic, sizeof kMagic);
  w.le<std::uint32_t>(kVersion);
  w.le<std::uint64_t>(text.size());
  w.bytes(text.data(), text.size());
  for (const auto& [n, t] : a.tensors)
    for (Eigen::Index i = 0; i < t.size(); ++i) w.le<double>(t.data()[i]);
  return w.take();
}

Archive decode_archive(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "archive");
  if (r.str(sizeof kMagic, "magic") != std::string(kMagic, sizeof kMagic))
    throw IngestionError("bad archive magic", 0);
  const auto version_at = r.offset();
  if (const auto v = r.le<std::uint32_t>("version"); v != kVersion)
    throw IngestionError("unknown archive version " + std::to_string(v), version_at);
  const auto len = r.le<std::uint64_t>("header length");
  const auto header_at = r.offset();
  if (len > r.remaining()) throw IngestionError("archive header length exceeds file size", header_at);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.str(static_cast<std::size_t>(len), "header"));
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(std::string("malformed archive header: ") + e.what(), header_at);
  }

  Archive a;
  try {
    a.meta = header.at("meta");
    for (const auto& entry : header.at("tensors")) {
      const auto rows = entry.at("rows").get<Eigen::Index>();
      const auto cols = entry.at("cols").get<Eigen::Index>();
      if (rows < 0 || cols < 0) throw IngestionError("negative tensor shape", r.offset());
      r.need(static_cast<std::size_t>(rows * cols) * sizeof(double), "tensor data");
      Matrix m(rows, cols);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.le<double>("tensor data");
      a.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(std::string("malformed archive index: ") + e.what(), header_at);
  }
  if (r.remaining() != 0) throw IngestionError("trailing bytes after archive data", r.offset());
  return a;
}

void save_archive(const Archive& a, const std::filesystem::path& path) {
  const auto bytes = encode_archive(a);
  write_file_atomic(path, bytes);
}

Archive load_archive(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("checkpoint not found: '" + path.string() + "'");
  return decode_archive(read_file_bytes(path));
}

}  // namespace ctcd::nn
