#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "ctcd/common/error.hpp"

namespace ctcd {

/// Little-endian binary writer.
class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename T>
  void le(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    if constexpr (std::endian::native == std::endian::big) {
      std::uint8_t raw[sizeof(T)];
      std::memcpy(raw, &v, sizeof(T));
      for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(raw[sizeof(T) - 1 - i]);
    } else {
      bytes(&v, sizeof(T));
    }
  }
  std::size_t size() const { return out_.size(); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

/// Little-endian binary reader; failures raise IngestionError with the offset.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> in, std::string kind) : in_(in), kind_(std::move(kind)) {}

  std::uint64_t offset() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) throw IngestionError("truncated " + kind_ + " while reading " + what, pos_);
  }

  template <typename T>
  T le(const char* what) {
    need(sizeof(T), what);
    T v;
    if constexpr (std::endian::native == std::endian::big) {
      std::uint8_t raw[sizeof(T)];
      for (std::size_t i = 0; i < sizeof(T); ++i) raw[i] = in_[pos_ + sizeof(T) - 1 - i];
      std::memcpy(&v, raw, sizeof(T));
    } else {
      std::memcpy(&v, in_.data() + pos_, sizeof(T));
    }
    pos_ += sizeof(T);
    return v;
  }

  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::string kind_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames, so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace ctcd
