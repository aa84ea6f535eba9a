#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ctcd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values (scene profiles, codec config, pilot layout, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied data with the wrong shape or length.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition on the arguments does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed external file. Carries the byte offset at which parsing failed.
class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Training diverged or failed. When a last finite checkpoint exists its path is recorded.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::string checkpoint_path = {})
      : Error(what), checkpoint_path_(std::move(checkpoint_path)) {}

  const std::string& checkpoint_path() const noexcept { return checkpoint_path_; }

 private:
  std::string checkpoint_path_;
};

}  // namespace ctcd
