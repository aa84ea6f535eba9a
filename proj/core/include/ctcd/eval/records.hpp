#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ctcd::eval {

struct MetricRecord {
  std::string experiment_id;
  std::string method;
  std::string scene_id;
  double snr_db = 0.0;
  std::string metric;  // psnr_db, ssim or nmse_db
  double value = 0.0;
  std::size_t n = 1;
  std::uint64_t seed = 0;
  double std_error = 0.0;  // kept in summaries, not in the record file

  /// Throws InputError when a field violates the record invariants.
  void validate() const;
  bool operator==(const MetricRecord&) const = default;
};

inline constexpr const char* kRecordHeader = "experiment_id,method,scene_id,snr_db,metric,value,n,seed";
inline constexpr const char* kNmseHeader = "method,scene_id,snr_db,nmse_linear,nmse_db,n_trials";

/// Doubles are written with 17 significant digits; +inf PSNR becomes the sentinel.
std::string format_records(const std::vector<MetricRecord>& records);
std::vector<MetricRecord> parse_records(const std::string& text);

void write_records(const std::vector<MetricRecord>& records, const std::filesystem::path& path);
/// Throws InputError naming the path when it is missing or holds no records.
std::vector<MetricRecord> read_records(const std::filesystem::path& path);

/// NMSE rows in the estimator's delimited format.
std::string format_nmse_table(const std::vector<MetricRecord>& records);

/// One row per record with its standard error: method,scene_id,snr_db,metric,mean,std_error,n.
std::string format_summary(const std::vector<MetricRecord>& records);

std::string format_number(double v);

}  // namespace ctcd::eval
