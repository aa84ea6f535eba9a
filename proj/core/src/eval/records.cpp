#include "ctcd/eval/records.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "ctcd/common/bytes.hpp"
#include "ctcd/common/error.hpp"
#include "ctcd/eval/metrics.hpp"

namespace ctcd::eval {

void MetricRecord::validate() const {
  if (metric != "psnr_db" && metric != "ssim" && metric != "nmse_db")
    throw InputError("unknown metric '" + metric + "'");
  if (n < 1) throw InputError("record needs n >= 1");
  if (metric == "ssim" && !(value >= -1.0 && value <= 1.0)) throw InputError("ssim record outside [-1, 1]");
  if (std::isnan(value)) throw InputError("record value is NaN");
  if (experiment_id.find(',') != std::string::npos || method.find(',') != std::string::npos ||
      scene_id.find(',') != std::string::npos)
    throw InputError("record identifiers must not contain commas");
}

std::string format_number(double v) {
  if (std::isinf(v) && v > 0) v = kPsnrIdenticalSentinel;
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_records(const std::vector<MetricRecord>& records) {
  std::string out = std::string(kRecordHeader) + "\n";
  for (const auto& r : records) {
    r.validate();
    out += r.experiment_id + ',' + r.method + ',' + r.scene_id + ',' + format_number(r.snr_db) + ',' + r.metric + ',' +
           format_number(r.metric == "psnr_db" ? std::min(r.value, kPsnrIdenticalSentinel) : r.value) + ',' +
           std::to_string(r.n) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) f.push_back(cur);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  return f;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw InputError("record line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw InputError("record line " + std::to_string(line) + ": bad integer '" + s + "'");
  return v;
}

}  // namespace

std::vector<MetricRecord> parse_records(const std::string& text) {
  std::stringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kRecordHeader) throw InputError("record file lacks the expected header");
  std::vector<MetricRecord> out;
  std::size_t no = 1;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8) throw InputError("record line " + std::to_string(no) + " has " + std::to_string(f.size()) + " fields");
    MetricRecord r;
    r.experiment_id = f[0];
    r.method = f[1];
    r.scene_id = f[2];
    r.snr_db = parse_double(f[3], no);
    r.metric = f[4];
    r.value = parse_double(f[5], no);
    r.n = parse_u64(f[6], no);
    r.seed = parse_u64(f[7], no);
    r.validate();
    out.push_back(std::move(r));
  }
  return out;
}

void write_records(const std::vector<MetricRecord>& records, const std::filesystem::path& path) {
  write_text_atomic(path, format_records(records));
}

std::vector<MetricRecord> read_records(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("record file not found: '" + path.string() + "'");
  auto r = parse_records(read_text_file(path));
  if (r.empty()) throw InputError("record file '" + path.string() + "' holds no records");
  return r;
}

std::string format_nmse_table(const std::vector<MetricRecord>& records) {
  std::string out = std::string(kNmseHeader) + "\n";
  for (const auto& r : records) {
    if (r.metric != "nmse_db") continue;
    out += r.method + ',' + r.scene_id + ',' + format_number(r.snr_db) + ',' + format_number(db_to_linear(r.value)) +
           ',' + format_number(r.value) + ',' + std::to_string(r.n) + '\n';
  }
  return out;
}

std::string format_summary(const std::vector<MetricRecord>& records) {
  std::string out = "method,scene_id,snr_db,metric,mean,std_error,n\n";
  for (const auto& r : records)
    out += r.method + ',' + r.scene_id + ',' + format_number(r.snr_db) + ',' + r.metric + ',' +
           format_number(r.metric == "psnr_db" ? std::min(r.value, kPsnrIdenticalSentinel) : r.value) + ',' +
           format_number(r.std_error) + ',' + std::to_string(r.n) + '\n';
  return out;
}

}  // namespace ctcd::eval
