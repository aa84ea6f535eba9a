#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ctcd/eval/records.hpp"

namespace ctcd::eval {

/// SVG line chart, one panel per metric and one curve per method (and scene when several)
/// over SNR.
std::string render_svg(const std::vector<MetricRecord>& records, const std::string& title);

/// One <experiment_id>.svg per experiment id in the records. Throws InputError on an
/// empty record set.
std::vector<std::filesystem::path> write_plots(const std::vector<MetricRecord>& records,
                                               const std::filesystem::path& out_dir);

}  // namespace ctcd::eval
