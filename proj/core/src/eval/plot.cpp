#include "ctcd/eval/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "ctcd/common/bytes.hpp"
#include "ctcd/common/error.hpp"
#include "ctcd/eval/metrics.hpp"

namespace ctcd::eval {

namespace {

constexpr double kPanelW = 440, kPanelH = 320;
constexpr double kLeft = 60, kRight = 150, kTop = 40, kBottom = 45;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string axis_label(const std::string& metric) {
  if (metric == "psnr_db") return "PSNR (dB)";
  if (metric == "nmse_db") return "NMSE (dB)";
  return "SSIM";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

void panel(std::string& svg, double ox, const std::string& metric, const std::vector<MetricRecord>& recs,
           bool multi_scene) {
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  std::vector<std::string> order;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& r : recs) {
    if (r.metric != metric) continue;
    const std::string key = multi_scene ? r.method + " / " + r.scene_id : r.method;
    if (!curves.count(key)) order.push_back(key);
    const double y = std::min(r.value, kPsnrIdenticalSentinel);
    curves[key].emplace_back(r.snr_db, y);
    xmin = std::min(xmin, r.snr_db);
    xmax = std::max(xmax, r.snr_db);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (xmax <= xmin) { xmin -= 1; xmax += 1; }
  const double pad = std::max(0.05 * (ymax - ymin), 1e-3);
  ymin -= pad;
  ymax += pad;
  const double pw = kPanelW - kLeft - kRight, ph = kPanelH - kTop - kBottom;
  auto X = [&](double x) { return ox + kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

  svg += "<rect x=\"" + fmt(ox + kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";
  std::vector<double> xs;
  for (const auto& [k, pts] : curves)
    for (const auto& p : pts) xs.push_back(p.first);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double x : xs)
    svg += "<line x1=\"" + fmt(X(x)) + "\" y1=\"" + fmt(kTop + ph) + "\" x2=\"" + fmt(X(x)) + "\" y2=\"" +
           fmt(kTop + ph + 5) + "\" stroke=\"#333\"/><text x=\"" + fmt(X(x)) + "\" y=\"" + fmt(kTop + ph + 18) +
           "\" text-anchor=\"middle\">" + fmt(x, 0) + "</text>\n";
  const int digits = metric == "ssim" ? 3 : 1;
  for (int i = 0; i <= 4; ++i) {
    const double y = ymin + (ymax - ymin) * i / 4.0;
    svg += "<line x1=\"" + fmt(ox + kLeft - 5) + "\" y1=\"" + fmt(Y(y)) + "\" x2=\"" + fmt(ox + kLeft + pw) +
           "\" y2=\"" + fmt(Y(y)) + "\" stroke=\"#ddd\"/><text x=\"" + fmt(ox + kLeft - 8) + "\" y=\"" +
           fmt(Y(y) + 4) + "\" text-anchor=\"end\">" + fmt(y, digits) + "</text>\n";
  }
  svg += "<text x=\"" + fmt(ox + kLeft + pw / 2) + "\" y=\"" + fmt(kPanelH - 8) +
         "\" text-anchor=\"middle\">SNR (dB)</text>\n";
  svg += "<text transform=\"translate(" + fmt(ox + 16) + "," + fmt(kTop + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + axis_label(metric) + "</text>\n";

  for (std::size_t c = 0; c < order.size(); ++c) {
    auto pts = curves[order[c]];
    std::sort(pts.begin(), pts.end());
    const char* color = kColors[c % std::size(kColors)];
    std::string path;
    for (const auto& [x, y] : pts) path += fmt(X(x)) + "," + fmt(Y(y)) + " ";
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + path +
           "\"/>\n";
    for (const auto& [x, y] : pts)
      svg += "<circle cx=\"" + fmt(X(x)) + "\" cy=\"" + fmt(Y(y)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    const double ly = kTop + 10 + 18.0 * c;
    svg += "<line x1=\"" + fmt(ox + kLeft + pw + 10) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(ox + kLeft + pw + 30) +
           "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/><text x=\"" +
           fmt(ox + kLeft + pw + 34) + "\" y=\"" + fmt(ly + 4) + "\">" + escape(order[c]) + "</text>\n";
  }
}

}  // namespace

std::string render_svg(const std::vector<MetricRecord>& records, const std::string& title) {
  if (records.empty()) throw InputError("no records to plot");
  std::vector<std::string> metrics;
  std::vector<std::string> scenes;
  for (const auto& r : records) {
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) metrics.push_back(r.metric);
    if (std::find(scenes.begin(), scenes.end(), r.scene_id) == scenes.end()) scenes.push_back(r.scene_id);
  }
  const double width = kPanelW * metrics.size();
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width, 0) + "\" height=\"" +
                    fmt(kPanelH, 0) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(width / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
         "</text>\n";
  for (std::size_t m = 0; m < metrics.size(); ++m) panel(svg, kPanelW * m, metrics[m], records, scenes.size() > 1);
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> write_plots(const std::vector<MetricRecord>& records,
                                               const std::filesystem::path& out_dir) {
  if (records.empty()) throw InputError("no records to plot");
  std::map<std::string, std::vector<MetricRecord>> by_id;
  for (const auto& r : records) by_id[r.experiment_id].push_back(r);
  std::vector<std::filesystem::path> out;
  for (const auto& [id, recs] : by_id) {
    const auto path = out_dir / (id + ".svg");
    write_text_atomic(path, render_svg(recs, id));
    out.push_back(path);
  }
  return out;
}

}  // namespace ctcd::eval
