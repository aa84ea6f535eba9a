#include "ctcd/eval/metrics.hpp"

#include <cmath>

#include "ctcd/common/error.hpp"

namespace ctcd::eval {

using codec::ImageSample;

double psnr(const ImageSample& x, const ImageSample& y, double peak) {
  if (!x.same_shape(y)) throw InputError("psnr: image shapes differ");
  if (x.size() == 0) throw InputError("psnr: empty image");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.pixels[i] - y.pixels[i];
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

std::vector<double> to_grey(const ImageSample& im) {
  std::vector<double> g(static_cast<std::size_t>(im.height) * im.width);
  for (int y = 0; y < im.height; ++y) {
    for (int x = 0; x < im.width; ++x) {
      double acc = 0.0;
      for (int c = 0; c < im.channels; ++c) acc += im.at(y, x, c);
      g[static_cast<std::size_t>(y) * im.width + x] = acc / im.channels;
    }
  }
  return g;
}

// Summed-area table with a zero first row/column.
std::vector<double> integral(const std::vector<double>& a, int h, int w) {
  std::vector<double> s(static_cast<std::size_t>(h + 1) * (w + 1), 0.0);
  for (int y = 0; y < h; ++y) {
    double row = 0.0;
    for (int x = 0; x < w; ++x) {
      row += a[static_cast<std::size_t>(y) * w + x];
      s[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] = s[static_cast<std::size_t>(y) * (w + 1) + x + 1] + row;
    }
  }
  return s;
}

double box(const std::vector<double>& s, int w, int y, int x, int n) {
  const auto W = static_cast<std::size_t>(w + 1);
  return s[(y + n) * W + x + n] - s[y * W + x + n] - s[(y + n) * W + x] + s[y * W + x];
}

}  // namespace

double ssim(const ImageSample& a, const ImageSample& b, const SsimOptions& opt) {
  if (!a.same_shape(b)) throw InputError("ssim: image shapes differ");
  if (opt.window < 1 || a.height < opt.window || a.width < opt.window)
    throw InputError("ssim: image smaller than the " + std::to_string(opt.window) + "-pixel window");
  const int h = a.height;
  const int w = a.width;
  const auto ga = to_grey(a);
  const auto gb = to_grey(b);
  std::vector<double> aa(ga.size()), bb(ga.size()), ab(ga.size());
  for (std::size_t i = 0; i < ga.size(); ++i) {
    aa[i] = ga[i] * ga[i];
    bb[i] = gb[i] * gb[i];
    ab[i] = ga[i] * gb[i];
  }
  const auto sa = integral(ga, h, w), sb = integral(gb, h, w);
  const auto saa = integral(aa, h, w), sbb = integral(bb, h, w), sab = integral(ab, h, w);

  const double c1 = (opt.k1 * opt.peak) * (opt.k1 * opt.peak);
  const double c2 = (opt.k2 * opt.peak) * (opt.k2 * opt.peak);
  const int n = opt.window;
  const double inv = 1.0 / (static_cast<double>(n) * n);
  double total = 0.0;
  int count = 0;
  for (int y = 0; y + n <= h; ++y) {
    for (int x = 0; x + n <= w; ++x) {
      const double mx = box(sa, w, y, x, n) * inv;
      const double my = box(sb, w, y, x, n) * inv;
      const double vx = box(saa, w, y, x, n) * inv - mx * mx;
      const double vy = box(sbb, w, y, x, n) * inv - my * my;
      const double cov = box(sab, w, y, x, n) * inv - mx * my;
      const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
      const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
      total += num / den;
      ++count;
    }
  }
  return total / count;
}

double nmse(std::span<const cplx> h, std::span<const cplx> h_hat) {
  if (h.size() != h_hat.size()) throw InputError("nmse: length mismatch");
  double err = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    err += std::norm(h[k] - h_hat[k]);
    ref += std::norm(h[k]);
  }
  if (ref == 0.0) throw InputError("nmse: reference channel has zero norm");
  return err / ref;
}

double mean_nmse(const std::vector<CVector>& h, const std::vector<CVector>& h_hat) {
  if (h.size() != h_hat.size() || h.empty()) throw InputError("mean_nmse: trial count mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) acc += nmse(h[i], h_hat[i]);
  return acc / static_cast<double>(h.size());
}

MeanStat mean_and_stderr(std::span<const double> values) {
  MeanStat s;
  s.n = values.size();
  if (values.empty()) return s;
  double acc = 0.0;
  for (double v : values) acc += v;
  s.mean = acc / static_cast<double>(s.n);
  if (s.n > 1) {
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    var /= static_cast<double>(s.n - 1);
    s.std_error = std::sqrt(var / static_cast<double>(s.n));
  }
  return s;
}

}  // namespace ctcd::eval
