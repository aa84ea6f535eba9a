#include <gtest/gtest.h>

#include <cmath>

#include "ctcd/common/error.hpp"
#include "ctcd/common/random.hpp"
#include "ctcd/eval/metrics.hpp"

namespace ctcd::eval {
namespace {

using codec::ImageSample;

ImageSample random_image(Rng& rng, int h, int w, int c) {
  ImageSample im(h, w, c);
  for (auto& v : im.pixels) v = rng.uniform();
  return im;
}

// Brute-force oracles: direct loops over every pixel and window, no shared helpers.

double oracle_psnr(const ImageSample& a, const ImageSample& b, double peak) {
  long double acc = 0.0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x)
      for (int c = 0; c < a.channels; ++c) {
        const long double d = a.at(y, x, c) - b.at(y, x, c);
        acc += d * d;
      }
  const long double mse = acc / (static_cast<long double>(a.height) * a.width * a.channels);
  return static_cast<double>(10.0L * std::log10(static_cast<long double>(peak) * peak / mse));
}

double oracle_ssim(const ImageSample& a, const ImageSample& b, int win) {
  auto grey = [](const ImageSample& im, int y, int x) {
    long double s = 0.0;
    for (int c = 0; c < im.channels; ++c) s += im.at(y, x, c);
    return s / im.channels;
  };
  const long double c1 = 0.01L * 0.01L, c2 = 0.03L * 0.03L;
  long double total = 0.0;
  int count = 0;
  for (int y0 = 0; y0 + win <= a.height; ++y0) {
    for (int x0 = 0; x0 + win <= a.width; ++x0) {
      long double ma = 0, mb = 0;
      for (int y = y0; y < y0 + win; ++y)
        for (int x = x0; x < x0 + win; ++x) {
          ma += grey(a, y, x);
          mb += grey(b, y, x);
        }
      const long double n = static_cast<long double>(win) * win;
      ma /= n;
      mb /= n;
      long double va = 0, vb = 0, cov = 0;
      for (int y = y0; y < y0 + win; ++y)
        for (int x = x0; x < x0 + win; ++x) {
          const long double da = grey(a, y, x) - ma, db = grey(b, y, x) - mb;
          va += da * da;
          vb += db * db;
          cov += da * db;
        }
      va /= n;
      vb /= n;
      cov /= n;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return static_cast<double>(total / count);
}

double oracle_nmse(const CVector& h, const CVector& e) {
  long double num = 0, den = 0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const long double dr = h[k].real() - e[k].real(), di = h[k].imag() - e[k].imag();
    num += dr * dr + di * di;
    den += static_cast<long double>(h[k].real()) * h[k].real() + static_cast<long double>(h[k].imag()) * h[k].imag();
  }
  return static_cast<double>(num / den);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

TEST(Psnr, MatchesBruteForceOracle) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_image(rng, 32, 32, 3);
    const auto b = random_image(rng, 32, 32, 3);
    const double peak = i % 2 ? 1.0 : 255.0;
    EXPECT_LT(rel(psnr(a, b, peak), oracle_psnr(a, b, peak)), 1e-6);
  }
}

TEST(Psnr, ClosedFormCases) {
  ImageSample a(4, 4, 1, 10.0), b(4, 4, 1, 11.0);
  EXPECT_NEAR(psnr(a, b, 255.0), 48.1308, 1e-3);
  ImageSample z(4, 4, 1, 0.0), o(4, 4, 1, 1.0);
  EXPECT_NEAR(psnr(z, o, 1.0), 0.0, 1e-12);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  EXPECT_GT(psnr(a, a), 0.0);
  EXPECT_THROW(psnr(a, ImageSample(4, 5, 1)), InputError);
}

TEST(Ssim, MatchesBruteForceOracle) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_image(rng, 16, 16, 3);
    auto b = a;
    // Mix of correlated and independent pairs.
    const double mix = rng.uniform();
    for (auto& v : b.pixels) v = std::clamp(mix * v + (1 - mix) * rng.uniform(), 0.0, 1.0);
    EXPECT_LT(rel(ssim(a, b), oracle_ssim(a, b, 8)), 1e-6);
  }
}

TEST(Ssim, IdentityAndBounds) {
  Rng rng(3);
  const auto a = random_image(rng, 16, 16, 3);
  EXPECT_EQ(ssim(a, a), 1.0);
  const ImageSample flat(16, 16, 3, 0.5);
  const double s = ssim(a, flat);
  EXPECT_GT(s, -1.0);
  EXPECT_LT(s, 1.0);
  EXPECT_THROW(ssim(ImageSample(4, 4, 1), ImageSample(4, 4, 1)), InputError);
  EXPECT_THROW(ssim(a, ImageSample(16, 8, 3)), InputError);
}

TEST(Nmse, MatchesBruteForceOracle) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    CVector h(64), e(64);
    for (auto& v : h) v = rng.complex_normal();
    for (std::size_t k = 0; k < 64; ++k) e[k] = h[k] + rng.complex_normal(0.1 + rng.uniform());
    EXPECT_LT(rel(nmse(h, e), oracle_nmse(h, e)), 1e-6);
  }
}

TEST(Nmse, ClosedFormCases) {
  Rng rng(5);
  CVector h(16);
  for (auto& v : h) v = rng.complex_normal();
  EXPECT_EQ(nmse(h, h), 0.0);
  EXPECT_DOUBLE_EQ(nmse(h, CVector(16)), 1.0);
  CVector twice = h;
  for (auto& v : twice) v *= 2.0;
  EXPECT_NEAR(nmse(h, twice), 1.0, 1e-15);
  EXPECT_THROW(nmse(CVector(16), h), InputError);
  EXPECT_THROW(nmse(h, CVector(3)), InputError);
}

TEST(Nmse, MeanOfPerTrialRatios) {
  const std::vector<CVector> h{{cplx(1, 0)}, {cplx(10, 0)}};
  const std::vector<CVector> e{{cplx(0, 0)}, {cplx(10, 0)}};
  EXPECT_DOUBLE_EQ(mean_nmse(h, e), 0.5);
}

TEST(MeanStat, StandardError) {
  const std::vector<double> v{1, 2, 3, 4};
  const auto s = mean_and_stderr(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.std_error, std::sqrt((1.5 * 1.5 * 2 + 0.5 * 0.5 * 2) / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(s.n, 4u);
}

}  // namespace
}  // namespace ctcd::eval
