#pragma once

#include <limits>
#include <span>
#include <vector>

#include "ctcd/codec/image.hpp"
#include "ctcd/common/types.hpp"

namespace ctcd::eval {

/// Value written to record files in place of +inf for identical images.
inline constexpr double kPsnrIdenticalSentinel = 999.0;

/// 10 log10(peak^2 / MSE). Returns +inf when the images are identical.
double psnr(const codec::ImageSample& x, const codec::ImageSample& y, double peak = 1.0);

struct SsimOptions {
  int window = 8;
  double peak = 1.0;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over every window x window position (stride 1, uniform weights, population
/// statistics). Colour inputs are converted to grey by the channel mean.
double ssim(const codec::ImageSample& x, const codec::ImageSample& y, const SsimOptions& opt = {});

/// ||h - h_hat||^2 / ||h||^2 for a single trial.
double nmse(std::span<const cplx> h, std::span<const cplx> h_hat);

/// Mean of per-trial NMSE values.
double mean_nmse(const std::vector<CVector>& h, const std::vector<CVector>& h_hat);

/// Arithmetic mean and standard error of the mean.
struct MeanStat {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

MeanStat mean_and_stderr(std::span<const double> values);

}  // namespace ctcd::eval
