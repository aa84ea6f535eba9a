#include "ctcd/estimator/schedule.hpp"

#include <cmath>
#include <string>

#include "ctcd/common/error.hpp"
#include "ctcd/common/random.hpp"

namespace ctcd::estimator {

DiffusionSchedule DiffusionSchedule::linear(int num_steps, double beta_1, double beta_T) {
  if (num_steps < 1) throw ConfigError("diffusion schedule needs at least one step");
  if (!(beta_1 > 0.0) || !(beta_T < 1.0) || beta_T < beta_1)
    throw ConfigError("diffusion betas must satisfy 0 < beta_1 <= beta_T < 1");
  DiffusionSchedule s;
  s.betas_.resize(static_cast<std::size_t>(num_steps));
  s.alpha_bar_.resize(static_cast<std::size_t>(num_steps) + 1);
  s.alpha_bar_[0] = 1.0;
  for (int t = 1; t <= num_steps; ++t) {
    const double frac = num_steps == 1 ? 0.0 : static_cast<double>(t - 1) / (num_steps - 1);
    const double b = beta_1 + (beta_T - beta_1) * frac;
    s.betas_[t - 1] = b;
    s.alpha_bar_[t] = s.alpha_bar_[t - 1] * (1.0 - b);
  }
  return s;
}

DiffusionSchedule DiffusionSchedule::rescaled_standard(int num_steps) {
  if (num_steps <= 20)
    throw ConfigError("rescaled schedule needs more than 20 steps (beta_T = 20 / num_steps), got " +
                      std::to_string(num_steps));
  const double k = 1000.0 / num_steps;
  return linear(num_steps, 1e-4 * k, 0.02 * k);
}

double DiffusionSchedule::beta(int t) const {
  if (t < 1 || t > num_steps()) throw InputError("diffusion step " + std::to_string(t) + " out of range");
  return betas_[t - 1];
}

double DiffusionSchedule::alpha_bar(int t) const {
  if (t < 0 || t > num_steps()) throw InputError("diffusion step " + std::to_string(t) + " out of range");
  return alpha_bar_[t];
}

std::vector<double> ddpm_forward(std::span<const double> h0, int t, const DiffusionSchedule& schedule,
                                 std::uint64_t seed) {
  const double ab = schedule.alpha_bar(t);
  const double a = std::sqrt(ab);
  const double s = std::sqrt(1.0 - ab);
  Rng rng(seed);
  std::vector<double> x(h0.size());
  for (std::size_t i = 0; i < h0.size(); ++i) x[i] = a * h0[i] + (t == 0 ? 0.0 : s * rng.normal());
  return x;
}

}  // namespace ctcd::estimator
