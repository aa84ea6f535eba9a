#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ctcd::estimator {

/// Linear-beta DDPM schedule over steps t = 1..T.
class DiffusionSchedule {
 public:
  DiffusionSchedule() = default;

  /// Betas increase linearly from beta_1 to beta_T. Throws ConfigError on invalid values.
  static DiffusionSchedule linear(int num_steps, double beta_1, double beta_T);

  /// The common 1e-4 .. 0.02 endpoints, defined for 1000 steps, rescaled by 1000/T so a
  /// short chain still ends near N(0, I). Needs num_steps > 20, else beta_T >= 1 (ConfigError).
  static DiffusionSchedule rescaled_standard(int num_steps);

  int num_steps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const;
  double alpha(int t) const { return 1.0 - beta(t); }
  /// Product of alpha_1..alpha_t; alpha_bar(0) = 1.
  double alpha_bar(int t) const;

  double beta_start() const { return betas_.front(); }
  double beta_end() const { return betas_.back(); }

  bool operator==(const DiffusionSchedule&) const = default;

 private:
  std::vector<double> betas_;
  std::vector<double> alpha_bar_;  // index 0..T
};

/// x_t = sqrt(alpha_bar_t) h0 + sqrt(1 - alpha_bar_t) eps with eps drawn from `seed`.
/// t = 0 returns h0. Throws InputError for t outside [0, T].
std::vector<double> ddpm_forward(std::span<const double> h0, int t, const DiffusionSchedule& schedule,
                                 std::uint64_t seed);

}  // namespace ctcd::estimator
