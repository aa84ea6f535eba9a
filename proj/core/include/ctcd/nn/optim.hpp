#pragma once

#include <vector>

#include "ctcd/nn/parameters.hpp"

namespace ctcd::nn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  // global gradient-norm clip; 0 disables
};

/// Adam over every parameter of a set. Parameters without a gradient are skipped.
class Adam {
 public:
  explicit Adam(const ParameterSet& params, AdamOptions opt = {});

  /// Applies one update with learning rate `lr` and clears the gradients.
  void step(double lr);
  long steps() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<Matrix> m_, v_;
  AdamOptions opt_;
  long t_ = 0;
};

/// Cosine decay from `lr` to `lr * floor` over `total` steps.
double cosine_lr(double lr, long step, long total, double floor = 0.05);

}  // namespace ctcd::nn
