#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ctcd/common/random.hpp"
#include "ctcd/nn/tensor.hpp"

namespace ctcd::testing {

/// Largest relative error between backprop and central differences over `samples`
/// random coordinates of every tensor in `inputs`. `loss` must rebuild the graph from
/// the current input values on each call.
inline double max_gradient_error(const std::vector<nn::Tensor>& inputs, const std::function<nn::Tensor()>& loss,
                                 int samples, std::uint64_t seed, double step = 1e-6) {
  for (auto t : inputs) t.zero_grad();
  loss().backward();
  std::vector<nn::Matrix> analytic;
  for (const auto& t : inputs)
    analytic.push_back(t.has_grad() ? t.grad() : nn::Matrix::Zero(t.rows(), t.cols()));

  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const auto which = rng.uniform_index(inputs.size());
    nn::Tensor t = inputs[which];
    const auto idx = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(t.value().size())));
    double& v = t.mutable_value().data()[idx];
    const double saved = v;
    v = saved + step;
    const double up = loss().value()(0, 0);
    v = saved - step;
    const double down = loss().value()(0, 0);
    v = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[which].data()[idx];
    const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(a - numeric) / scale);
  }
  return worst;
}

inline nn::Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double sd = 1.0) {
  nn::Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sd * rng.normal();
  return m;
}

}  // namespace ctcd::testing
