#include "ctcd/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ctcd::nn {

Adam::Adam(const ParameterSet& params, AdamOptions opt) : opt_(opt) {
  for (const auto& [name, t] : params.entries()) {
    params_.push_back(t);
    m_.push_back(Matrix::Zero(t.rows(), t.cols()));
    v_.push_back(Matrix::Zero(t.rows(), t.cols()));
  }
}

void Adam::step(double lr) {
  ++t_;
  double scale = 1.0;
  if (opt_.clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto& p : params_)
      if (p.has_grad()) sq += p.grad().squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > opt_.clip_norm) scale = opt_.clip_norm / norm;
  }
  const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    if (!p.has_grad()) continue;
    const Matrix g = p.grad() * scale;
    m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * g;
    v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * g.cwiseAbs2();
    p.mutable_value().array() -=
        lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + opt_.eps);
    p.zero_grad();
  }
}

double cosine_lr(double lr, long step, long total, double floor) {
  if (total <= 1) return lr;
  const double frac = std::clamp(static_cast<double>(step) / static_cast<double>(total - 1), 0.0, 1.0);
  return lr * (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * frac)));
}

}  // namespace ctcd::nn
