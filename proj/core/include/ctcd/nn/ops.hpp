#pragma once

#include <vector>

#include "ctcd/nn/tensor.hpp"

namespace ctcd::nn {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Element-wise product.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
/// Adds a 1 x C row to every row of a.
Tensor add_bias(const Tensor& a, const Tensor& bias);
/// Multiplies row i of a by s(i, 0).
Tensor scale_rows(const Tensor& a, const Tensor& s);

Tensor silu(const Tensor& a);
Tensor sigmoid(const Tensor& a);

/// Normalizes each row to zero mean / unit variance, then applies gain and bias (1 x C).
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

Tensor sum(const Tensor& a);
/// mean((a - target)^2) over all entries.
Tensor mse(const Tensor& a, const Tensor& target);

/// Reinterprets the row-major storage with a new shape.
Tensor reshape(const Tensor& a, Eigen::Index rows, Eigen::Index cols);
Tensor concat_cols(const std::vector<Tensor>& parts);

/// Spatial layout of a feature tensor stored as [batch*height*width, channels].
struct FeatureShape {
  int batch = 1;
  int height = 1;
  int width = 1;
  int channels = 1;

  Eigen::Index rows() const { return static_cast<Eigen::Index>(batch) * height * width; }
  bool operator==(const FeatureShape&) const = default;
};

struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int dilation = 1;
  int padding = 1;

  int out_size(int in) const { return (in + 2 * padding - dilation * (kernel - 1) - 1) / stride + 1; }
};

/// Patch matrix [batch*out_h*out_w, kernel*kernel*channels] with zero padding; columns
/// ordered (ky, kx, channel).
Tensor im2col(const Tensor& a, const FeatureShape& in, const ConvGeometry& g);

/// Nearest-neighbour upsampling by an integer factor.
Tensor upsample_nearest(const Tensor& a, const FeatureShape& in, int factor);

/// Multi-head scaled dot-product attention applied independently to each of `batch`
/// groups of `tokens` consecutive rows. q, k, v are [batch*tokens, dim].
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, int batch, int tokens, int heads);

/// Divides each row by the root-mean-square magnitude of its complex pairs
/// (columns 2i, 2i+1), giving unit average complex power per row. An all-zero row becomes
/// the constant frame (1+j)/sqrt(2) with zero gradient.
Tensor normalize_power(const Tensor& a);

/// Per-element complex affine map on pair-interleaved rows: out = gain * a + offset, where
/// gain and offset are constant matrices in the same (re, im) pair layout.
Tensor complex_affine(const Tensor& a, const Matrix& gain, const Matrix& offset);

}  // namespace ctcd::nn
