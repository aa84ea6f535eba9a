#include "ctcd/nn/layers.hpp"

#include "ctcd/common/error.hpp"

namespace ctcd::nn {

void add_linear(ParameterSet& p, const std::string& name, int in, int out, Rng& rng, double scale) {
  p.add(name + ".weight", init_normal(rng, in, out, scale));
  p.add(name + ".bias", Matrix::Zero(1, out));
}

Tensor linear(const ParameterSet& p, const std::string& name, const Tensor& x) {
  return add_bias(matmul(x, p.get(name + ".weight")), p.get(name + ".bias"));
}

void add_layer_norm(ParameterSet& p, const std::string& name, int channels) {
  p.add(name + ".gain", Matrix::Ones(1, channels));
  p.add(name + ".bias", Matrix::Zero(1, channels));
}

Tensor layer_norm(const ParameterSet& p, const std::string& name, const Tensor& x) {
  return layer_norm(x, p.get(name + ".gain"), p.get(name + ".bias"));
}

void add_conv2d(ParameterSet& p, const std::string& name, int in, int out, int kernel, Rng& rng, double scale) {
  add_linear(p, name, kernel * kernel * in, out, rng, scale);
}

Feature conv2d(const ParameterSet& p, const std::string& name, const Feature& x, const ConvGeometry& g) {
  FeatureShape out = x.shape;
  out.height = g.out_size(x.shape.height);
  out.width = g.out_size(x.shape.width);
  Tensor cols = (g.kernel == 1 && g.stride == 1 && g.padding == 0) ? x.data : im2col(x.data, x.shape, g);
  Tensor y = linear(p, name, cols);
  out.channels = static_cast<int>(y.cols());
  return {y, out};
}

void add_self_attention(ParameterSet& p, const std::string& name, int channels, Rng& rng) {
  add_layer_norm(p, name + ".norm", channels);
  add_linear(p, name + ".q", channels, channels, rng);
  add_linear(p, name + ".k", channels, channels, rng);
  add_linear(p, name + ".v", channels, channels, rng);
  add_linear(p, name + ".out", channels, channels, rng, 0.5);
}

Feature self_attention(const ParameterSet& p, const std::string& name, const Feature& x, int heads) {
  const Tensor h = layer_norm(p, name + ".norm", x.data);
  const Tensor q = linear(p, name + ".q", h);
  const Tensor k = linear(p, name + ".k", h);
  const Tensor v = linear(p, name + ".v", h);
  const int tokens = x.shape.height * x.shape.width;
  const Tensor a = attention(q, k, v, x.shape.batch, tokens, heads);
  return {add(x.data, linear(p, name + ".out", a)), x.shape};
}

}  // namespace ctcd::nn
