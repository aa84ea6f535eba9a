#pragma once

#include <string>

#include "ctcd/nn/ops.hpp"
#include "ctcd/nn/parameters.hpp"

namespace ctcd::nn {

// Layers are stateless functions over a ParameterSet; each layer owns the
// parameters registered under its name prefix.

/// Registers `<name>.weight` [in, out] and `<name>.bias` [1, out].
void add_linear(ParameterSet& p, const std::string& name, int in, int out, Rng& rng, double scale = 1.0);
Tensor linear(const ParameterSet& p, const std::string& name, const Tensor& x);

void add_layer_norm(ParameterSet& p, const std::string& name, int channels);
Tensor layer_norm(const ParameterSet& p, const std::string& name, const Tensor& x);

/// Registers a convolution with weight [kernel*kernel*in, out].
void add_conv2d(ParameterSet& p, const std::string& name, int in, int out, int kernel, Rng& rng,
                double scale = 1.0);

struct Feature {
  Tensor data;  // [batch*height*width, channels]
  FeatureShape shape;
};

Feature conv2d(const ParameterSet& p, const std::string& name, const Feature& x, const ConvGeometry& g);

/// Pre-norm multi-head self-attention over the spatial positions of each image.
void add_self_attention(ParameterSet& p, const std::string& name, int channels, Rng& rng);
/// Returns x + attention(layer_norm(x)).
Feature self_attention(const ParameterSet& p, const std::string& name, const Feature& x, int heads);

}  // namespace ctcd::nn
