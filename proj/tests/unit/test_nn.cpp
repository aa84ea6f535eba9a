#include <gtest/gtest.h>

#include "ctcd/common/error.hpp"
#include "ctcd/nn/archive.hpp"
#include "ctcd/nn/layers.hpp"
#include "ctcd/nn/ops.hpp"
#include "ctcd/nn/optim.hpp"
#include "gradcheck.hpp"
#include "test_util.hpp"

namespace ctcd::nn {
namespace {

using testing::max_gradient_error;
using testing::random_matrix;

constexpr double kTol = 1e-4;

struct OpCase {
  const char* name;
  std::vector<std::pair<int, int>> shapes;
  std::function<Tensor(const std::vector<Tensor>&)> fn;
};

void PrintTo(const OpCase& c, std::ostream* os) { *os << c.name; }

class OpGradient : public ::testing::TestWithParam<OpCase> {};

TEST_P(OpGradient, MatchesCentralDifferences) {
  const auto& c = GetParam();
  Rng rng(42);
  std::vector<Tensor> in;
  for (auto [r, k] : c.shapes) in.push_back(Tensor::parameter(random_matrix(rng, r, k)));
  // Weighted sum so every output entry matters with a different weight.
  Tensor probe;
  const auto loss = [&] {
    Tensor out = c.fn(in);
    if (!probe.defined()) {
      Rng w(7);
      probe = Tensor::constant(random_matrix(w, out.rows(), out.cols()));
    }
    return sum(mul(out, probe));
  };
  EXPECT_LT(max_gradient_error(in, loss, 20, 3), kTol) << c.name;
}

FeatureShape fs(int b, int h, int w, int c) { return FeatureShape{b, h, w, c}; }

INSTANTIATE_TEST_SUITE_P(
    Ops, OpGradient,
    ::testing::Values(
        OpCase{"matmul", {{3, 4}, {4, 5}}, [](const auto& t) { return matmul(t[0], t[1]); }},
        OpCase{"add", {{3, 4}, {3, 4}}, [](const auto& t) { return add(t[0], t[1]); }},
        OpCase{"sub", {{3, 4}, {3, 4}}, [](const auto& t) { return sub(t[0], t[1]); }},
        OpCase{"mul", {{3, 4}, {3, 4}}, [](const auto& t) { return mul(t[0], t[1]); }},
        OpCase{"scale", {{3, 4}}, [](const auto& t) { return scale(t[0], -1.7); }},
        OpCase{"add_bias", {{5, 3}, {1, 3}}, [](const auto& t) { return add_bias(t[0], t[1]); }},
        OpCase{"scale_rows", {{5, 3}, {5, 1}}, [](const auto& t) { return scale_rows(t[0], t[1]); }},
        OpCase{"silu", {{4, 4}}, [](const auto& t) { return silu(t[0]); }},
        OpCase{"sigmoid", {{4, 4}}, [](const auto& t) { return sigmoid(t[0]); }},
        OpCase{"layer_norm", {{4, 6}, {1, 6}, {1, 6}}, [](const auto& t) { return layer_norm(t[0], t[1], t[2]); }},
        OpCase{"mse", {{4, 3}, {4, 3}}, [](const auto& t) { return mse(t[0], t[1]); }},
        OpCase{"reshape", {{4, 6}}, [](const auto& t) { return reshape(t[0], 6, 4); }},
        OpCase{"concat_cols", {{3, 2}, {3, 4}}, [](const auto& t) { return concat_cols({t[0], t[1]}); }},
        OpCase{"im2col", {{2 * 5 * 5, 3}},
               [](const auto& t) { return im2col(t[0], fs(2, 5, 5, 3), ConvGeometry{3, 2, 1, 1}); }},
        OpCase{"im2col_dilated", {{1 * 6 * 6, 2}},
               [](const auto& t) { return im2col(t[0], fs(1, 6, 6, 2), ConvGeometry{3, 1, 2, 2}); }},
        OpCase{"upsample", {{2 * 3 * 3, 2}}, [](const auto& t) { return upsample_nearest(t[0], fs(2, 3, 3, 2), 2); }},
        OpCase{"attention", {{2 * 4, 6}, {2 * 4, 6}, {2 * 4, 6}},
               [](const auto& t) { return attention(t[0], t[1], t[2], 2, 4, 2); }},
        OpCase{"normalize_power", {{3, 8}}, [](const auto& t) { return normalize_power(t[0]); }},
        OpCase{"complex_affine", {{3, 8}},
               [](const auto& t) {
                 Rng r(5);
                 return complex_affine(t[0], random_matrix(r, 3, 8), random_matrix(r, 3, 8));
               }}),
    [](const ::testing::TestParamInfo<OpCase>& i) { return std::string(i.param.name); });

TEST(Ops, ForwardValues) {
  const Tensor a = Tensor::constant((Matrix(2, 2) << 1, 2, 3, 4).finished());
  const Tensor b = Tensor::constant((Matrix(2, 2) << 5, 6, 7, 8).finished());
  EXPECT_EQ(matmul(a, b).value(), (Matrix(2, 2) << 19, 22, 43, 50).finished());
  EXPECT_DOUBLE_EQ(sum(a).value()(0, 0), 10.0);
  EXPECT_DOUBLE_EQ(mse(a, b).value()(0, 0), 16.0);
  EXPECT_NEAR(sigmoid(Tensor::constant(Matrix::Zero(1, 1))).value()(0, 0), 0.5, 1e-15);

  const Tensor z = Tensor::constant((Matrix(1, 4) << 3, 4, 0, 0).finished());
  const Matrix n = normalize_power(z).value();
  EXPECT_NEAR((n(0, 0) * n(0, 0) + n(0, 1) * n(0, 1) + n(0, 2) * n(0, 2) + n(0, 3) * n(0, 3)) / 2.0, 1.0, 1e-12);
}

TEST(Ops, NormalizePowerZeroRow) {
  const Tensor z = Tensor::parameter(Matrix::Zero(1, 4));
  const Tensor n = normalize_power(z);
  EXPECT_NEAR(n.value().squaredNorm() / 2.0, 1.0, 1e-15);
  sum(n).backward();
  EXPECT_EQ(z.grad(), Matrix::Zero(1, 4));
}

TEST(Ops, ConvGeometryOutputSize) {
  EXPECT_EQ((ConvGeometry{3, 1, 1, 1}).out_size(8), 8);
  EXPECT_EQ((ConvGeometry{3, 2, 1, 1}).out_size(8), 4);
  EXPECT_EQ((ConvGeometry{3, 1, 2, 2}).out_size(8), 8);
}

TEST(Layers, GradientsMatchCentralDifferences) {
  Rng rng(9);
  ParameterSet p;
  add_conv2d(p, "conv", 3, 4, 3, rng);
  add_self_attention(p, "attn", 4, rng);
  add_layer_norm(p, "ln", 4);
  add_linear(p, "lin", 4, 2, rng);
  std::vector<Tensor> params;
  for (const auto& [name, t] : p.entries()) params.push_back(t);
  // Perturb the layer-norm parameters away from their (1, 0) initialization.
  for (auto& t : params) t.mutable_value() += 0.1 * random_matrix(rng, t.rows(), t.cols());
  const Matrix x = random_matrix(rng, 2 * 4 * 4, 3);
  const auto loss = [&] {
    Feature f{Tensor::constant(x), FeatureShape{2, 4, 4, 3}};
    f = conv2d(p, "conv", f, ConvGeometry{3, 1, 2, 2});
    f = self_attention(p, "attn", f, 2);
    const Tensor y = linear(p, "lin", layer_norm(p, "ln", f.data));
    return mse(y, Tensor::constant(Matrix::Constant(y.rows(), y.cols(), 0.3)));
  };
  EXPECT_LT(max_gradient_error(params, loss, 30, 4), kTol);
}

TEST(NoGrad, GuardSkipsGraph) {
  const Tensor w = Tensor::parameter(Matrix::Ones(2, 2));
  {
    NoGradGuard guard;
    EXPECT_TRUE(NoGradGuard::active());
    const Tensor y = matmul(w, w);
    EXPECT_TRUE(y.node().parents.empty());
  }
  EXPECT_FALSE(NoGradGuard::active());
  EXPECT_FALSE(matmul(w, w).node().parents.empty());
}

TEST(ParameterSet, DuplicateCloneAssignIdentical) {
  ParameterSet p;
  p.add("a", Matrix::Ones(2, 3));
  EXPECT_THROW(p.add("a", Matrix::Ones(1, 1)), InputError);
  EXPECT_EQ(p.num_scalars(), 6u);
  ParameterSet q = p.clone();
  EXPECT_TRUE(q.identical(p));
  q.get("a").node().value(0, 0) = 5.0;
  EXPECT_FALSE(q.identical(p));
  EXPECT_EQ(p.get("a").value()(0, 0), 1.0);
  p.assign(q);
  EXPECT_TRUE(q.identical(p));
}

TEST(Adam, MinimizesQuadratic) {
  ParameterSet p;
  Tensor w = p.add("w", Matrix::Constant(1, 3, 5.0));
  Adam opt(p);
  const Tensor target = Tensor::constant((Matrix(1, 3) << 1, -2, 0.5).finished());
  for (int i = 0; i < 2000; ++i) {
    mse(w, target).backward();
    opt.step(0.05);
  }
  EXPECT_EQ(opt.steps(), 2000);
  EXPECT_NEAR((w.value() - target.value()).norm(), 0.0, 1e-3);
}

TEST(Adam, CosineSchedule) {
  EXPECT_DOUBLE_EQ(cosine_lr(1.0, 0, 100), 1.0);
  EXPECT_NEAR(cosine_lr(1.0, 100, 100), 0.05, 1e-12);
}

TEST(Archive, RoundTripIsBitExact) {
  testing::TempDir dir;
  Rng rng(1);
  Archive a;
  a.meta["note"] = "x";
  a.meta["values"] = {1, 2, 3};
  ParameterSet p;
  p.add("l.weight", random_matrix(rng, 3, 4));
  p.add("l.bias", random_matrix(rng, 1, 4));
  a.put_parameters("net.", p);
  a.put("extra", random_matrix(rng, 2, 2));
  save_archive(a, dir / "a.ckpt");
  const Archive b = load_archive(dir / "a.ckpt");
  EXPECT_EQ(b.meta, a.meta);
  EXPECT_TRUE(b.parameters("net.").identical(p));
  EXPECT_EQ(b.at("extra"), a.at("extra"));
  EXPECT_EQ(encode_archive(a), encode_archive(b));
}

TEST(Archive, Errors) {
  EXPECT_THROW(load_archive("/nonexistent/x.ckpt"), InputError);
  Archive a;
  a.put("t", Matrix::Ones(2, 2));
  auto bytes = encode_archive(a);
  bytes[0] = 'Z';
  EXPECT_THROW(decode_archive(bytes), IngestionError);
  bytes = encode_archive(a);
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(decode_archive(bytes), IngestionError);
  EXPECT_THROW(a.at("missing"), InputError);
}

}  // namespace
}  // namespace ctcd::nn
