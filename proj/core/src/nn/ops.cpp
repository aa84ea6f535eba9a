#include "ctcd/nn/ops.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "ctcd/common/error.hpp"

namespace ctcd::nn {

namespace {

using Node = Tensor::Node;

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InputError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
}

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw InputError("matmul: inner dimensions differ");
  Matrix out;
  out.noalias() = a.value() * b.value();
  return Tensor::make(std::move(out), {a, b}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (pa.requires_grad) pa.grad_buffer().noalias() += self.grad * pb.value.transpose();
    if (pb.requires_grad) pb.grad_buffer().noalias() += pa.value.transpose() * self.grad;
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  return Tensor::make(a.value() + b.value(), {a, b}, [](Node& self) {
    for (auto& p : self.parents)
      if (p->requires_grad) p->accumulate(self.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  return Tensor::make(a.value() - b.value(), {a, b}, [](Node& self) {
    if (parent(self, 0).requires_grad) parent(self, 0).accumulate(self.grad);
    if (parent(self, 1).requires_grad) parent(self, 1).accumulate(-self.grad);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  return Tensor::make(a.value().cwiseProduct(b.value()), {a, b}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (pa.requires_grad) pa.accumulate(self.grad.cwiseProduct(pb.value));
    if (pb.requires_grad) pb.accumulate(self.grad.cwiseProduct(pa.value));
  });
}

Tensor scale(const Tensor& a, double s) {
  return Tensor::make(a.value() * s, {a}, [s](Node& self) { parent(self, 0).accumulate(self.grad * s); });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) throw InputError("add_bias: bias must be 1 x cols");
  Matrix out = a.value();
  out.rowwise() += bias.value().row(0);
  return Tensor::make(std::move(out), {a, bias}, [](Node& self) {
    if (parent(self, 0).requires_grad) parent(self, 0).accumulate(self.grad);
    if (parent(self, 1).requires_grad) parent(self, 1).accumulate(self.grad.colwise().sum());
  });
}

Tensor scale_rows(const Tensor& a, const Tensor& s) {
  if (s.cols() != 1 || s.rows() != a.rows()) throw InputError("scale_rows: scale must be rows x 1");
  Matrix out = a.value().array().colwise() * s.value().col(0).array();
  return Tensor::make(std::move(out), {a, s}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& ps = parent(self, 1);
    if (pa.requires_grad)
      pa.accumulate((self.grad.array().colwise() * ps.value.col(0).array()).matrix());
    if (ps.requires_grad)
      ps.accumulate(self.grad.cwiseProduct(pa.value).rowwise().sum());
  });
}

Tensor silu(const Tensor& a) {
  const Matrix sig = (1.0 + (-a.value().array()).exp()).inverse().matrix();
  Matrix out = a.value().cwiseProduct(sig);
  return Tensor::make(std::move(out), {a}, [sig](Node& self) {
    const auto& x = parent(self, 0).value.array();
    const auto s = sig.array();
    parent(self, 0).accumulate((self.grad.array() * (s * (1.0 + x * (1.0 - s)))).matrix());
  });
}

Tensor sigmoid(const Tensor& a) {
  Matrix out = (1.0 + (-a.value().array()).exp()).inverse().matrix();
  Matrix saved = out;
  return Tensor::make(std::move(out), {a}, [saved](Node& self) {
    parent(self, 0).accumulate(
        (self.grad.array() * saved.array() * (1.0 - saved.array())).matrix());
  });
}

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps) {
  const auto C = a.cols();
  if (gain.rows() != 1 || gain.cols() != C || bias.rows() != 1 || bias.cols() != C)
    throw InputError("layer_norm: gain and bias must be 1 x cols");
  const Matrix& x = a.value();
  Eigen::VectorXd inv_std(x.rows());
  Matrix xhat(x.rows(), C);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mu) * inv_std(r);
  }
  Matrix out = xhat.array().rowwise() * gain.value().row(0).array();
  out.rowwise() += bias.value().row(0);
  return Tensor::make(std::move(out), {a, gain, bias}, [xhat, inv_std](Node& self) {
    Node& px = parent(self, 0);
    Node& pg = parent(self, 1);
    Node& pb = parent(self, 2);
    const Matrix& dy = self.grad;
    if (pg.requires_grad) pg.accumulate(dy.cwiseProduct(xhat).colwise().sum());
    if (pb.requires_grad) pb.accumulate(dy.colwise().sum());
    if (px.requires_grad) {
      const Matrix dxhat = dy.array().rowwise() * pg.value.row(0).array();
      Matrix dx(dy.rows(), dy.cols());
      for (Eigen::Index r = 0; r < dy.rows(); ++r) {
        const double m1 = dxhat.row(r).mean();
        const double m2 = dxhat.row(r).cwiseProduct(xhat.row(r)).mean();
        dx.row(r) = (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2) * inv_std(r);
      }
      px.accumulate(dx);
    }
  });
}

Tensor sum(const Tensor& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return Tensor::make(std::move(out), {a}, [](Node& self) {
    const Node& p = parent(self, 0);
    parent(self, 0).accumulate(Matrix::Constant(p.value.rows(), p.value.cols(), self.grad(0, 0)));
  });
}

Tensor mse(const Tensor& a, const Tensor& target) {
  check_same_shape(a, target, "mse");
  Matrix diff = a.value() - target.value();
  const double n = static_cast<double>(diff.size());
  Matrix out(1, 1);
  out(0, 0) = diff.squaredNorm() / n;
  return Tensor::make(std::move(out), {a, target}, [diff, n](Node& self) {
    const Matrix g = diff * (2.0 * self.grad(0, 0) / n);
    if (parent(self, 0).requires_grad) parent(self, 0).accumulate(g);
    if (parent(self, 1).requires_grad) parent(self, 1).accumulate(-g);
  });
}

Tensor reshape(const Tensor& a, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != a.value().size()) throw InputError("reshape: element count changes");
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  return Tensor::make(std::move(out), {a}, [](Node& self) {
    const Node& p = parent(self, 0);
    parent(self, 0).accumulate(Eigen::Map<const Matrix>(self.grad.data(), p.value.rows(), p.value.cols()));
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw InputError("concat_cols: no inputs");
  const auto rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw InputError("concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index c0 = 0;
  for (const auto& p : parts) {
    out.middleCols(c0, p.cols()) = p.value();
    c0 += p.cols();
  }
  return Tensor::make(std::move(out), parts, [](Node& self) {
    Eigen::Index c = 0;
    for (auto& p : self.parents) {
      const auto w = p->value.cols();
      if (p->requires_grad) p->accumulate(self.grad.middleCols(c, w));
      c += w;
    }
  });
}

Tensor im2col(const Tensor& a, const FeatureShape& in, const ConvGeometry& g) {
  if (a.rows() != in.rows() || a.cols() != in.channels) throw InputError("im2col: tensor does not match shape");
  const int oh = g.out_size(in.height);
  const int ow = g.out_size(in.width);
  if (oh <= 0 || ow <= 0) throw InputError("im2col: kernel larger than input");
  const int C = in.channels;
  const int kk = g.kernel * g.kernel;
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(in.batch) * oh * ow, kk * C);
  const Matrix& x = a.value();
  for (int b = 0; b < in.batch; ++b) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const Eigen::Index row = (static_cast<Eigen::Index>(b) * oh + oy) * ow + ox;
        for (int ky = 0; ky < g.kernel; ++ky) {
          const int iy = oy * g.stride - g.padding + ky * g.dilation;
          if (iy < 0 || iy >= in.height) continue;
          for (int kx = 0; kx < g.kernel; ++kx) {
            const int ix = ox * g.stride - g.padding + kx * g.dilation;
            if (ix < 0 || ix >= in.width) continue;
            const Eigen::Index src = (static_cast<Eigen::Index>(b) * in.height + iy) * in.width + ix;
            out.block(row, (ky * g.kernel + kx) * C, 1, C) = x.row(src);
          }
        }
      }
    }
  }
  return Tensor::make(std::move(out), {a}, [in, g, oh, ow](Node& self) {
    const int C = in.channels;
    Matrix& dx = parent(self, 0).grad_buffer();
    for (int b = 0; b < in.batch; ++b) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          const Eigen::Index row = (static_cast<Eigen::Index>(b) * oh + oy) * ow + ox;
          for (int ky = 0; ky < g.kernel; ++ky) {
            const int iy = oy * g.stride - g.padding + ky * g.dilation;
            if (iy < 0 || iy >= in.height) continue;
            for (int kx = 0; kx < g.kernel; ++kx) {
              const int ix = ox * g.stride - g.padding + kx * g.dilation;
              if (ix < 0 || ix >= in.width) continue;
              const Eigen::Index dst = (static_cast<Eigen::Index>(b) * in.height + iy) * in.width + ix;
              dx.row(dst) += self.grad.block(row, (ky * g.kernel + kx) * C, 1, C);
            }
          }
        }
      }
    }
  });
}

Tensor upsample_nearest(const Tensor& a, const FeatureShape& in, int factor) {
  if (a.rows() != in.rows() || a.cols() != in.channels) throw InputError("upsample: tensor does not match shape");
  const int oh = in.height * factor;
  const int ow = in.width * factor;
  Matrix out(static_cast<Eigen::Index>(in.batch) * oh * ow, in.channels);
  for (int b = 0; b < in.batch; ++b)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x)
        out.row((static_cast<Eigen::Index>(b) * oh + y) * ow + x) =
            a.value().row((static_cast<Eigen::Index>(b) * in.height + y / factor) * in.width + x / factor);
  return Tensor::make(std::move(out), {a}, [in, factor, oh, ow](Node& self) {
    Matrix& dx = parent(self, 0).grad_buffer();
    for (int b = 0; b < in.batch; ++b)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
          dx.row((static_cast<Eigen::Index>(b) * in.height + y / factor) * in.width + x / factor) +=
              self.grad.row((static_cast<Eigen::Index>(b) * oh + y) * ow + x);
  });
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, int batch, int tokens, int heads) {
  check_same_shape(q, k, "attention");
  check_same_shape(q, v, "attention");
  const auto dim = q.cols();
  if (q.rows() != static_cast<Eigen::Index>(batch) * tokens) throw InputError("attention: rows != batch*tokens");
  if (heads < 1 || dim % heads != 0) throw InputError("attention: dim not divisible by heads");
  const int hd = static_cast<int>(dim / heads);
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(hd));

  auto probs = std::make_shared<std::vector<Matrix>>(static_cast<std::size_t>(batch) * heads);
  Matrix out(q.rows(), dim);
  for (int b = 0; b < batch; ++b) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(b) * tokens;
    for (int h = 0; h < heads; ++h) {
      const auto Q = q.value().block(r0, h * hd, tokens, hd);
      const auto K = k.value().block(r0, h * hd, tokens, hd);
      const auto V = v.value().block(r0, h * hd, tokens, hd);
      Matrix s = (Q * K.transpose()) * inv_scale;
      for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const double m = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - m).exp();
        s.row(i) /= s.row(i).sum();
      }
      out.block(r0, h * hd, tokens, hd).noalias() = s * V;
      (*probs)[static_cast<std::size_t>(b) * heads + h] = std::move(s);
    }
  }
  return Tensor::make(std::move(out), {q, k, v}, [probs, batch, tokens, heads, hd, inv_scale](Node& self) {
    Node& pq = parent(self, 0);
    Node& pk = parent(self, 1);
    Node& pv = parent(self, 2);
    Matrix* dq = pq.requires_grad ? &pq.grad_buffer() : nullptr;
    Matrix* dk = pk.requires_grad ? &pk.grad_buffer() : nullptr;
    Matrix* dv = pv.requires_grad ? &pv.grad_buffer() : nullptr;
    for (int b = 0; b < batch; ++b) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(b) * tokens;
      for (int h = 0; h < heads; ++h) {
        const Matrix& P = (*probs)[static_cast<std::size_t>(b) * heads + h];
        const auto dO = self.grad.block(r0, h * hd, tokens, hd);
        const auto Q = pq.value.block(r0, h * hd, tokens, hd);
        const auto K = pk.value.block(r0, h * hd, tokens, hd);
        const auto V = pv.value.block(r0, h * hd, tokens, hd);
        if (dv) dv->block(r0, h * hd, tokens, hd).noalias() += P.transpose() * dO;
        Matrix dP = dO * V.transpose();
        const Eigen::VectorXd rs = dP.cwiseProduct(P).rowwise().sum();
        Matrix dS = P.cwiseProduct(dP.colwise() - rs) * inv_scale;
        if (dq) dq->block(r0, h * hd, tokens, hd).noalias() += dS * K;
        if (dk) dk->block(r0, h * hd, tokens, hd).noalias() += dS.transpose() * Q;
      }
    }
  });
}

namespace {
constexpr double kMinRms = 1e-12;
}  // namespace

Tensor normalize_power(const Tensor& a) {
  if (a.cols() % 2 != 0) throw InputError("normalize_power: odd column count");
  const double n = static_cast<double>(a.cols() / 2);
  const Eigen::VectorXd rms = (a.value().rowwise().squaredNorm() / n).cwiseSqrt();
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    // A vanishing row has no direction; it maps to the constant unit-power frame.
    if (rms(r) < kMinRms) out.row(r).setConstant(std::sqrt(0.5));
    else out.row(r) = a.value().row(r) / rms(r);
  }
  return Tensor::make(std::move(out), {a}, [rms, n](Node& self) {
    const Matrix& x = parent(self, 0).value;
    const Matrix& dy = self.grad;
    Matrix dx = Matrix::Zero(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      if (rms(r) < kMinRms) continue;
      const double dot = dy.row(r).dot(x.row(r));
      dx.row(r) = dy.row(r) / rms(r) - x.row(r) * (dot / (n * rms(r) * rms(r) * rms(r)));
    }
    parent(self, 0).accumulate(dx);
  });
}

Tensor complex_affine(const Tensor& a, const Matrix& gain, const Matrix& offset) {
  if (gain.rows() != a.rows() || gain.cols() != a.cols() || offset.rows() != a.rows() ||
      offset.cols() != a.cols() || a.cols() % 2 != 0)
    throw InputError("complex_affine: gain/offset must match the input pair layout");
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); c += 2) {
      const double gr = gain(r, c), gi = gain(r, c + 1);
      out(r, c) = gr * x(r, c) - gi * x(r, c + 1) + offset(r, c);
      out(r, c + 1) = gi * x(r, c) + gr * x(r, c + 1) + offset(r, c + 1);
    }
  }
  return Tensor::make(std::move(out), {a}, [gain](Node& self) {
    const Matrix& dy = self.grad;
    Matrix dx(dy.rows(), dy.cols());
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
      for (Eigen::Index c = 0; c < dy.cols(); c += 2) {
        const double gr = gain(r, c), gi = gain(r, c + 1);
        dx(r, c) = gr * dy(r, c) + gi * dy(r, c + 1);
        dx(r, c + 1) = -gi * dy(r, c) + gr * dy(r, c + 1);
      }
    }
    parent(self, 0).accumulate(dx);
  });
}

}  // namespace ctcd::nn
