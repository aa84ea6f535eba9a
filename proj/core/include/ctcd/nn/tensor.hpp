#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

namespace ctcd::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor>;

/// Reverse-mode autodiff value. A Tensor is a cheap handle to a graph node; copies
/// share the node. Every value is a 2-D matrix; spatial layouts are tracked by the
/// layers that produce them.
class Tensor {
 public:
  Tensor() = default;

  /// Leaf that does not receive gradients.
  static Tensor constant(Matrix value);
  /// Leaf that accumulates gradients (a trainable parameter).
  static Tensor parameter(Matrix value);

  bool defined() const { return static_cast<bool>(node_); }
  const Matrix& value() const { return node_->value; }
  /// Mutable access for optimizers and tests; do not change the shape.
  Matrix& mutable_value() { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  bool has_grad() const { return node_->grad.size() != 0; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void zero_grad() { node_->grad.resize(0, 0); }

  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }

  /// Backpropagates from this scalar (1 x 1) tensor.
  void backward() const;

  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this node's grad and accumulates into the parents' grads.
    std::function<void(Node&)> backward_fn;

    void accumulate(const Matrix& g) {
      if (grad.size() == 0)
        grad = g;
      else
        grad += g;
    }
    Matrix& grad_buffer() {
      if (grad.size() == 0) grad = Matrix::Zero(value.rows(), value.cols());
      return grad;
    }
  };

  /// Builds an interior node. `backward_fn` runs only when some parent needs gradients.
  static Tensor make(Matrix value, std::vector<Tensor> parents,
                     std::function<void(Node&)> backward_fn);

  Node& node() const { return *node_; }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  std::shared_ptr<Node> node_;
};

/// While alive, new interior nodes on this thread record no parents, so
/// inference does not retain the graph.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

  static bool active();

 private:
  bool previous_;
};

}  // namespace ctcd::nn
