#include "ctcd/nn/tensor.hpp"

#include <unordered_set>

#include "ctcd/common/error.hpp"

namespace ctcd::nn {

namespace {
thread_local bool g_no_grad = false;
}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_no_grad) { g_no_grad = true; }
NoGradGuard::~NoGradGuard() { g_no_grad = previous_; }
bool NoGradGuard::active() { return g_no_grad; }

Tensor Tensor::constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Tensor(std::move(n));
}

Tensor Tensor::parameter(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Tensor(std::move(n));
}

Tensor Tensor::make(Matrix value, std::vector<Tensor> parents,
                    std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (g_no_grad) return Tensor(std::move(n));
  for (auto& p : parents) {
    if (p.requires_grad()) n->requires_grad = true;
    n->parents.push_back(p.node_);
  }
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  return Tensor(std::move(n));
}

void Tensor::backward() const {
  if (!node_) throw InputError("backward on an undefined tensor");
  if (node_->value.size() != 1) throw InputError("backward requires a scalar tensor");
  if (!node_->requires_grad) return;

  // iterative post-order DFS gives a topological order
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, i] = stack.back();
    if (i < n->parents.size()) {
      Node* p = n->parents[i++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->grad = Matrix::Ones(1, 1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad.size() != 0) n->backward_fn(*n);
  }
  // interior gradients are not needed after the pass
  for (Node* n : order)
    if (n->backward_fn) n->grad.resize(0, 0);
}

}  // namespace ctcd::nn
