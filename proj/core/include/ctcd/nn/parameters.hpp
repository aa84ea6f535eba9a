#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ctcd/common/random.hpp"
#include "ctcd/nn/tensor.hpp"

namespace ctcd::nn {

/// Ordered collection of named trainable tensors. Insertion order is the
/// serialization order.
class ParameterSet {
 public:
  using Entry = std::pair<std::string, Tensor>;

  /// Registers a new parameter; throws InputError on a duplicate name.
  Tensor add(const std::string& name, Matrix init);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t num_scalars() const;

  void zero_grad();

  /// Deep copy: the clone shares no nodes with this set.
  ParameterSet clone() const;

  /// Overwrites values from `other`, which must have the same names and shapes.
  void assign(const ParameterSet& other);

  /// Bit-exact comparison of names, shapes and values.
  bool identical(const ParameterSet& other) const;

 private:
  std::vector<Entry> entries_;
};

/// Gaussian initialization with standard deviation `scale / sqrt(fan_in)`.
Matrix init_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0);

}  // namespace ctcd::nn
