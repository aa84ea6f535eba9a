#include "ctcd/nn/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ctcd/common/error.hpp"

namespace ctcd::nn {

Tensor ParameterSet::add(const std::string& name, Matrix init) {
  if (contains(name)) throw InputError("duplicate parameter name: " + name);
  entries_.emplace_back(name, Tensor::parameter(std::move(init)));
  return entries_.back().second;
}

const Tensor& ParameterSet::get(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  throw InputError("unknown parameter: " + name);
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.first == name; });
}

std::size_t ParameterSet::num_scalars() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += static_cast<std::size_t>(e.second.value().size());
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

ParameterSet ParameterSet::clone() const {
  ParameterSet out;
  for (const auto& [n, t] : entries_) out.add(n, t.value());
  return out;
}

void ParameterSet::assign(const ParameterSet& other) {
  if (other.size() != size()) throw InputError("parameter sets differ in size");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& [n, t] = other.entries_[i];
    if (n != entries_[i].first || t.rows() != entries_[i].second.rows() || t.cols() != entries_[i].second.cols())
      throw InputError("parameter mismatch at " + entries_[i].first);
    entries_[i].second.mutable_value() = t.value();
  }
}

bool ParameterSet::identical(const ParameterSet& other) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.first != b.first || a.second.rows() != b.second.rows() || a.second.cols() != b.second.cols())
      return false;
    const auto bytes = static_cast<std::size_t>(a.second.value().size()) * sizeof(double);
    if (bytes && std::memcmp(a.second.value().data(), b.second.value().data(), bytes) != 0) return false;
  }
  return true;
}

Matrix init_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  const double sd = scale / std::sqrt(static_cast<double>(rows));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sd * rng.normal();
  return m;
}

}  // namespace ctcd::nn
