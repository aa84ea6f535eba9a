#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace ctcd {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

/// Mean of |x_k|^2.
inline double mean_power(std::span<const cplx> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(v);
  return acc / static_cast<double>(x.size());
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace ctcd
