#pragma once

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gfnoma {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Ordered set of user (block) indices within a cluster, 0-based,
/// strictly increasing.
using BlockIndexSet = std::vector<int>;

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RankError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical tolerances used across the library. Kept in one place so no
/// module hides its own thresholds.
namespace tol {
// Gram-matrix pivot ratio (smallest/largest) below which a matrix is
// treated as rank deficient.
inline constexpr double rank_ratio = 1e-12;
// Allowed relative Hermitian deviation of a covariance input.
inline constexpr double hermitian = 1e-9;
// Beamforming unit-gain constraint |b^H abar - 1| bound.
inline constexpr double beam_constraint = 1e-10;
}  // namespace tol

inline BlockIndexSet union_sorted(const BlockIndexSet& a, const BlockIndexSet& b) {
  BlockIndexSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline BlockIndexSet difference_sorted(const BlockIndexSet& a, const BlockIndexSet& b) {
  BlockIndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline BlockIndexSet intersect_sorted(const BlockIndexSet& a, const BlockIndexSet& b) {
  BlockIndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool contains(const BlockIndexSet& s, int v) {
  return std::binary_search(s.begin(), s.end(), v);
}

}  // namespace gfnoma
