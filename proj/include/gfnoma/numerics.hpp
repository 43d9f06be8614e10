#pragma once

#include <utility>

#include "gfnoma/types.hpp"

namespace gfnoma {

namespace detail {

/// LDLT of a Hermitian Gram matrix with a pivot-ratio rank check.
/// `scale_floor` supplies an external magnitude reference for cases where
/// the whole Gram matrix may be roundoff residue (block_pinv's U block).
template <typename Mat>
Eigen::LDLT<Mat> gram_ldlt(const Mat& gram, const char* who, double scale_floor = 0.0) {
  Eigen::LDLT<Mat> ldlt(gram);
  const Eigen::VectorXd d = ldlt.vectorD().real();
  const double dmax = d.maxCoeff();
  const double dmin = d.minCoeff();
  const double scale = std::max(dmax, scale_floor);
  if (!(dmax > 0.0) || dmin <= scale * tol::rank_ratio) {
    throw RankError(std::string(who) + ": Gram matrix is numerically rank deficient");
  }
  return ldlt;
}

}  // namespace detail

/// Moore-Penrose inverse of a full-column-rank matrix,
/// A+ = (A^H A)^-1 A^H, computed through an LDLT factorization of the
/// Gram matrix rather than an explicit inverse.
///
/// Throws RankError when the Gram pivot ratio falls below tol::rank_ratio
/// (or when cols > rows, which cannot have full column rank).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
pinv_full_col(const Eigen::MatrixBase<Derived>& a_expr) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat a = a_expr;
  if (a.cols() == 0) return Mat(0, a.rows());
  if (a.cols() > a.rows()) {
    throw RankError("pinv_full_col: more columns than rows");
  }
  const Mat gram = a.adjoint() * a;
  auto ldlt = detail::gram_ldlt(gram, "pinv_full_col");
  Mat result = ldlt.solve(a.adjoint());
  if (!result.allFinite()) {
    throw RankError("pinv_full_col: non-finite result");
  }
  return result;
}

template <typename Scalar>
struct BlockPinv {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> top;     // A+ - F
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> bottom;  // W^H
};

/// Pseudo-inverse of the block matrix [A B] with full column rank,
/// returned as its two row blocks:
///   U = B - A A+ B,  W = U (U^H U)^-1,  F = A+ B W^H,
///   pinv([A B]) = [A+ - F; W^H].
/// Stacking top over bottom equals pinv_full_col of the concatenation.
template <typename DerivedA, typename DerivedB>
BlockPinv<typename DerivedA::Scalar> block_pinv(const Eigen::MatrixBase<DerivedA>& a_expr,
                                                const Eigen::MatrixBase<DerivedB>& b_expr) {
  using Mat = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat a = a_expr;
  const Mat b = b_expr;
  if (a.rows() != b.rows()) {
    throw DimensionError("block_pinv: row count mismatch");
  }
  if (b.cols() == 0) return {pinv_full_col(a), Mat(0, a.rows())};
  if (a.cols() == 0) return {Mat(0, a.rows()), pinv_full_col(b)};
  const Mat a_pinv = pinv_full_col(a);
  const Mat u = b - a * (a_pinv * b);
  // Columns of B inside span(A) leave U with no energy relative to B.
  const Mat gram_u = u.adjoint() * u;
  const double b_scale = b.colwise().squaredNorm().real().maxCoeff();
  auto ldlt = detail::gram_ldlt(gram_u, "block_pinv", b_scale);
  Mat w_h = ldlt.solve(u.adjoint());  // (U^H U)^-1 U^H = W^H
  Mat f = a_pinv * b * w_h;
  return {a_pinv - f, std::move(w_h)};
}

/// Diagonally loaded Hermitian solve, (R + eps I)^-1 a, unnormalized.
/// R must be Hermitian (positive semidefinite in intended use); callers
/// apply any unit-gain normalization themselves.
template <typename DerivedR, typename DerivedA>
Eigen::Vector<typename DerivedR::Scalar, Eigen::Dynamic>
loaded_solve(const Eigen::MatrixBase<DerivedR>& r_expr, double epsilon,
             const Eigen::MatrixBase<DerivedA>& a_expr) {
  using Mat = Eigen::Matrix<typename DerivedR::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Vector<typename DerivedR::Scalar, Eigen::Dynamic>;
  const Mat r = r_expr;
  const Vec a = a_expr;
  if (r.rows() != r.cols() || r.rows() != a.size()) {
    throw DimensionError("loaded_solve: dimension mismatch");
  }
  if (epsilon < 0.0) {
    throw ContractError("loaded_solve: negative loading");
  }
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  if ((r - r.adjoint()).cwiseAbs().maxCoeff() > tol::hermitian * scale) {
    throw ContractError("loaded_solve: input is not Hermitian");
  }
  Mat loaded = r;
  loaded.diagonal().array() += epsilon;
  auto ldlt = detail::gram_ldlt(loaded, "loaded_solve");
  return ldlt.solve(a);
}

/// Column-stacking vectorization.
template <typename Derived>
Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic>
vec(const Eigen::MatrixBase<Derived>& x_expr) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic>;
  const Mat x = x_expr;
  return Eigen::Map<const Vec>(x.data(), x.size());
}

/// Inverse of vec: reshape into a matrix with `rows` rows.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
unvec(const Eigen::MatrixBase<Derived>& c_expr, Eigen::Index rows) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic>;
  const Vec c = c_expr;
  if (rows <= 0 || c.size() % rows != 0) {
    throw DimensionError("unvec: length not divisible by row count");
  }
  return Eigen::Map<const Mat>(c.data(), rows, c.size() / rows);
}

/// (I_K (x) b)^H Y without materializing the Kronecker product: applies
/// b^H to each of the K stacked M-row blocks of Y. Y may be any MK-row
/// matrix (a received frame, or a stacked channel matrix).
template <typename DerivedY, typename DerivedB>
Eigen::Matrix<typename DerivedY::Scalar, Eigen::Dynamic, Eigen::Dynamic>
combine_kron(const Eigen::MatrixBase<DerivedY>& y_expr,
             const Eigen::MatrixBase<DerivedB>& b_expr, Eigen::Index blocks) {
  using Mat = Eigen::Matrix<typename DerivedY::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Vector<typename DerivedY::Scalar, Eigen::Dynamic>;
  const Mat y = y_expr;
  const Vec b = b_expr;
  if (blocks <= 0 || y.rows() % blocks != 0) {
    throw DimensionError("combine_kron: rows not divisible by block count");
  }
  const Eigen::Index m = y.rows() / blocks;
  if (b.size() != m) {
    throw DimensionError("combine_kron: weight length does not match block height");
  }
  Mat out(blocks, y.cols());
  for (Eigen::Index k = 0; k < blocks; ++k) {
    out.row(k) = b.adjoint() * y.middleRows(k * m, m);
  }
  return out;
}

}  // namespace gfnoma
