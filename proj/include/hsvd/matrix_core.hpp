#pragma once

// Dense real matrices, the reduced SVD with a deterministic sign convention,
// rank-d truncation and Frobenius-tail helpers.

#include <hsvd/error.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <optional>
#include <string>

namespace hsvd {

template <std::floating_point Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

template <std::floating_point Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

/// Relative pivot threshold for the sign convention: the first entry with
/// |x| > kSignTolerance * ||column||_inf decides the column sign.
inline constexpr double kSignTolerance = 1e-12;

/// sigma_j counts toward the numerical rank when sigma_j > kRankTolerance * sigma_1.
inline constexpr double kRankTolerance = 1e-12;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().array().isFinite().all();
}

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, const char* what) {
  if (!all_finite(m)) throw Error(ErrorKind::NonFinite, std::string(what) + " contains NaN or Inf");
}

template <typename Derived>
void require_nonempty(const Eigen::DenseBase<Derived>& m, const char* what) {
  if (m.rows() == 0 || m.cols() == 0) throw Error(ErrorKind::Empty, std::string(what) + " has a zero dimension");
}

/// Reduced SVD factors u * diag(sigma) * v^T with sigma non-increasing.
template <std::floating_point Scalar>
struct SVDFactors {
  Matrix<Scalar> u;
  Vector<Scalar> sigma;
  std::optional<Matrix<Scalar>> v;
  /// Numerical rank: number of sigma_j > kRankTolerance * sigma_1.
  Eigen::Index rank_hint = 0;

  Eigen::Index rank() const { return sigma.size(); }
  Eigen::Index rows() const { return u.rows(); }
};

using SVDFactorsd = SVDFactors<double>;

template <std::floating_point Scalar>
Eigen::Index numerical_rank(const Vector<Scalar>& sigma) {
  if (sigma.size() == 0 || !(sigma(0) > Scalar(0))) return 0;
  const Scalar cut = static_cast<Scalar>(kRankTolerance) * sigma(0);
  return static_cast<Eigen::Index>((sigma.array() > cut).count());
}

/// Index of the sign pivot of a column, or -1 for an all-zero column.
template <typename Derived>
Eigen::Index sign_pivot(const Eigen::MatrixBase<Derived>& column) {
  using Scalar = typename Derived::Scalar;
  const Scalar inf_norm = column.cwiseAbs().maxCoeff();
  if (!(inf_norm > Scalar(0))) return -1;
  const Scalar cut = static_cast<Scalar>(kSignTolerance) * inf_norm;
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    if (std::abs(column(i)) > cut) return i;
  }
  return -1;
}

/// Flips (u_j, v_j) pairs so that the sign pivot of every u_j is positive.
template <std::floating_point Scalar>
void normalize_signs(SVDFactors<Scalar>& f) {
  for (Eigen::Index j = 0; j < f.u.cols(); ++j) {
    const Eigen::Index p = sign_pivot(f.u.col(j));
    if (p >= 0 && f.u(p, j) < Scalar(0)) {
      f.u.col(j) *= Scalar(-1);
      if (f.v) f.v->col(j) *= Scalar(-1);
    }
  }
}

/// Column-wise version of the sign rule for a bare orthonormal basis.
template <std::floating_point Scalar>
void normalize_column_signs(Matrix<Scalar>& q) {
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const Eigen::Index p = sign_pivot(q.col(j));
    if (p >= 0 && q(p, j) < Scalar(0)) q.col(j) *= Scalar(-1);
  }
}

/// Reduced SVD of `a` keeping r = min(D, N, max_rank) triplets.
///
/// All SVDs in the library go through this function. The kernel is Eigen's
/// two-sided Jacobi SVD with column-pivoting QR preconditioning, which is
/// single-threaded and deterministic for a given input. `want_v = false`
/// skips the right factor, which is all the merge tree needs.
template <typename Derived>
SVDFactors<typename Derived::Scalar> svd_reduced(const Eigen::MatrixBase<Derived>& a,
                                                 std::optional<Eigen::Index> max_rank = std::nullopt,
                                                 bool want_v = true) {
  using Scalar = typename Derived::Scalar;
  require_nonempty(a, "svd input");
  require_finite(a, "svd input");
  const Eigen::Index full = std::min(a.rows(), a.cols());
  Eigen::Index r = full;
  if (max_rank) {
    if (*max_rank < 1 || *max_rank > full)
      throw Error(ErrorKind::InvalidArgument, "max_rank must lie in [1, min(rows, cols)]");
    r = *max_rank;
  }

  const unsigned options = Eigen::ComputeThinU | (want_v ? unsigned(Eigen::ComputeThinV) : 0u);
  Eigen::JacobiSVD<Matrix<Scalar>, Eigen::ColPivHouseholderQRPreconditioner> svd(a.derived().eval(), options);
  if (svd.info() != Eigen::Success || !all_finite(svd.singularValues()) || !all_finite(svd.matrixU()))
    throw Error(ErrorKind::ConvergenceFailure, "dense SVD kernel did not converge");

  SVDFactors<Scalar> f;
  f.u = svd.matrixU().leftCols(r);
  f.sigma = svd.singularValues().head(r);
  if (want_v) f.v = svd.matrixV().leftCols(r);
  f.rank_hint = numerical_rank(f.sigma);
  normalize_signs(f);
  return f;
}

/// Keeps the leading min(d, r) triplets; (A)_d in factored form.
template <std::floating_point Scalar>
SVDFactors<Scalar> truncate(const SVDFactors<Scalar>& f, Eigen::Index d) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "truncation rank must be >= 1");
  const Eigen::Index k = std::min(d, f.rank());
  SVDFactors<Scalar> out;
  out.u = f.u.leftCols(k);
  out.sigma = f.sigma.head(k);
  if (f.v) out.v = f.v->leftCols(k);
  out.rank_hint = std::min(f.rank_hint, k);
  return out;
}

/// sqrt(sum_{j >= d} sigma_j^2) over zero-based indices, i.e. ||(A)_d - A||_F.
template <typename Derived>
typename Derived::Scalar frobenius_tail(const Eigen::MatrixBase<Derived>& sigma, Eigen::Index d) {
  using Scalar = typename Derived::Scalar;
  if ((sigma.array() < Scalar(0)).any()) throw Error(ErrorKind::NegativeSigma, "singular values must be non-negative");
  if (d < 0) throw Error(ErrorKind::InvalidArgument, "tail index must be >= 0");
  if (d >= sigma.size()) return Scalar(0);
  return sigma.tail(sigma.size() - d).norm();
}

/// u * diag(sigma), which equals A * v.
template <std::floating_point Scalar>
Matrix<Scalar> scaled_left(const SVDFactors<Scalar>& f) {
  return f.u * f.sigma.asDiagonal();
}

/// u * diag(sigma) * v^T; requires v.
template <std::floating_point Scalar>
Matrix<Scalar> reconstruct(const SVDFactors<Scalar>& f) {
  if (!f.v) throw Error(ErrorKind::InvalidArgument, "reconstruct needs right singular vectors");
  return f.u * f.sigma.asDiagonal() * f.v->transpose();
}

}  // namespace hsvd
