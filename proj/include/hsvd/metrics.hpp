#pragma once

// Accuracy metrics against a reference SVD and the theoretical error bounds
// of the hierarchical merge.

#include <hsvd/matrix_core.hpp>
#include <hsvd/merge_engine.hpp>

#include <cmath>
#include <numbers>
#include <ostream>
#include <string_view>
#include <vector>

namespace hsvd {

/// Relative gap below which per-vector errors are not meaningful.
inline constexpr double kVectorGapTolerance = 1e-6;

/// Round-off allowance added to every theoretical bound, relative to ||A||_F.
inline constexpr double kBoundSlack = 1e-10;

/// max_{i<k} |test_i - ref_i| / ref_i
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar compare_sigma(const Eigen::MatrixBase<DerivedA>& test, const Eigen::MatrixBase<DerivedB>& ref,
                                        Eigen::Index k) {
  using Scalar = typename DerivedA::Scalar;
  if (k < 0 || test.size() < k || ref.size() < k) throw Error(ErrorKind::ShapeMismatch, "fewer than k singular values");
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(ref(i) > Scalar(0))) throw Error(ErrorKind::ZeroReference, "reference singular value is zero");
    worst = std::max(worst, std::abs(test(i) - ref(i)) / ref(i));
  }
  return worst;
}

/// Principal angles (ascending, radians) between the column spans of two
/// orthonormal bases of equal width.
///
/// Small angles come from the sines, large ones from the cosines, so angles
/// near zero keep full relative accuracy.
template <std::floating_point Scalar>
Vector<Scalar> principal_angles(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorKind::ShapeMismatch, "bases differ in shape");
  const Eigen::Index k = a.cols();
  if (k == 0) return {};
  const Matrix<Scalar> c = a.transpose() * b;
  const Matrix<Scalar> residual = b - a * c;
  const Vector<Scalar> cosines = Eigen::JacobiSVD<Matrix<Scalar>>(c).singularValues();
  const Vector<Scalar> sines_desc = Eigen::JacobiSVD<Matrix<Scalar>>(residual).singularValues();

  Vector<Scalar> angles(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Scalar cosine = std::clamp(cosines(i), Scalar(0), Scalar(1));
    const Scalar sine = std::clamp(sines_desc(k - 1 - i), Scalar(0), Scalar(1));
    angles(i) = cosine * cosine >= Scalar(0.5) ? std::asin(sine) : std::acos(cosine);
  }
  return angles;
}

template <std::floating_point Scalar>
struct VectorComparison {
  Scalar e_vec = 0;              ///< max_i min_{s=+-1} ||s test_i - ref_i||_2
  Vector<Scalar> angles;         ///< principal angles of the k-dim spans
};

template <std::floating_point Scalar>
VectorComparison<Scalar> compare_vectors(const Matrix<Scalar>& test_u, const Matrix<Scalar>& ref_u, Eigen::Index k) {
  if (test_u.rows() != ref_u.rows() || test_u.cols() < k || ref_u.cols() < k || k < 0)
    throw Error(ErrorKind::ShapeMismatch, "left factors differ in rows or have fewer than k columns");
  VectorComparison<Scalar> out;
  for (Eigen::Index i = 0; i < k; ++i) {
    const Scalar same = (test_u.col(i) - ref_u.col(i)).norm();
    const Scalar flipped = (test_u.col(i) + ref_u.col(i)).norm();
    out.e_vec = std::max(out.e_vec, std::min(same, flipped));
  }
  out.angles = principal_angles<Scalar>(ref_u.leftCols(k), test_u.leftCols(k));
  return out;
}

/// True when every compared index i < k has relative gaps above
/// kVectorGapTolerance to its neighbours, so e_vec is well defined.
template <std::floating_point Scalar>
bool simple_spectrum(const Vector<Scalar>& ref_sigma, Eigen::Index k) {
  const Scalar scale = ref_sigma.size() ? ref_sigma(0) : Scalar(0);
  if (!(scale > Scalar(0))) return false;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (i + 1 < ref_sigma.size() &&
        ref_sigma(i) - ref_sigma(i + 1) <= static_cast<Scalar>(kVectorGapTolerance) * scale)
      return false;
  }
  return true;
}

/// ((1 + sqrt 2)^(q+1) - 1) * tail: error of a q-level merge against A.
inline double theorem_bound(int q, double tail) {
  if (q < 1 || !(tail >= 0.0)) throw Error(ErrorKind::InvalidArgument, "need q >= 1 and tail >= 0");
  return (std::pow(1.0 + std::numbers::sqrt2, q + 1) - 1.0) * tail;
}

/// 3 sqrt 2 * tail + (1 + sqrt 2) * ||Psi||_F: one merge with a perturbed proxy.
inline double one_level_bound(double tail, double psi_norm) {
  return 3.0 * std::numbers::sqrt2 * tail + (1.0 + std::numbers::sqrt2) * psi_norm;
}

/// 3 * tail: ||(B)_d - A||_F for B the blockwise rank-d approximation.
inline double block_merge_bound(double tail) { return 3.0 * tail; }

/// Largest ||E||_F for which a contaminated block keeps the sqrt 2 * tail error bound.
inline double noise_budget(Eigen::Index D, Eigen::Index d, double block_tail) {
  if (d < 0 || d > D) throw Error(ErrorKind::InvalidArgument, "need 0 <= d <= D");
  return (std::numbers::sqrt2 - 1.0) / (std::sqrt(double(D - d)) + 1.0) * block_tail;
}

inline double noise_bound(double block_tail) { return std::numbers::sqrt2 * block_tail; }

template <std::floating_point Scalar>
struct ProcrustesFit {
  Matrix<Scalar> w;  ///< orthogonal, ref.cols() x ref.cols()
  Scalar residual = 0;
};

/// argmin over orthogonal W of ||x - ref W||_F; x is zero-padded to ref's width.
template <std::floating_point Scalar>
ProcrustesFit<Scalar> procrustes(const Matrix<Scalar>& x, const Matrix<Scalar>& ref) {
  if (x.rows() != ref.rows() || x.cols() > ref.cols())
    throw Error(ErrorKind::ShapeMismatch, "procrustes operands are incompatible");
  Matrix<Scalar> padded = Matrix<Scalar>::Zero(ref.rows(), ref.cols());
  padded.leftCols(x.cols()) = x;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(ref.transpose() * padded, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesFit<Scalar> fit;
  fit.w = svd.matrixU() * svd.matrixV().transpose();
  fit.residual = (padded - ref * fit.w).norm();
  return fit;
}

/// Procrustes distance between scaled_left(test) and the first d columns of A V_A.
///
/// The reference is passed as its own SVD so that many runs against one A
/// share a single direct factorization. A V_A = U_A diag(sigma_A).
template <std::floating_point Scalar>
Scalar aligned_residual(const PartialSVD<Scalar>& test, const SVDFactors<Scalar>& reference, Eigen::Index d) {
  if (test.factors.rows() != reference.rows()) throw Error(ErrorKind::ShapeMismatch, "row counts differ");
  const Matrix<Scalar> ref_scaled = scaled_left(truncate(reference, d));
  Matrix<Scalar> x = scaled_left(test.factors);
  if (x.cols() > ref_scaled.cols()) x.conservativeResize(Eigen::NoChange, ref_scaled.cols());
  return procrustes<Scalar>(x, ref_scaled).residual;
}

template <std::floating_point Scalar>
Scalar aligned_residual(const PartialSVD<Scalar>& test, const Matrix<Scalar>& ref_a, Eigen::Index d) {
  return aligned_residual(test, svd_reduced(ref_a, std::nullopt, false), d);
}

struct ComparisonReport {
  Eigen::Index k = 0;
  double e_sigma = 0.0;
  double e_vec = 0.0;
  bool vectors_well_separated = true;
  std::vector<double> principal_angles;
  double procrustes_residual = 0.0;
  double bound_value = 0.0;
  bool bound_satisfied = true;

  double max_angle() const {
    double m = 0.0;
    for (double a : principal_angles) m = std::max(m, a);
    return m;
  }
};

/// Compares a merge result with a direct reference SVD over the leading k
/// triplets. A non-negative `tail` adds the q-level bound check; q = 0 means a
/// direct truncated SVD, whose bound is zero.
inline ComparisonReport compare(const PartialSVDd& test, const SVDFactorsd& reference, Eigen::Index k, int q,
                                double tail = -1.0) {
  ComparisonReport r;
  r.k = k;
  r.e_sigma = compare_sigma(test.factors.sigma, reference.sigma, k);
  const auto vec = compare_vectors<double>(test.factors.u, reference.u, k);
  r.e_vec = vec.e_vec;
  r.vectors_well_separated = simple_spectrum<double>(reference.sigma, k);
  r.principal_angles.assign(vec.angles.data(), vec.angles.data() + vec.angles.size());
  r.procrustes_residual = aligned_residual(test, reference, k);
  if (tail >= 0.0) {
    r.bound_value = q >= 1 ? theorem_bound(q, tail) : 0.0;
    r.bound_satisfied = r.procrustes_residual <= r.bound_value + kBoundSlack * reference.sigma.norm();
  }
  return r;
}

inline std::string_view comparison_csv_header() {
  return "k,e_sigma,e_vec,vectors_well_separated,max_principal_angle,procrustes_residual,bound_value,bound_satisfied";
}

void write_comparison_row(std::ostream& out, const ComparisonReport& r);

}  // namespace hsvd
