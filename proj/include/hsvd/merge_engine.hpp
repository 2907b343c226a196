#pragma once

// q-level hierarchical merge of block-wise partial SVDs.
//
// Level 1 computes the rank-d truncated SVD of every column block. Each later
// level concatenates the scaled left factors U*Sigma of n consecutive
// siblings into a proxy matrix and replaces the group by the rank-d SVD of
// that proxy. The root after the last level carries approximations of the
// leading d singular values and left singular vectors of A; it is exact
// whenever rank(A) <= d.

#include <hsvd/block_store.hpp>
#include <hsvd/matrix_core.hpp>
#include <hsvd/parallel.hpp>

#include <string>
#include <vector>

namespace hsvd {

struct MergePlan {
  int q = 0;               ///< merge levels
  int n = 2;               ///< children per merge
  Eigen::Index d = 1;      ///< target rank
  Eigen::Index m = 1;      ///< leaf blocks
};

/// Smallest L with n^L >= m.
inline int levels_needed(Eigen::Index m, int n) {
  int levels = 0;
  for (Eigen::Index covered = 1; covered < m; covered *= n) ++levels;
  return levels;
}

/// Checks the plan against a block count; returns the number of merge levels
/// that will actually run (q collapses to ceil(log_n m) when larger).
inline int effective_levels(const MergePlan& plan, Eigen::Index block_count) {
  if (plan.n < 2) throw Error(ErrorKind::PlanMismatch, "group size n must be >= 2");
  if (plan.d < 1) throw Error(ErrorKind::PlanMismatch, "target rank d must be >= 1");
  if (plan.q < 0) throw Error(ErrorKind::PlanMismatch, "level count q must be >= 0");
  if (plan.m != block_count)
    throw Error(ErrorKind::PlanMismatch,
                "plan expects " + std::to_string(plan.m) + " blocks, got " + std::to_string(block_count));
  const int needed = levels_needed(plan.m, plan.n);
  if (plan.q < needed)
    throw Error(ErrorKind::PlanMismatch, std::to_string(plan.m) + " blocks cannot be reduced in " +
                                             std::to_string(plan.q) + " levels of size " + std::to_string(plan.n));
  return needed;
}

/// Columns [first, first + width) of the original A.
struct ColumnSpan {
  Eigen::Index first = 0;
  Eigen::Index width = 0;
  Eigen::Index end() const { return first + width; }
  bool operator==(const ColumnSpan&) const = default;
};

template <std::floating_point Scalar>
struct PartialSVD {
  SVDFactors<Scalar> factors;  ///< v is never populated
  ColumnSpan source;
};

using PartialSVDd = PartialSVD<double>;

/// Rank-d partial SVD of a single block: the leaf of the merge tree.
template <typename Derived>
PartialSVD<typename Derived::Scalar> leaf_svd(const Eigen::MatrixBase<Derived>& block, Eigen::Index d,
                                              ColumnSpan source) {
  return {truncate(svd_reduced(block, std::nullopt, false), d), source};
}

/// The proxy [ (U^1 S^1)_d | ... | (U^k S^k)_d ] of a sibling group.
template <std::floating_point Scalar>
Matrix<Scalar> proxy_matrix(const std::vector<PartialSVD<Scalar>>& parts, Eigen::Index d) {
  if (parts.empty()) throw Error(ErrorKind::InvalidArgument, "merge group is empty");
  const Eigen::Index rows = parts.front().factors.rows();
  Eigen::Index cols = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& p = parts[k];
    if (p.factors.rows() != rows) throw Error(ErrorKind::RowMismatch, "merge parts differ in row count");
    if (k > 0 && p.source.first != parts[k - 1].source.end())
      throw Error(ErrorKind::InvalidArgument, "merge parts must cover consecutive column spans");
    cols += std::min(d, p.factors.rank());
  }
  Matrix<Scalar> proxy(rows, cols);
  Eigen::Index col = 0;
  for (const auto& p : parts) {
    const Eigen::Index k = std::min(d, p.factors.rank());
    proxy.middleCols(col, k) = p.factors.u.leftCols(k) * p.factors.sigma.head(k).asDiagonal();
    col += k;
  }
  return proxy;
}

/// Merges consecutive siblings into one rank-d partial SVD.
template <std::floating_point Scalar>
PartialSVD<Scalar> merge_group(const std::vector<PartialSVD<Scalar>>& parts, Eigen::Index d) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "target rank d must be >= 1");
  const Matrix<Scalar> proxy = proxy_matrix(parts, d);
  ColumnSpan span{parts.front().source.first, parts.back().source.end() - parts.front().source.first};
  return {truncate(svd_reduced(proxy, std::nullopt, false), d), span};
}

/// Reduces a level of partial SVDs to the root, n siblings at a time.
///
/// Groups are consecutive; the last group at a level may be short.
template <std::floating_point Scalar>
PartialSVD<Scalar> reduce_levels(std::vector<PartialSVD<Scalar>> level, int n, Eigen::Index d, std::size_t workers) {
  if (level.empty()) throw Error(ErrorKind::InvalidArgument, "nothing to reduce");
  const auto group = static_cast<std::size_t>(n);
  while (level.size() > 1) {
    const std::size_t groups = (level.size() + group - 1) / group;
    std::vector<PartialSVD<Scalar>> next(groups);
    parallel_for(groups, workers, [&](std::size_t g) {
      const auto first = level.begin() + static_cast<std::ptrdiff_t>(g * group);
      const auto last = level.begin() + static_cast<std::ptrdiff_t>(std::min(level.size(), (g + 1) * group));
      next[g] = merge_group(std::vector<PartialSVD<Scalar>>(first, last), d);
    });
    level = std::move(next);
  }
  return std::move(level.front());
}

/// Hierarchical SVD over blocks produced by `load(i)` (i in [0, plan.m)).
///
/// `load` must be safe to call concurrently. The result is bitwise
/// independent of `workers`.
template <std::floating_point Scalar, typename Loader>
PartialSVD<Scalar> hierarchical_svd_with(Loader&& load, const std::vector<Eigen::Index>& widths,
                                         const MergePlan& plan, std::size_t workers) {
  effective_levels(plan, static_cast<Eigen::Index>(widths.size()));
  if (workers < 1) throw Error(ErrorKind::InvalidArgument, "worker count must be >= 1");

  std::vector<Eigen::Index> offsets(widths.size(), 0);
  for (std::size_t i = 1; i < widths.size(); ++i) offsets[i] = offsets[i - 1] + widths[i - 1];

  std::vector<PartialSVD<Scalar>> leaves(widths.size());
  parallel_for(widths.size(), workers, [&](std::size_t i) {
    const Matrix<Scalar> block = load(static_cast<Eigen::Index>(i));
    if (block.cols() != widths[i]) throw Error(ErrorKind::RowMismatch, "block width changed during the run");
    leaves[i] = leaf_svd(block, plan.d, ColumnSpan{offsets[i], widths[i]});
  });
  const Eigen::Index rows = leaves.front().factors.rows();
  for (const auto& leaf : leaves)
    if (leaf.factors.rows() != rows) throw Error(ErrorKind::RowMismatch, "blocks differ in row count");

  return reduce_levels(std::move(leaves), plan.n, plan.d, workers);
}

/// Hierarchical SVD of in-memory blocks [A^1 | ... | A^M].
template <std::floating_point Scalar>
PartialSVD<Scalar> hierarchical_svd(const std::vector<Matrix<Scalar>>& blocks, const MergePlan& plan,
                                    std::size_t workers = 1) {
  std::vector<Eigen::Index> widths;
  for (const auto& b : blocks) widths.push_back(b.cols());
  return hierarchical_svd_with<Scalar>([&](Eigen::Index i) { return blocks[static_cast<std::size_t>(i)]; }, widths,
                                       plan, workers);
}

/// Hierarchical SVD of a BlockSet; file-backed blocks are read one per task.
inline PartialSVDd hierarchical_svd(const BlockSet& blocks, const MergePlan& plan, std::size_t workers = 1) {
  return hierarchical_svd_with<double>([&](Eigen::Index i) { return blocks.load(i); }, blocks.widths(), plan,
                                       workers);
}

/// Right singular vectors from the root: rows of block i are (A^i)^T u_j / sigma_j.
template <std::floating_point Scalar, typename Loader>
Matrix<Scalar> recover_right_vectors_with(Loader&& load, const std::vector<Eigen::Index>& widths,
                                          const PartialSVD<Scalar>& root, std::size_t workers = 1) {
  const auto& f = root.factors;
  if (f.rank() == 0) throw Error(ErrorKind::SingularValueUnderflow, "root has no singular values");
  const Scalar cut = static_cast<Scalar>(kRankTolerance) * f.sigma(0);
  for (Eigen::Index j = 0; j < f.rank(); ++j)
    if (!(f.sigma(j) > cut) || !(f.sigma(j) > Scalar(0)))
      throw Error(ErrorKind::SingularValueUnderflow,
                  "sigma_" + std::to_string(j + 1) + " is below the rank threshold; lower d");

  std::vector<Eigen::Index> offsets(widths.size() + 1, 0);
  for (std::size_t i = 0; i < widths.size(); ++i) offsets[i + 1] = offsets[i] + widths[i];

  const Matrix<Scalar> u_scaled = f.u * f.sigma.cwiseInverse().asDiagonal();
  Matrix<Scalar> v(offsets.back(), f.rank());
  parallel_for(widths.size(), workers, [&](std::size_t i) {
    const Matrix<Scalar> block = load(static_cast<Eigen::Index>(i));
    if (block.rows() != f.rows()) throw Error(ErrorKind::RowMismatch, "block rows differ from the root's");
    v.middleRows(offsets[i], widths[i]).noalias() = block.transpose() * u_scaled;
  });
  return v;
}

template <std::floating_point Scalar>
Matrix<Scalar> recover_right_vectors(const std::vector<Matrix<Scalar>>& blocks, const PartialSVD<Scalar>& root,
                                     std::size_t workers = 1) {
  std::vector<Eigen::Index> widths;
  for (const auto& b : blocks) widths.push_back(b.cols());
  return recover_right_vectors_with<Scalar>([&](Eigen::Index i) { return blocks[static_cast<std::size_t>(i)]; },
                                            widths, root, workers);
}

inline MatrixXd recover_right_vectors(const BlockSet& blocks, const PartialSVDd& root, std::size_t workers = 1) {
  return recover_right_vectors_with<double>([&](Eigen::Index i) { return blocks.load(i); }, blocks.widths(), root,
                                            workers);
}

}  // namespace hsvd
