#pragma once

// Test matrices A = U diag(sigma) V^T with a prescribed spectrum.

#include <hsvd/matrix_core.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace hsvd {

struct SpectrumSpec {
  Eigen::Index d_rows = 1;  ///< D
  Eigen::Index n_cols = 1;  ///< N, must be >= D
  VectorXd sigma;           ///< non-increasing, non-negative, length <= D (zero padded)
  std::uint64_t seed = 0;
};

/// Standard normal draw number `index` of stream (seed, stream).
///
/// Counter-based: each value depends only on its coordinates, so any subset
/// can be generated in any order or thread and still match.
double gaussian_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, std::uint64_t stream);

/// Haar-distributed orthogonal matrix, column signs normalized.
MatrixXd random_orthogonal(Eigen::Index dim, std::uint64_t seed);

/// rows x cols matrix with orthonormal columns (rows >= cols) drawn from `stream`.
MatrixXd random_orthonormal_columns(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, std::uint64_t stream);

MatrixXd matrix_with_spectrum(const SpectrumSpec& spec);

/// d head values (default: linear from 10 down to 1) followed by D - d equal
/// values sqrt(tail_sq / (D - d)). Head values below the tail value are
/// raised to it.
VectorXd spectrum_with_tail(Eigen::Index D, Eigen::Index d, const std::optional<std::vector<double>>& head_profile,
                            double tail_sq);

}  // namespace hsvd
