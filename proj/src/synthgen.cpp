#include <hsvd/synthgen.hpp>

#include <numbers>

namespace hsvd {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

// (0, 1]
double unit_open_left(std::uint64_t bits) { return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53; }

MatrixXd orthonormalize(const MatrixXd& g) {
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(g.rows(), g.cols());
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  normalize_column_signs(q);
  return q;
}

}  // namespace

double gaussian_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const double u1 = unit_open_left(counter_bits(seed, stream, 2 * index));
  const double u2 = unit_open_left(counter_bits(seed, stream, 2 * index + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, std::uint64_t stream) {
  MatrixXd g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      g(i, j) = gaussian_at(seed, stream, static_cast<std::uint64_t>(j * rows + i));
  return g;
}

MatrixXd random_orthogonal(Eigen::Index dim, std::uint64_t seed) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be >= 1");
  return orthonormalize(gaussian_matrix(dim, dim, seed, 0));
}

MatrixXd random_orthonormal_columns(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, std::uint64_t stream) {
  if (cols < 1 || rows < cols) throw Error(ErrorKind::InvalidArgument, "need rows >= cols >= 1");
  return orthonormalize(gaussian_matrix(rows, cols, seed, stream));
}

MatrixXd matrix_with_spectrum(const SpectrumSpec& spec) {
  const Eigen::Index D = spec.d_rows, N = spec.n_cols;
  if (D < 1 || N < D) throw Error(ErrorKind::InvalidArgument, "need 1 <= D <= N");
  if (spec.sigma.size() > D) throw Error(ErrorKind::SpectrumTooLong, "spectrum longer than D");
  for (Eigen::Index j = 0; j < spec.sigma.size(); ++j) {
    if (!std::isfinite(spec.sigma(j)) || spec.sigma(j) < 0.0)
      throw Error(ErrorKind::ProfileViolation, "spectrum must be finite and non-negative");
    if (j > 0 && spec.sigma(j) > spec.sigma(j - 1))
      throw Error(ErrorKind::ProfileViolation, "spectrum must be non-increasing");
  }
  VectorXd sigma = VectorXd::Zero(D);
  sigma.head(spec.sigma.size()) = spec.sigma;

  const MatrixXd u = random_orthogonal(D, spec.seed);
  const MatrixXd v = random_orthonormal_columns(N, D, spec.seed, 1);
  return u * sigma.asDiagonal() * v.transpose();
}

VectorXd spectrum_with_tail(Eigen::Index D, Eigen::Index d, const std::optional<std::vector<double>>& head_profile,
                            double tail_sq) {
  if (!(tail_sq >= 0.0) || !std::isfinite(tail_sq)) throw Error(ErrorKind::InvalidArgument, "tail_sq must be >= 0");
  if (d < 1 || d >= D) throw Error(ErrorKind::InvalidArgument, "need 1 <= d < D");

  VectorXd sigma(D);
  if (head_profile) {
    if (static_cast<Eigen::Index>(head_profile->size()) != d)
      throw Error(ErrorKind::ProfileViolation, "head profile must have exactly d values");
    for (Eigen::Index j = 0; j < d; ++j) sigma(j) = (*head_profile)[static_cast<std::size_t>(j)];
  } else {
    for (Eigen::Index j = 0; j < d; ++j) sigma(j) = d == 1 ? 10.0 : 10.0 - 9.0 * double(j) / double(d - 1);
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!std::isfinite(sigma(j)) || sigma(j) < 0.0 || (j > 0 && sigma(j) > sigma(j - 1)))
      throw Error(ErrorKind::ProfileViolation, "head profile must be finite, non-negative and non-increasing");
  }

  const double tail_value = std::sqrt(tail_sq / double(D - d));
  for (Eigen::Index j = 0; j < d; ++j) sigma(j) = std::max(sigma(j), tail_value);
  sigma.tail(D - d).setConstant(tail_value);
  return sigma;
}

}  // namespace hsvd
