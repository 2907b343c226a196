#include <hsvd/matrix_core.hpp>
#include <hsvd/synthgen.hpp>

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace hsvd;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::InvalidArgument;
}

bool same_bits(const MatrixXd& a, const MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

VectorXd singular_values(const MatrixXd& a) { return Eigen::JacobiSVD<MatrixXd>(a).singularValues(); }

}  // namespace

TEST_CASE("gaussian draws are addressable and roughly standard") {
  const MatrixXd g = gaussian_matrix(50, 40, 17, 3);
  CHECK(g(7, 11) == gaussian_at(17, 3, 11 * 50 + 7));
  CHECK(same_bits(g, gaussian_matrix(50, 40, 17, 3)));
  CHECK(!same_bits(g, gaussian_matrix(50, 40, 17, 4)));
  CHECK(!same_bits(g, gaussian_matrix(50, 40, 18, 3)));
  const double mean = g.mean();
  const double var = (g.array() - mean).square().sum() / double(g.size() - 1);
  CHECK(std::abs(mean) < 0.1);
  CHECK(std::abs(var - 1.0) < 0.1);
}

TEST_CASE("random orthogonal matrices") {
  const MatrixXd one = random_orthogonal(1, 5);
  CHECK(one(0, 0) == 1.0);
  const MatrixXd q = random_orthogonal(50, 5);
  CHECK((q.transpose() * q - MatrixXd::Identity(50, 50)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(same_bits(q, random_orthogonal(50, 5)));
  for (Eigen::Index j = 0; j < q.cols(); ++j) CHECK(q(sign_pivot(q.col(j)), j) > 0.0);
  CHECK(kind_of([] { random_orthogonal(0, 1); }) == ErrorKind::InvalidArgument);

  const MatrixXd v = random_orthonormal_columns(30, 6, 2, 1);
  CHECK((v.transpose() * v - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(kind_of([] { random_orthonormal_columns(3, 6, 2, 1); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("prescribed spectra") {
  VectorXd e1 = VectorXd::Zero(4);
  e1(0) = 1;
  const MatrixXd r1 = matrix_with_spectrum({4, 9, e1, 3});
  CHECK(r1.norm() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(singular_values(r1)(1) <= 1e-14);

  const MatrixXd orth = matrix_with_spectrum({5, 5, VectorXd::Ones(5), 8});
  CHECK((orth.transpose() * orth - MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-12);

  const VectorXd s = VectorXd::LinSpaced(12, 6, 0.5);
  const MatrixXd a = matrix_with_spectrum({12, 70, s, 4});
  CHECK(((singular_values(a) - s).array() / s.array()).abs().maxCoeff() <= 1e-10);
  CHECK(a.squaredNorm() == doctest::Approx(s.squaredNorm()).epsilon(1e-10));
  CHECK(same_bits(a, matrix_with_spectrum({12, 70, s, 4})));

  // shorter spectra are zero padded
  const MatrixXd padded = matrix_with_spectrum({6, 10, VectorXd::Constant(2, 3.0), 1});
  CHECK(singular_values(padded)(2) <= 1e-14);
}

TEST_CASE("spectrum validation") {
  CHECK(kind_of([] { matrix_with_spectrum({3, 5, VectorXd::Ones(4), 1}); }) == ErrorKind::SpectrumTooLong);
  CHECK(kind_of([] { matrix_with_spectrum({3, 5, (VectorXd(2) << 1, 2).finished(), 1}); }) ==
        ErrorKind::ProfileViolation);
  CHECK(kind_of([] { matrix_with_spectrum({3, 5, (VectorXd(2) << 1, -1).finished(), 1}); }) ==
        ErrorKind::ProfileViolation);
  CHECK(kind_of([] { matrix_with_spectrum({5, 3, VectorXd::Ones(2), 1}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("spectra with a controlled tail") {
  const VectorXd exact = spectrum_with_tail(6, 3, std::nullopt, 0.0);
  CHECK(exact.head(3) == (VectorXd(3) << 10, 5.5, 1).finished());
  CHECK(exact.tail(3).isZero(0));

  const VectorXd t = spectrum_with_tail(4, 2, std::nullopt, 0.02);
  CHECK(t(2) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(t(3) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(frobenius_tail(t, 2) * frobenius_tail(t, 2) == doctest::Approx(0.02).epsilon(1e-14));

  const VectorXd clamped = spectrum_with_tail(4, 2, std::vector<double>{3.0, 0.01}, 2.0);
  CHECK(clamped(1) == clamped(2));
  for (Eigen::Index j = 1; j < 4; ++j) CHECK(clamped(j) <= clamped(j - 1));

  CHECK(kind_of([] { spectrum_with_tail(4, 2, std::vector<double>{1.0, 2.0}, 0.1); }) == ErrorKind::ProfileViolation);
  CHECK(kind_of([] { spectrum_with_tail(4, 2, std::vector<double>{1.0}, 0.1); }) == ErrorKind::ProfileViolation);
  CHECK(kind_of([] { spectrum_with_tail(4, 4, std::nullopt, 0.1); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { spectrum_with_tail(4, 2, std::nullopt, -1.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("generated tail matches a full SVD") {
  for (double tail_sq : {0.1, 0.01}) {
    const MatrixXd a = matrix_with_spectrum({40, 1280, spectrum_with_tail(40, 8, std::nullopt, tail_sq), 7});
    const double measured = frobenius_tail(singular_values(a), 8);
    CHECK(std::abs(measured * measured - tail_sq) <= 1e-8);
  }
}
