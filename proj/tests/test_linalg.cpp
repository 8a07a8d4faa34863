#include "admd/errors.hpp"
#include "admd/linalg.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace admd;
using admd::testing::random_matrix;

TEST_CASE("pinv of identity is identity") {
  const auto p = linalg::pinv_truncated(Eigen::MatrixXd::Identity(3, 3));
  CHECK(p.rank == 3);
  CHECK((p.matrix - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-15);
}

TEST_CASE("pinv drops singular values below the relative cutoff") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 1e-12;
  const auto p = linalg::pinv_truncated(a, 1e-6);
  CHECK(p.rank == 1);
  CHECK(p.matrix(0, 0) == doctest::Approx(1.0));
  CHECK(p.matrix(1, 1) == 0.0);
  CHECK(std::abs(p.matrix(0, 1)) + std::abs(p.matrix(1, 0)) == 0.0);
}

TEST_CASE("pinv of an all-zero matrix is a zero matrix of transposed shape") {
  const auto p = linalg::pinv_truncated(Eigen::MatrixXd::Zero(3, 5));
  CHECK(p.rank == 0);
  CHECK(p.matrix.rows() == 5);
  CHECK(p.matrix.cols() == 3);
  CHECK(p.matrix.isZero(0.0));
}

TEST_CASE("Moore-Penrose residual on random wide matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = random_matrix(5, 8, rng);
    const auto p = linalg::pinv_truncated(a);
    CHECK(p.rank == 5);
    CHECK((a * p.matrix * a - a).norm() / a.norm() < 1e-10);
    CHECK((p.matrix * a * p.matrix - p.matrix).norm() / p.matrix.norm() < 1e-10);
  }
}

TEST_CASE("double pseudoinverse of a full-rank square matrix") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = random_matrix(4, 4, rng);
    const auto once = linalg::pinv_truncated(a);
    const auto twice = linalg::pinv_truncated(once.matrix);
    CHECK((twice.matrix - a).norm() / a.norm() < 1e-8);
  }
}

TEST_CASE("truncated SVD reconstructs a low-rank matrix") {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd a = random_matrix(6, 2, rng) * random_matrix(2, 9, rng);
  const auto s = linalg::svd_truncated(a);
  CHECK(s.rank == 2);
  const Eigen::MatrixXd back = s.u * s.sigma.asDiagonal() * s.v.transpose();
  CHECK((back - a).norm() / a.norm() < 1e-12);
}

TEST_CASE("eig of diag(2, 0.5)") {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2, 2);
  k(0, 0) = 2.0;
  k(1, 1) = 0.5;
  const auto e = linalg::eig(k);
  CHECK(e.values(0).real() == doctest::Approx(2.0));
  CHECK(e.values(1).real() == doctest::Approx(0.5));
  CHECK(std::abs(e.values(0).imag()) + std::abs(e.values(1).imag()) == 0.0);
  CHECK(std::abs(std::abs(e.vectors(0, 0)) - 1.0) < 1e-14);
  CHECK(std::abs(e.vectors(1, 0)) < 1e-14);
  CHECK(std::abs(std::abs(e.vectors(1, 1)) - 1.0) < 1e-14);
  CHECK(std::abs(e.vectors(0, 1)) < 1e-14);
}

TEST_CASE("eig of a rotation by pi/4") {
  const double th = std::numbers::pi / 4.0;
  Eigen::MatrixXd r(2, 2);
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const auto e = linalg::eig(r);
  const std::complex<double> expected = std::polar(1.0, th);
  CHECK(std::abs(e.values(0) - expected) < 1e-12);
  CHECK(std::abs(e.values(1) - std::conj(expected)) < 1e-12);
  CHECK(std::abs(std::abs(e.values(0)) - 1.0) < 1e-12);
}

TEST_CASE("eig of the identity") {
  const auto e = linalg::eig(Eigen::MatrixXd::Identity(4, 4));
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(std::abs(e.values(i) - 1.0) < 1e-14);
  }
}

TEST_CASE("eig residual, ordering and conjugate pairs on random matrices") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd k = random_matrix(6, 6, rng);
    const auto e = linalg::eig(k);
    const Eigen::MatrixXcd kc = k.cast<std::complex<double>>();
    CHECK((kc * e.vectors - e.vectors * e.values.asDiagonal()).norm() <= 1e-6 * k.norm());
    CHECK(linalg::eig_residual(k, e) <= 1e-6 * k.norm());
    for (Eigen::Index i = 1; i < 6; ++i) {
      CHECK(std::abs(e.values(i - 1)) >= std::abs(e.values(i)) - 1e-12);
    }
    for (Eigen::Index i = 0; i < 6; ++i) {
      if (e.values(i).imag() == 0.0) {
        continue;
      }
      double best = 1e300;
      for (Eigen::Index j = 0; j < 6; ++j) {
        best = std::min(best, std::abs(e.values(j) - std::conj(e.values(i))));
      }
      CHECK(best <= 1e-12);
    }
  }
}

TEST_CASE("eig of symmetric matrices gives real eigenvalues") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = random_matrix(5, 5, rng);
    const Eigen::MatrixXd s = a + a.transpose();
    const auto e = linalg::eig(s);
    CHECK(e.values.imag().cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("eig rejects a Jordan block as non-diagonalizable") {
  Eigen::MatrixXd j(2, 2);
  j << 1, 1, 0, 1;
  try {
    linalg::eig(j);
    FAIL("expected NumericalError");
  } catch (const NumericalError &e) {
    CHECK(std::string(e.what()).find("non-diagonalizable") != std::string::npos);
  }
}

TEST_CASE("eig rejects non-square input") {
  CHECK_THROWS(linalg::eig(Eigen::MatrixXd::Zero(2, 3)));
}
