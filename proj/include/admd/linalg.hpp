#pragma once

#include <Eigen/Dense>

#include <complex>

namespace admd::linalg {

inline constexpr double kDefaultPinvRelTol = 1e-6;

struct Pseudoinverse {
  Eigen::Index rows = 0; ///< rows of the source matrix
  Eigen::Index cols = 0;
  Eigen::Index rank = 0;
  Eigen::MatrixXd matrix; ///< cols x rows
};

/// Thin SVD with components below rel_tol * sigma_max dropped:
/// A ~= U diag(sigma) V^T with `rank` columns in U and V.
struct TruncatedSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd v;
  Eigen::Index rank = 0;
};

TruncatedSvd svd_truncated(const Eigen::MatrixXd &a, double rel_tol = kDefaultPinvRelTol);

/// SVD pseudoinverse keeping singular values >= rel_tol * sigma_max.
/// An all-zero input yields a zero matrix of rank 0.
Pseudoinverse pinv_truncated(const Eigen::MatrixXd &a, double rel_tol = kDefaultPinvRelTol);

struct EigenDecomposition {
  Eigen::VectorXcd values;  ///< sorted by descending modulus
  Eigen::MatrixXcd vectors; ///< unit-norm right eigenvectors, column j pairs with values(j)
  Eigen::MatrixXcd inverse_vectors;
};

/// Eigenpairs of a real square matrix, sorted by descending |lambda|
/// (ties broken by descending imaginary part).
///
/// Throws NumericalError if the iteration fails to converge, and
/// NumericalError("non-diagonalizable: ...") if the eigenvector matrix is
/// numerically singular or the residual ||K V - V diag(lambda)||_F exceeds
/// 1e-6 ||K||_F.
EigenDecomposition eig(const Eigen::MatrixXd &k);

/// ||V diag(lambda) V^-1 - K||_F style reconstruction, for diagnostics/tests.
double eig_residual(const Eigen::MatrixXd &k, const EigenDecomposition &e);

} // namespace admd::linalg
