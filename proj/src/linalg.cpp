#include "admd/linalg.hpp"

#include "admd/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace admd::linalg {

namespace {
constexpr double kMaxEigenvectorCondition = 1e12;
constexpr double kEigResidualTol = 1e-6;
} // namespace

TruncatedSvd svd_truncated(const Eigen::MatrixXd &a, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
    throw InputError("pinv_truncated: rel_tol must lie in (0, 1)");
  }
  if (!a.allFinite()) {
    throw InputError("pinv_truncated: matrix has non-finite entries");
  }
  TruncatedSvd out;
  out.u.resize(a.rows(), 0);
  out.v.resize(a.cols(), 0);
  if (a.size() == 0) {
    return out;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd &sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  if (!(sigma_max > 0.0)) {
    return out;
  }
  const double cutoff = rel_tol * sigma_max;
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) >= cutoff) {
    ++r;
  }
  out.rank = r;
  out.u = svd.matrixU().leftCols(r);
  out.sigma = sv.head(r);
  out.v = svd.matrixV().leftCols(r);
  return out;
}

Pseudoinverse pinv_truncated(const Eigen::MatrixXd &a, double rel_tol) {
  const TruncatedSvd svd = svd_truncated(a, rel_tol);
  Pseudoinverse out;
  out.rows = a.rows();
  out.cols = a.cols();
  out.rank = svd.rank;
  if (svd.rank == 0) {
    out.matrix = Eigen::MatrixXd::Zero(a.cols(), a.rows());
    return out;
  }
  out.matrix = svd.v * svd.sigma.cwiseInverse().asDiagonal() * svd.u.transpose();
  return out;
}

EigenDecomposition eig(const Eigen::MatrixXd &k) {
  if (k.rows() != k.cols()) {
    throw InputError("eig: matrix is not square");
  }
  if (!k.allFinite()) {
    throw NumericalError("eig: matrix has non-finite entries");
  }
  const Eigen::Index m = k.rows();
  EigenDecomposition out;
  if (m == 0) {
    return out;
  }

  Eigen::EigenSolver<Eigen::MatrixXd> solver(k, true);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eig: QR iteration failed to converge");
  }
  const Eigen::VectorXcd values = solver.eigenvalues();
  const Eigen::MatrixXcd vectors = solver.eigenvectors();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(values(a));
    const double mb = std::abs(values(b));
    if (ma != mb) {
      return ma > mb;
    }
    return values(a).imag() > values(b).imag();
  });

  out.values.resize(m);
  out.vectors.resize(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    out.values(j) = values(order[static_cast<std::size_t>(j)]);
    out.vectors.col(j) = vectors.col(order[static_cast<std::size_t>(j)]).normalized();
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(out.vectors);
  const auto &sv = svd.singularValues();
  const double cond = sv(m - 1) > 0.0 ? sv(0) / sv(m - 1) : std::numeric_limits<double>::infinity();
  if (!(cond < kMaxEigenvectorCondition)) {
    throw NumericalError("non-diagonalizable: eigenvector condition number " +
                         std::to_string(cond));
  }
  out.inverse_vectors = out.vectors.partialPivLu().inverse();

  const double residual =
      (k.cast<std::complex<double>>() * out.vectors - out.vectors * out.values.asDiagonal()).norm();
  if (residual > kEigResidualTol * std::max(k.norm(), 1e-300)) {
    throw NumericalError("non-diagonalizable: eigen residual " + std::to_string(residual));
  }
  return out;
}

double eig_residual(const Eigen::MatrixXd &k, const EigenDecomposition &e) {
  return (k.cast<std::complex<double>>() * e.vectors - e.vectors * e.values.asDiagonal()).norm();
}

} // namespace admd::linalg
