#include "admd/delay.hpp"

#include "admd/errors.hpp"

namespace admd {

bool DelayEmbedding::is_hankel_consistent() const {
  if (d == 0) {
    return true;
  }
  for (Eigen::Index j = 0; j + 1 < columns.cols(); ++j) {
    if (columns.col(j).segment(n, n) != columns.col(j + 1).head(n)) {
      return false;
    }
  }
  return true;
}

DelayEmbedding embed(const Eigen::MatrixXd &points, Eigen::Index d) {
  const Eigen::Index n = points.rows();
  const Eigen::Index N = points.cols();
  if (d < 0) {
    throw InputError("delay count must be non-negative");
  }
  if (d >= N) {
    throw InputError("trajectory too short for delay: N = " + std::to_string(N) +
                     ", d = " + std::to_string(d));
  }
  DelayEmbedding e;
  e.d = d;
  e.n = n;
  e.columns.resize(n * (d + 1), N - d);
  for (Eigen::Index j = 0; j < N - d; ++j) {
    for (Eigen::Index k = 0; k <= d; ++k) {
      e.columns.col(j).segment(k * n, n) = points.col(j + k);
    }
  }
  return e;
}

DelayEmbedding embed(const Trajectory &t, Eigen::Index d) { return embed(t.points, d); }

Eigen::MatrixXd unembed(const Eigen::MatrixXd &columns, Eigen::Index n) {
  if (n < 1 || columns.rows() < n || columns.rows() % n != 0) {
    throw InputError("unembed: " + std::to_string(columns.rows()) +
                     " rows is not a multiple of n = " + std::to_string(n));
  }
  return columns.topRows(n);
}

Eigen::MatrixXd unembed(const DelayEmbedding &e) {
  if (e.columns.rows() != e.delay_dim()) {
    throw InputError("unembed: embedding has " + std::to_string(e.columns.rows()) +
                     " rows, expected n(d+1) = " + std::to_string(e.delay_dim()));
  }
  return unembed(e.columns, e.n);
}

} // namespace admd
