#pragma once

#include "admd/corpus.hpp"

#include <Eigen/Dense>

namespace admd {

/// Hankel-structured stack of d+1 consecutive samples per column.
/// `columns` is n(d+1) x (N-d); column i is [x_i; x_{i+1}; ...; x_{i+d}].
struct DelayEmbedding {
  Eigen::Index d = 0;
  Eigen::Index n = 0;
  Eigen::MatrixXd columns;

  Eigen::Index delay_dim() const { return n * (d + 1); }
  Eigen::Index length() const { return columns.cols(); }

  /// True when each column's second block equals the next column's first.
  bool is_hankel_consistent() const;
};

/// Throws InputError("trajectory too short for delay") when d >= N.
DelayEmbedding embed(const Trajectory &t, Eigen::Index d);
DelayEmbedding embed(const Eigen::MatrixXd &points, Eigen::Index d);

/// First n rows of every column; overlapping copies are discarded.
Eigen::MatrixXd unembed(const DelayEmbedding &e);

/// Same projection applied to a raw n_d x N_d matrix.
Eigen::MatrixXd unembed(const Eigen::MatrixXd &columns, Eigen::Index n);

} // namespace admd
