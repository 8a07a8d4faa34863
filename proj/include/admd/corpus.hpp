#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace admd {

/// Per-coordinate affine map applied by normalize(): normalized = (raw - offset) / scale.
struct Normalization {
  Eigen::VectorXd offset;
  Eigen::VectorXd scale;

  static Normalization identity(Eigen::Index n);
  Eigen::MatrixXd apply(const Eigen::MatrixXd &raw) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd &normalized) const;
};

/// One demonstration. `points` is n x N, one column per sample.
struct Trajectory {
  std::string id;
  Eigen::MatrixXd points;
  Normalization normalization;

  Trajectory() = default;
  Trajectory(std::string id_, Eigen::MatrixXd points_);

  Eigen::Index dim() const { return points.rows(); }
  Eigen::Index length() const { return points.cols(); }

  /// Throws InputError if N < 2 or any entry is non-finite.
  void validate() const;
};

enum class Split { Train, Test };

const char *to_string(Split split);

/// A file that failed validation during load_corpus.
struct Rejection {
  std::string id;
  std::string reason;
};

struct Corpus {
  std::string name;
  Eigen::Index n = 2;
  std::vector<Trajectory> trajectories;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<Rejection> rejected;

  /// Throws InputError on duplicate ids or overlapping splits.
  void validate() const;

  const Trajectory *find(const std::string &id) const;
  bool is_train(const std::string &id) const;
  std::vector<Trajectory> select(Split split) const;
};

/// Reads `<root>/manifest.json` and one `<root>/<id>.csv` per listed id.
/// A missing or unreadable manifest throws InputError; individual bad files
/// are recorded in Corpus::rejected and dropped from the split lists.
Corpus load_corpus(const std::filesystem::path &root);

/// Writes the corpus in the same layout, values as 17-significant-digit text.
void save_corpus(const Corpus &corpus, const std::filesystem::path &root);

/// Parses one trajectory CSV (header required, `t` column optional).
Trajectory read_trajectory_csv(const std::filesystem::path &file, const std::string &id,
                               Eigen::Index expected_dim);

/// Zero mean, unit max-absolute-value per coordinate. A constant coordinate
/// gets its offset removed with scale 1. The map composes into t.normalization.
Trajectory normalize(const Trajectory &t);

/// Returns a copy of `states` (columns are state vectors) with i.i.d.
/// N(0, sigma^2) noise added to every entry. Throws InputError if sigma < 0.
Eigen::MatrixXd augment_noise(const Eigen::MatrixXd &states, double sigma, std::uint64_t seed);

} // namespace admd
