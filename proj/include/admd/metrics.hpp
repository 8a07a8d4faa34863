#pragma once

#include "admd/corpus.hpp"
#include "admd/koopman.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace admd {

struct EvalOptions {
  int trials = 100;
  double sigma = 0.05;
  std::uint64_t seed = 0;
  bool filtered = false; ///< drop unstable eigenmodes before decoding
  double truncation = 2.0; ///< noise truncated at +-truncation*sigma per coordinate
};

struct SingleErrors {
  double lin = 0.0;
  double pred = 0.0;
  bool diverged = false;
};

/// Sum over the horizon of MSE(K^m g(x1) - g(x_{m+1})) and of
/// MSE(h(K^m g(x1)) - x_{m+1}), h keeping the first n rows of the decoded
/// delay vector. A diverged rollout gives +inf for both.
SingleErrors single_errors(const KoopmanModel &model, const Trajectory &t, bool filtered = false);

/// Same sums starting from an arbitrary delay-space initial vector, compared
/// to the clean trajectory.
SingleErrors errors_from_initial(const KoopmanModel &model, const DelayEmbedding &clean,
                                 const Eigen::VectorXd &initial, bool filtered);

struct NoisyErrors {
  double lin = 0.0;
  double pred = 0.0;
  int trials = 0;
  int diverged_trials = 0;
};

/// Averages errors_from_initial over `trials` perturbed initial delay vectors
/// x1 + sigma*u, u a standard normal truncated per coordinate. Trial i uses
/// its own generator keyed by (seed, trajectory id, i). Diverged trials are
/// counted and excluded; if every trial diverges the means are +inf.
NoisyErrors noisy_errors(const KoopmanModel &model, const Trajectory &t, const EvalOptions &opts);

/// The perturbed initial condition used for trial `trial`.
Eigen::VectorXd perturbed_initial(const Eigen::VectorXd &x1, const std::string &id, int trial,
                                  const EvalOptions &opts);

struct TrajectoryErrors {
  std::string id;
  Split split = Split::Train;
  double e_lin = 0.0;
  double e_pred = 0.0;
  double e_n_lin = 0.0;
  double e_n_pred = 0.0;
  int diverged_trials = 0;
  bool single_diverged = false;
};

struct ErrorAggregate {
  std::string split; ///< "train", "test" or "all"
  double e_lin = 0.0;
  double e_pred = 0.0;
  double e_n_lin = 0.0;
  double e_n_pred = 0.0;
  int diverged_trials = 0;
  std::size_t count = 0;
};

struct ErrorReport {
  std::string method;
  int trials = 0;
  std::vector<TrajectoryErrors> rows;

  /// Means over rows of the given split ("train", "test" or "all").
  ErrorAggregate aggregate(const std::string &split) const;
  std::vector<std::string> ids() const;
};

/// Evaluates every trajectory, tagging each row with its corpus split.
ErrorReport evaluate(const KoopmanModel &model, const std::string &method,
                     const std::vector<Trajectory> &trajectories, const Corpus &split_source,
                     const EvalOptions &opts);

/// CSV with columns method,trajectory_id,split,e_lin,e_pred,e_n_lin,e_n_pred,diverged_trials.
/// Aggregate rows use trajectory_id "mean" and split train/test/all.
void write_error_csv(std::ostream &out, const std::vector<ErrorReport> &reports);

struct ComparisonTable {
  std::vector<std::string> methods;
  /// Rows in order: single/pred, single/lin, noisy/pred, noisy/lin; one value per method.
  struct Row {
    std::string reconstruction;
    std::string error;
    std::vector<double> values;
  };
  std::vector<Row> rows;
};

/// Throws InputError listing mismatched ids if the reports cover different trajectories.
ComparisonTable compare_table(const std::vector<ErrorReport> &reports);

void write_table_csv(std::ostream &out, const ComparisonTable &table);
void write_table_text(std::ostream &out, const ComparisonTable &table);

} // namespace admd
