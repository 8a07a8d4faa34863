#pragma once

#include "admd/delay.hpp"
#include "admd/errors.hpp"
#include "admd/linalg.hpp"
#include "admd/observables.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace admd {

inline constexpr double kStabilityMargin = 1e-6;

/// Encoded snapshots and their one-step shift, concatenated across
/// trajectories without cross-boundary pairs.
struct SnapshotPair {
  Eigen::MatrixXd current; ///< Y1, m x total_pairs
  Eigen::MatrixXd next;    ///< Y2
};

/// Each latent block is m x N_d for one trajectory. Throws InputError if any
/// block has fewer than 2 columns.
SnapshotPair build_snapshots(const std::vector<Eigen::MatrixXd> &latent_sequences);
SnapshotPair build_snapshots(const ObservableMap &map, const std::vector<DelayEmbedding> &embeddings);
SnapshotPair build_snapshots(const ObservableMap &map, const DelayEmbedding &embedding);

/// K = Y2 pinv(Y1).
Eigen::MatrixXd fit_transition(const SnapshotPair &snap, double rel_tol = linalg::kDefaultPinvRelTol);

struct KoopmanModel {
  Eigen::MatrixXd transition; ///< K_m
  std::optional<linalg::EigenDecomposition> spectrum;
  std::string spectrum_error; ///< why `spectrum` is empty, if it is
  std::vector<Eigen::Index> stable_set;
  std::shared_ptr<const ObservableMap> map;
  Eigen::Index delay = 0;   ///< d used to build the map's input
  Eigen::Index state_dim = 0; ///< n, the measurement dimension
  double stability_margin = kStabilityMargin;

  bool filtering_available() const { return spectrum.has_value(); }
  Eigen::Index latent_dim() const { return transition.rows(); }
  double spectral_radius() const;
};

/// Wraps a transition matrix with its spectrum and stable set. An eigen
/// failure leaves the model usable without filtering.
KoopmanModel make_model(Eigen::MatrixXd transition, std::shared_ptr<const ObservableMap> map,
                        Eigen::Index delay, Eigen::Index state_dim,
                        double stability_margin = kStabilityMargin);

KoopmanModel fit(const SnapshotPair &snap, std::shared_ptr<const ObservableMap> map,
                 Eigen::Index delay, Eigen::Index state_dim,
                 double rel_tol = linalg::kDefaultPinvRelTol);

/// Encodes the embeddings with `map`, then fits one shared K.
KoopmanModel fit(std::shared_ptr<const ObservableMap> map, const std::vector<DelayEmbedding> &embeddings,
                 double rel_tol = linalg::kDefaultPinvRelTol);

/// Latent propagation produced a non-finite state.
class RolloutDiverged : public NumericalError {
public:
  RolloutDiverged(Eigen::Index step, const std::string &what)
      : NumericalError(what), step_(step) {}
  Eigen::Index step() const { return step_; }

private:
  Eigen::Index step_;
};

/// Re( sum_{f in F} V_f lambda_f^k (V^-1 z1)_f ): the k-step latent state with
/// unstable eigencomponents removed. Throws NumericalError("filtering
/// unavailable") when the model has no spectrum.
Eigen::VectorXd filter_modes(const KoopmanModel &model, const Eigen::VectorXd &z1, Eigen::Index k);

/// Propagates a latent state: column i is K^i z1 (iterative), or its
/// filtered projection. Throws RolloutDiverged on non-finite states.
struct LatentRollout {
  Eigen::MatrixXd states; ///< m x (steps + 1)
  bool filtered = false;
  std::string warning;
};
LatentRollout propagate(const KoopmanModel &model, const Eigen::VectorXd &z1, Eigen::Index steps,
                        bool filtered);

struct Rollout {
  Eigen::MatrixXd latents; ///< m x (steps + 1)
  Eigen::MatrixXd decoded; ///< n_d x (steps + 1), a reconstructed delay embedding
  bool filtered = false;
  std::string warning;
};

/// Psi(K^{i-1} Phi(x1)) for i = 1..steps+1.
Rollout rollout(const KoopmanModel &model, const Eigen::VectorXd &x1, Eigen::Index steps,
                bool filtered);

} // namespace admd
