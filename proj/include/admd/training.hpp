#pragma once

#include "admd/corpus.hpp"
#include "admd/delay.hpp"
#include "admd/errors.hpp"
#include "admd/koopman.hpp"
#include "admd/observables.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace admd {

/// How the transition matrix enters the gradient.
enum class KMode {
  /// K refit every refit_period epochs and held constant in backprop.
  Frozen,
  /// K = Y2 pinv(Y1) refit inside every loss evaluation and differentiated
  /// through the pseudoinverse on its retained singular subspace.
  Differentiated,
};

const char *to_string(KMode mode);
KMode k_mode_from_string(const std::string &s);

struct TrainingConfig {
  double alpha = 100.0; ///< prediction-loss weight
  double beta = 1e-12;  ///< L2 weight regularization
  int epochs = 2000;
  double learning_rate = 1e-3;
  /// Cosine decay from learning_rate to this value over the run; negative keeps lr constant.
  double final_learning_rate = 1e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;
  int refit_period = 10;
  double grad_clip = 10.0;
  double pinv_rel_tol = linalg::kDefaultPinvRelTol;
  double divergence_threshold = 1e6;
  KMode k_mode = KMode::Differentiated;
  /// Noise draws pooled into the final K fit; 0 fits K on clean encodings.
  int final_fit_draws = 20;
  Eigen::Index delay = 20;
  AutoencoderArchitecture arch; ///< input_dim is derived from delay and n in train()

  /// Throws InputError on negative weights, refit_period < 1, etc.
  void validate() const;
};

struct LossBreakdown {
  double lin = 0.0;
  double pred = 0.0;
  double recon = 0.0;
  double reg = 0.0; ///< ||W||^2, unweighted
  double total = 0.0;
};

/// One delay-embedded trajectory used as a training sample.
struct TrainingSample {
  std::string id;
  Eigen::MatrixXd columns; ///< n_d x N_d
};

struct LossAndGradient {
  LossBreakdown loss;
  Eigen::VectorXd gradient; ///< AutoencoderParams::flatten() layout
};

/// Mean of squared entries.
double mse(const Eigen::MatrixXd &residual);

/// Linear, prediction and reconstruction losses summed over trajectories,
/// plus beta ||W||^2. Per-trajectory terms are reduced in id order, so the
/// result does not depend on sample order. Throws NumericalError naming the
/// trajectory and step on non-finite values.
LossBreakdown compute_loss(const AutoencoderParams &params, const Eigen::MatrixXd &transition,
                           std::span<const TrainingSample> samples, double alpha, double beta);

/// compute_loss plus the exact reverse-mode gradient with `transition` held constant.
LossAndGradient loss_and_gradient(const AutoencoderParams &params, const Eigen::MatrixXd &transition,
                                  std::span<const TrainingSample> samples, double alpha, double beta);

/// Loss with K = Y2 pinv(Y1) fitted from the samples' own encodings (one
/// shared K, no cross-trajectory pairs). `transition_out`, if given,
/// receives that K.
LossBreakdown compute_loss_refit(const AutoencoderParams &params,
                                 std::span<const TrainingSample> samples, double alpha, double beta,
                                 double rel_tol, Eigen::MatrixXd *transition_out = nullptr);

/// Gradient of compute_loss_refit including the dependence of K on the
/// encoder through the pseudoinverse.
LossAndGradient loss_and_gradient_refit(const AutoencoderParams &params,
                                        std::span<const TrainingSample> samples, double alpha,
                                        double beta, double rel_tol,
                                        Eigen::MatrixXd *transition_out = nullptr);

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step = 0;

  static AdamState zeros(Eigen::Index n);
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// In-place bias-corrected Adam update.
void adam_step(Eigen::VectorXd &params, const Eigen::VectorXd &grads, AdamState &state,
               const AdamConfig &cfg);

struct EpochRecord {
  int epoch = 0;
  LossBreakdown loss;
};

/// Loss history CSV: epoch,lin,pred,recon,reg,total.
void write_loss_history_csv(std::ostream &out, const std::vector<EpochRecord> &history);

class TrainingDiverged : public NumericalError {
public:
  TrainingDiverged(const std::string &what, std::vector<EpochRecord> history)
      : NumericalError(what), history_(std::move(history)) {}
  const std::vector<EpochRecord> &history() const { return history_; }

private:
  std::vector<EpochRecord> history_;
};

struct TrainingResult {
  AutoencoderParams params;
  KoopmanModel model; ///< K refit with the final encoder
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord &)>;

/// Full-batch Adam over all trajectories with fresh noise each epoch and K
/// refit every refit_period epochs (held constant in backprop). `on_epoch`
/// runs after every epoch. Throws TrainingDiverged carrying the partial history.
TrainingResult train(const std::vector<Trajectory> &trajectories, const TrainingConfig &cfg,
                     const EpochCallback &on_epoch = {});

} // namespace admd
