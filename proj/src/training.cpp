#include "admd/training.hpp"

#include "admd/format.hpp"
#include "admd/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace admd {

void TrainingConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw InputError("alpha and beta must be non-negative");
  }
  if (refit_period < 1) {
    throw InputError("refit_period must be at least 1");
  }
  if (final_fit_draws < 0) {
    throw InputError("final_fit_draws must be non-negative");
  }
  if (epochs < 0) {
    throw InputError("epochs must be non-negative");
  }
  if (!(learning_rate > 0.0) || !(adam_epsilon > 0.0) || !(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw InputError("invalid Adam settings");
  }
  if (!(noise_sigma >= 0.0)) {
    throw InputError("noise sigma must be non-negative");
  }
  if (!(grad_clip > 0.0)) {
    throw InputError("grad_clip must be positive");
  }
  if (delay < 0) {
    throw InputError("delay must be non-negative");
  }
}

double mse(const Eigen::MatrixXd &residual) {
  return residual.size() == 0 ? 0.0 : residual.squaredNorm() / static_cast<double>(residual.size());
}

namespace {

// Encoder pass for one trajectory, kept for the reverse pass.
struct Encoded {
  const TrainingSample *sample = nullptr;
  MlpTape tape;
  Eigen::MatrixXd latents; // m x N_d
};

// Latent rollout, decoder passes and (optionally) their reverse pass.
struct SampleTerms {
  double lin = 0.0;
  double pred = 0.0;
  double recon = 0.0;
  Eigen::MatrixXd latent_grad; // dL/d Phi(x_j), m x N_d
  MlpGradient decoder_grad;
  Eigen::MatrixXd k_grad; // dL/dK
};

// Samples sorted by id so every reduction, and the column order of the
// snapshot matrices, is independent of the caller's ordering.
std::vector<Encoded> encode_sorted(const AutoencoderParams &params,
                                   std::span<const TrainingSample> samples) {
  std::vector<const TrainingSample *> order;
  for (const auto &s : samples) {
    order.push_back(&s);
  }
  std::stable_sort(order.begin(), order.end(), [](const TrainingSample *a, const TrainingSample *b) {
    return a->id < b->id;
  });
  std::vector<Encoded> out(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const TrainingSample &s = *order[i];
    if (s.columns.cols() < 2) {
      throw InputError("trajectory '" + s.id + "' has fewer than 2 delay columns");
    }
    out[i].sample = &s;
    try {
      out[i].latents = params.encoder.forward(s.columns, out[i].tape);
    } catch (const NumericalError &e) {
      throw NumericalError("trajectory '" + s.id + "' encoder: " + e.what());
    }
  }
  return out;
}

SampleTerms latent_pass(const AutoencoderParams &params, const Eigen::MatrixXd &k,
                        const Encoded &enc, double alpha, bool with_gradient) {
  const TrainingSample &sample = *enc.sample;
  const Eigen::MatrixXd &x = sample.columns;
  const Eigen::MatrixXd &encoded = enc.latents;
  const Eigen::Index len = x.cols();
  const Eigen::Index m = params.arch.latent_dim;
  const auto nd = static_cast<double>(x.rows());
  const auto md = static_cast<double>(m);

  Eigen::MatrixXd rolled(m, len);
  rolled.col(0) = encoded.col(0);
  for (Eigen::Index j = 1; j < len; ++j) {
    rolled.col(j).noalias() = k * rolled.col(j - 1);
    if (!rolled.col(j).allFinite()) {
      throw NumericalError("trajectory '" + sample.id + "': non-finite latent rollout at step " +
                           std::to_string(j));
    }
  }

  const Eigen::Index steps = len - 1;
  const Eigen::MatrixXd lin_residual = rolled.rightCols(steps) - encoded.rightCols(steps);
  MlpTape pred_tape;
  MlpTape recon_tape;
  Eigen::MatrixXd predicted;
  Eigen::MatrixXd reconstructed;
  try {
    predicted = params.decoder.forward(rolled.rightCols(steps), pred_tape);
    reconstructed = params.decoder.forward(encoded, recon_tape);
  } catch (const NumericalError &e) {
    throw NumericalError("trajectory '" + sample.id + "' decoder: " + e.what());
  }
  const Eigen::MatrixXd pred_residual = predicted - x.rightCols(steps);
  const Eigen::MatrixXd recon_residual = reconstructed - x;

  SampleTerms out;
  out.lin = lin_residual.squaredNorm() / md;
  out.pred = pred_residual.squaredNorm() / nd;
  out.recon = recon_residual.squaredNorm() / nd;
  if (!std::isfinite(out.lin) || !std::isfinite(out.pred) || !std::isfinite(out.recon)) {
    throw NumericalError("trajectory '" + sample.id + "': non-finite loss");
  }
  if (!with_gradient) {
    return out;
  }

  out.decoder_grad = params.decoder.zero_gradient();

  // Gradient reaching each rolled latent directly (column 0 receives none).
  Eigen::MatrixXd rolled_grad = Eigen::MatrixXd::Zero(m, len);
  rolled_grad.rightCols(steps) =
      params.decoder.backward(pred_tape, (2.0 * alpha / nd) * pred_residual, out.decoder_grad);
  rolled_grad.rightCols(steps) += (2.0 / md) * lin_residual;

  out.latent_grad = params.decoder.backward(recon_tape, (2.0 / nd) * recon_residual, out.decoder_grad);
  out.latent_grad.rightCols(steps) -= (2.0 / md) * lin_residual;

  // Adjoint of z_{j+1} = K z_j back to z_1 = Phi(x_1), collecting dL/dK.
  const Eigen::MatrixXd kt = k.transpose();
  out.k_grad = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd adjoint = rolled_grad.col(len - 1);
  for (Eigen::Index j = len - 2; j >= 0; --j) {
    out.k_grad.noalias() += adjoint * rolled.col(j).transpose();
    adjoint = rolled_grad.col(j) + kt * adjoint;
  }
  out.latent_grad.col(0) += adjoint;
  return out;
}

struct Evaluation {
  LossBreakdown loss;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd transition;
};

struct FittedTransition {
  Eigen::MatrixXd k;
  linalg::TruncatedSvd svd; // of Y1
  SnapshotPair snap;
};

FittedTransition fit_from(const std::vector<Encoded> &encoded, double rel_tol) {
  std::vector<Eigen::MatrixXd> latents;
  latents.reserve(encoded.size());
  for (const auto &e : encoded) {
    latents.push_back(e.latents);
  }
  FittedTransition f;
  f.snap = build_snapshots(latents);
  f.svd = linalg::svd_truncated(f.snap.current, rel_tol);
  if (f.svd.rank == 0) {
    f.k = Eigen::MatrixXd::Zero(f.snap.current.rows(), f.snap.current.rows());
  } else {
    f.k = (f.snap.next * f.svd.v) * f.svd.sigma.cwiseInverse().asDiagonal() * f.svd.u.transpose();
  }
  return f;
}

// K is either given (held constant) or refit from the encodings.
Evaluation evaluate(const AutoencoderParams &params, const Eigen::MatrixXd *fixed_k,
                    std::span<const TrainingSample> samples, double alpha, double beta,
                    double rel_tol, bool with_gradient) {
  const Eigen::Index m = params.arch.latent_dim;
  if (samples.empty()) {
    throw InputError("loss: no trajectories");
  }
  const auto encoded = encode_sorted(params, samples);

  Evaluation ev;
  FittedTransition fitted;
  if (fixed_k != nullptr) {
    ev.transition = *fixed_k;
  } else {
    fitted = fit_from(encoded, rel_tol);
    ev.transition = fitted.k;
  }
  if (ev.transition.rows() != m || ev.transition.cols() != m) {
    throw InputError("transition matrix must be m x m with m = latent_dim");
  }

  std::vector<SampleTerms> terms;
  terms.reserve(encoded.size());
  for (const auto &e : encoded) {
    terms.push_back(latent_pass(params, ev.transition, e, alpha, with_gradient));
  }
  for (const auto &t : terms) {
    ev.loss.lin += t.lin;
    ev.loss.pred += t.pred;
    ev.loss.recon += t.recon;
  }
  ev.loss.reg = params.weight_norm_squared();
  ev.loss.total = ev.loss.lin + alpha * ev.loss.pred + ev.loss.recon + beta * ev.loss.reg;
  if (!with_gradient) {
    return ev;
  }

  if (fixed_k == nullptr && fitted.svd.rank > 0) {
    // K = Y2 Y1+ on the retained subspace. With G = dL/dK, P = (Y1+)^T and
    // C+ = U S^-2 U^T:  dL/dY2 = G P,  dL/dY1 = C+ G^T (Y2 - K Y1) - K^T G P.
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
    for (const auto &t : terms) {
      g += t.k_grad;
    }
    const auto &svd = fitted.svd;
    const Eigen::MatrixXd p_t = svd.u * svd.sigma.cwiseInverse().asDiagonal() * svd.v.transpose();
    const Eigen::MatrixXd gram_pinv =
        svd.u * svd.sigma.cwiseAbs2().cwiseInverse().asDiagonal() * svd.u.transpose();
    const Eigen::MatrixXd residual = fitted.snap.next - ev.transition * fitted.snap.current;
    const Eigen::MatrixXd g_next = g * p_t;
    const Eigen::MatrixXd g_current =
        gram_pinv * g.transpose() * residual - ev.transition.transpose() * g_next;
    Eigen::Index offset = 0;
    for (auto &t : terms) {
      const Eigen::Index pairs = t.latent_grad.cols() - 1;
      t.latent_grad.leftCols(pairs) += g_current.middleCols(offset, pairs);
      t.latent_grad.rightCols(pairs) += g_next.middleCols(offset, pairs);
      offset += pairs;
    }
  }

  MlpGradient enc_grad = params.encoder.zero_gradient();
  MlpGradient dec_grad = params.decoder.zero_gradient();
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    params.encoder.backward(encoded[i].tape, terms[i].latent_grad, enc_grad);
    for (std::size_t l = 0; l < dec_grad.layers.size(); ++l) {
      dec_grad.layers[l].weights += terms[i].decoder_grad.layers[l].weights;
      dec_grad.layers[l].bias += terms[i].decoder_grad.layers[l].bias;
    }
  }
  ev.gradient = flatten_gradient(enc_grad, dec_grad);
  ev.gradient += (2.0 * beta) * params.flatten().cwiseProduct(params.weight_mask());
  return ev;
}

} // namespace

const char *to_string(KMode mode) { return mode == KMode::Frozen ? "frozen" : "differentiated"; }

KMode k_mode_from_string(const std::string &s) {
  if (s == "frozen") {
    return KMode::Frozen;
  }
  if (s == "differentiated") {
    return KMode::Differentiated;
  }
  throw InputError("unknown K mode '" + s + "' (expected frozen or differentiated)");
}

LossBreakdown compute_loss(const AutoencoderParams &params, const Eigen::MatrixXd &transition,
                           std::span<const TrainingSample> samples, double alpha, double beta) {
  return evaluate(params, &transition, samples, alpha, beta, linalg::kDefaultPinvRelTol, false).loss;
}

LossAndGradient loss_and_gradient(const AutoencoderParams &params, const Eigen::MatrixXd &transition,
                                  std::span<const TrainingSample> samples, double alpha, double beta) {
  auto ev = evaluate(params, &transition, samples, alpha, beta, linalg::kDefaultPinvRelTol, true);
  return {ev.loss, std::move(ev.gradient)};
}

LossBreakdown compute_loss_refit(const AutoencoderParams &params,
                                 std::span<const TrainingSample> samples, double alpha, double beta,
                                 double rel_tol, Eigen::MatrixXd *transition_out) {
  auto ev = evaluate(params, nullptr, samples, alpha, beta, rel_tol, false);
  if (transition_out != nullptr) {
    *transition_out = std::move(ev.transition);
  }
  return ev.loss;
}

LossAndGradient loss_and_gradient_refit(const AutoencoderParams &params,
                                        std::span<const TrainingSample> samples, double alpha,
                                        double beta, double rel_tol, Eigen::MatrixXd *transition_out) {
  auto ev = evaluate(params, nullptr, samples, alpha, beta, rel_tol, true);
  if (transition_out != nullptr) {
    *transition_out = std::move(ev.transition);
  }
  return {ev.loss, std::move(ev.gradient)};
}

AdamState AdamState::zeros(Eigen::Index n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
}

void adam_step(Eigen::VectorXd &params, const Eigen::VectorXd &grads, AdamState &state,
               const AdamConfig &cfg) {
  if (params.size() != grads.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw InputError("adam_step: shape mismatch");
  }
  ++state.step;
  state.first_moment = cfg.beta1 * state.first_moment + (1.0 - cfg.beta1) * grads;
  state.second_moment =
      cfg.beta2 * state.second_moment + (1.0 - cfg.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  params.array() -= cfg.learning_rate * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + cfg.epsilon);
}

void write_loss_history_csv(std::ostream &out, const std::vector<EpochRecord> &history) {
  out << "epoch,lin,pred,recon,reg,total\n";
  for (const auto &r : history) {
    out << r.epoch << ',' << format_double(r.loss.lin) << ',' << format_double(r.loss.pred) << ','
        << format_double(r.loss.recon) << ',' << format_double(r.loss.reg) << ','
        << format_double(r.loss.total) << '\n';
  }
}

TrainingResult train(const std::vector<Trajectory> &trajectories, const TrainingConfig &cfg,
                     const EpochCallback &on_epoch) {
  cfg.validate();
  if (trajectories.empty()) {
    throw InputError("train: no training trajectories");
  }
  const Eigen::Index n = trajectories.front().dim();
  std::vector<TrainingSample> clean;
  for (const auto &t : trajectories) {
    if (t.dim() != n) {
      throw InputError("train: trajectories have mixed state dimensions");
    }
    auto e = embed(t, cfg.delay);
    if (e.length() < 2) {
      throw InputError("train: trajectory '" + t.id + "' is too short for delay " +
                       std::to_string(cfg.delay));
    }
    clean.push_back({t.id, std::move(e.columns)});
  }
  std::sort(clean.begin(), clean.end(),
            [](const TrainingSample &a, const TrainingSample &b) { return a.id < b.id; });

  AutoencoderArchitecture arch = cfg.arch;
  arch.input_dim = n * (cfg.delay + 1);
  TrainingResult result;
  result.params = init_params(cfg.seed, arch);
  Eigen::VectorXd flat = result.params.flatten();
  AdamState adam = AdamState::zeros(flat.size());
  AdamConfig adam_cfg;
  adam_cfg.learning_rate = cfg.learning_rate;
  adam_cfg.beta1 = cfg.adam_beta1;
  adam_cfg.beta2 = cfg.adam_beta2;
  adam_cfg.epsilon = cfg.adam_epsilon;

  auto encodings = [&](const std::vector<TrainingSample> &samples) {
    std::vector<Eigen::MatrixXd> latents;
    latents.reserve(samples.size());
    for (const auto &s : samples) {
      latents.push_back(result.params.encoder.forward(s.columns));
    }
    return latents;
  };

  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(arch.latent_dim, arch.latent_dim);
  std::vector<TrainingSample> noisy = clean;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < clean.size(); ++i) {
      auto rng = make_rng({cfg.seed, static_cast<std::uint64_t>(epoch), i, 0x6e6f697365ull});
      noisy[i].columns = augment_noise(clean[i].columns, cfg.noise_sigma, rng());
    }
    LossAndGradient lg;
    try {
      if (cfg.k_mode == KMode::Differentiated) {
        lg = loss_and_gradient_refit(result.params, noisy, cfg.alpha, cfg.beta, cfg.pinv_rel_tol);
      } else {
        if (epoch % cfg.refit_period == 0) {
          k = fit_transition(build_snapshots(encodings(noisy)), cfg.pinv_rel_tol);
        }
        lg = loss_and_gradient(result.params, k, noisy, cfg.alpha, cfg.beta);
      }
    } catch (const NumericalError &e) {
      throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) + ": " + e.what(),
                             std::move(result.history));
    }
    result.history.push_back({epoch, lg.loss});
    if (on_epoch) {
      on_epoch(result.history.back());
    }
    if (!std::isfinite(lg.loss.total) || lg.loss.total > cfg.divergence_threshold) {
      throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) +
                                 ": total loss " + format_double(lg.loss.total),
                             std::move(result.history));
    }
    const double gnorm = lg.gradient.norm();
    if (gnorm > cfg.grad_clip) {
      lg.gradient *= cfg.grad_clip / gnorm;
    }
    if (cfg.final_learning_rate >= 0.0 && cfg.epochs > 1) {
      const double progress = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
      adam_cfg.learning_rate = cfg.final_learning_rate + 0.5 * (cfg.learning_rate - cfg.final_learning_rate) *
                                                             (1.0 + std::cos(std::numbers::pi * progress));
    }
    adam_step(flat, lg.gradient, adam, adam_cfg);
    result.params.assign(flat);
  }

  try {
    std::vector<TrainingSample> pooled;
    if (cfg.final_fit_draws == 0 || cfg.noise_sigma == 0.0) {
      pooled = clean;
    } else {
      for (int draw = 0; draw < cfg.final_fit_draws; ++draw) {
        for (std::size_t i = 0; i < clean.size(); ++i) {
          auto rng = make_rng({cfg.seed, static_cast<std::uint64_t>(draw), i, 0x66696e616cull});
          pooled.push_back({clean[i].id, augment_noise(clean[i].columns, cfg.noise_sigma, rng())});
        }
      }
    }
    const auto snap = build_snapshots(encodings(pooled));
    auto map = std::make_shared<const Autoencoder>(result.params);
    result.model = fit(snap, std::move(map), cfg.delay, n, cfg.pinv_rel_tol);
  } catch (const NumericalError &e) {
    throw TrainingDiverged(std::string("final refit failed: ") + e.what(), std::move(result.history));
  }
  return result;
}

} // namespace admd
