#include "admd/koopman.hpp"

#include <cmath>
#include <complex>

namespace admd {

SnapshotPair build_snapshots(const std::vector<Eigen::MatrixXd> &latent_sequences) {
  Eigen::Index rows = -1;
  Eigen::Index pairs = 0;
  for (const auto &seq : latent_sequences) {
    if (seq.cols() < 2) {
      throw InputError("build_snapshots: embedding needs at least 2 columns, got " +
                       std::to_string(seq.cols()));
    }
    if (rows >= 0 && seq.rows() != rows) {
      throw InputError("build_snapshots: latent dimension differs between trajectories");
    }
    rows = seq.rows();
    pairs += seq.cols() - 1;
  }
  if (rows < 0) {
    throw InputError("build_snapshots: no trajectories");
  }
  SnapshotPair snap{Eigen::MatrixXd(rows, pairs), Eigen::MatrixXd(rows, pairs)};
  Eigen::Index pos = 0;
  for (const auto &seq : latent_sequences) {
    const Eigen::Index c = seq.cols() - 1;
    snap.current.middleCols(pos, c) = seq.leftCols(c);
    snap.next.middleCols(pos, c) = seq.rightCols(c);
    pos += c;
  }
  return snap;
}

SnapshotPair build_snapshots(const ObservableMap &map, const std::vector<DelayEmbedding> &embeddings) {
  std::vector<Eigen::MatrixXd> latents;
  latents.reserve(embeddings.size());
  for (const auto &e : embeddings) {
    if (e.length() < 2) {
      throw InputError("build_snapshots: embedding needs N_d >= 2");
    }
    latents.push_back(map.encode(e.columns));
  }
  return build_snapshots(latents);
}

SnapshotPair build_snapshots(const ObservableMap &map, const DelayEmbedding &embedding) {
  return build_snapshots(map, std::vector<DelayEmbedding>{embedding});
}

Eigen::MatrixXd fit_transition(const SnapshotPair &snap, double rel_tol) {
  if (snap.current.rows() != snap.next.rows() || snap.current.cols() != snap.next.cols()) {
    throw InputError("fit: Y1 and Y2 shapes differ");
  }
  return snap.next * linalg::pinv_truncated(snap.current, rel_tol).matrix;
}

double KoopmanModel::spectral_radius() const {
  if (spectrum && spectrum->values.size() > 0) {
    return std::abs(spectrum->values(0));
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(transition, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

KoopmanModel make_model(Eigen::MatrixXd transition, std::shared_ptr<const ObservableMap> map,
                        Eigen::Index delay, Eigen::Index state_dim, double stability_margin) {
  KoopmanModel model;
  model.transition = std::move(transition);
  model.map = std::move(map);
  model.delay = delay;
  model.state_dim = state_dim;
  model.stability_margin = stability_margin;
  if (!model.transition.allFinite()) {
    throw NumericalError("fit produced a non-finite transition matrix");
  }
  try {
    model.spectrum = linalg::eig(model.transition);
    for (Eigen::Index j = 0; j < model.spectrum->values.size(); ++j) {
      if (std::abs(model.spectrum->values(j)) <= 1.0 + stability_margin) {
        model.stable_set.push_back(j);
      }
    }
  } catch (const NumericalError &e) {
    model.spectrum.reset();
    model.spectrum_error = e.what();
  }
  return model;
}

KoopmanModel fit(const SnapshotPair &snap, std::shared_ptr<const ObservableMap> map,
                 Eigen::Index delay, Eigen::Index state_dim, double rel_tol) {
  return make_model(fit_transition(snap, rel_tol), std::move(map), delay, state_dim);
}

KoopmanModel fit(std::shared_ptr<const ObservableMap> map, const std::vector<DelayEmbedding> &embeddings,
                 double rel_tol) {
  if (embeddings.empty()) {
    throw InputError("fit: no trajectories");
  }
  const auto snap = build_snapshots(*map, embeddings);
  return fit(snap, std::move(map), embeddings.front().d, embeddings.front().n, rel_tol);
}

namespace {

struct FilteredPropagator {
  Eigen::MatrixXcd basis;        // stable eigenvectors
  Eigen::VectorXcd values;       // matching eigenvalues
  Eigen::VectorXcd coefficients; // (V^-1 z1)_F, advanced by lambda per step

  FilteredPropagator(const KoopmanModel &model, const Eigen::VectorXd &z1) {
    if (!model.spectrum) {
      throw NumericalError("filtering unavailable: " + model.spectrum_error);
    }
    const auto &s = *model.spectrum;
    const auto f = static_cast<Eigen::Index>(model.stable_set.size());
    const Eigen::VectorXcd all = s.inverse_vectors * z1.cast<std::complex<double>>();
    basis.resize(s.vectors.rows(), f);
    values.resize(f);
    coefficients.resize(f);
    for (Eigen::Index i = 0; i < f; ++i) {
      const Eigen::Index j = model.stable_set[static_cast<std::size_t>(i)];
      basis.col(i) = s.vectors.col(j);
      values(i) = s.values(j);
      coefficients(i) = all(j);
    }
  }

  Eigen::VectorXd state() const { return (basis * coefficients).real(); }
  void advance() { coefficients = coefficients.cwiseProduct(values); }
};

} // namespace

Eigen::VectorXd filter_modes(const KoopmanModel &model, const Eigen::VectorXd &z1, Eigen::Index k) {
  if (z1.size() != model.latent_dim()) {
    throw InputError("filter_modes: latent dimension mismatch");
  }
  FilteredPropagator prop(model, z1);
  for (Eigen::Index i = 0; i < k; ++i) {
    prop.advance();
  }
  return prop.state();
}

LatentRollout propagate(const KoopmanModel &model, const Eigen::VectorXd &z1, Eigen::Index steps,
                        bool filtered) {
  if (steps < 0) {
    throw InputError("rollout: steps must be non-negative");
  }
  if (z1.size() != model.latent_dim()) {
    throw InputError("rollout: latent dimension mismatch");
  }
  LatentRollout out;
  out.states.resize(z1.size(), steps + 1);
  if (filtered && !model.filtering_available()) {
    out.warning = "filtering unavailable (" + model.spectrum_error + "); rollout is unfiltered";
    filtered = false;
  }
  out.filtered = filtered;

  auto check = [](const Eigen::VectorXd &z, Eigen::Index step) {
    if (!z.allFinite()) {
      throw RolloutDiverged(step, "rollout diverged: non-finite latent state at step " +
                                      std::to_string(step));
    }
  };
  if (filtered) {
    FilteredPropagator prop(model, z1);
    for (Eigen::Index i = 0; i <= steps; ++i) {
      out.states.col(i) = prop.state();
      check(out.states.col(i), i);
      prop.advance();
    }
  } else {
    out.states.col(0) = z1;
    check(z1, 0);
    for (Eigen::Index i = 1; i <= steps; ++i) {
      out.states.col(i).noalias() = model.transition * out.states.col(i - 1);
      check(out.states.col(i), i);
    }
  }
  return out;
}

Rollout rollout(const KoopmanModel &model, const Eigen::VectorXd &x1, Eigen::Index steps,
                bool filtered) {
  if (!model.map) {
    throw InputError("rollout: model has no observable map");
  }
  const Eigen::VectorXd z1 = model.map->encode(x1);
  auto latent = propagate(model, z1, steps, filtered);
  Rollout out;
  out.decoded = model.map->decode(latent.states);
  out.latents = std::move(latent.states);
  out.filtered = latent.filtered;
  out.warning = std::move(latent.warning);
  return out;
}

} // namespace admd
