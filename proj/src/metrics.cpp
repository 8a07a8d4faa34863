#include "admd/metrics.hpp"

#include "admd/format.hpp"
#include "admd/random.hpp"
#include "admd/training.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace admd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t fnv1a(const std::string &s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Shifted mean: exactly values[0] when every entry is equal.
double stable_mean(const std::vector<double> &values) {
  if (values.empty()) {
    return kInf;
  }
  double acc = 0.0;
  for (double v : values) {
    acc += v - values.front();
  }
  return values.front() + acc / static_cast<double>(values.size());
}

void check_compatible(const KoopmanModel &model, const Trajectory &t) {
  if (t.dim() != model.state_dim) {
    throw InputError("trajectory '" + t.id + "' has dimension " + std::to_string(t.dim()) +
                     " but the model expects " + std::to_string(model.state_dim));
  }
  if (t.length() <= model.delay + 1) {
    throw InputError("trajectory '" + t.id + "' is too short for delay " +
                     std::to_string(model.delay));
  }
}

} // namespace

SingleErrors errors_from_initial(const KoopmanModel &model, const DelayEmbedding &clean,
                                 const Eigen::VectorXd &initial, bool filtered) {
  const Eigen::Index steps = clean.length() - 1;
  SingleErrors out;
  try {
    const Rollout r = rollout(model, initial, steps, filtered);
    const Eigen::MatrixXd truth_latent = model.map->encode(clean.columns);
    const Eigen::Index n = clean.n;
    for (Eigen::Index j = 1; j <= steps; ++j) {
      out.lin += mse(r.latents.col(j) - truth_latent.col(j));
      out.pred += mse(r.decoded.col(j).head(n) - clean.columns.col(j).head(n));
    }
    if (!std::isfinite(out.lin) || !std::isfinite(out.pred)) {
      throw NumericalError("non-finite error sum");
    }
  } catch (const NumericalError &) {
    out = {kInf, kInf, true};
  }
  return out;
}

SingleErrors single_errors(const KoopmanModel &model, const Trajectory &t, bool filtered) {
  check_compatible(model, t);
  const DelayEmbedding e = embed(t, model.delay);
  return errors_from_initial(model, e, e.columns.col(0), filtered);
}

Eigen::VectorXd perturbed_initial(const Eigen::VectorXd &x1, const std::string &id, int trial,
                                  const EvalOptions &opts) {
  Eigen::VectorXd x = x1;
  if (opts.sigma == 0.0) {
    return x;
  }
  auto rng = make_rng({opts.seed, fnv1a(id), static_cast<std::uint64_t>(trial)});
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x(i) += opts.sigma * truncated_standard_normal(rng, opts.truncation);
  }
  return x;
}

NoisyErrors noisy_errors(const KoopmanModel &model, const Trajectory &t, const EvalOptions &opts) {
  if (opts.trials < 1) {
    throw InputError("noisy_errors: trials must be at least 1");
  }
  if (!(opts.sigma >= 0.0)) {
    throw InputError("noisy_errors: sigma must be non-negative");
  }
  check_compatible(model, t);
  const DelayEmbedding e = embed(t, model.delay);
  std::vector<double> lin;
  std::vector<double> pred;
  NoisyErrors out;
  out.trials = opts.trials;
  for (int i = 0; i < opts.trials; ++i) {
    const auto x1 = perturbed_initial(e.columns.col(0), t.id, i, opts);
    const auto err = errors_from_initial(model, e, x1, opts.filtered);
    if (err.diverged) {
      ++out.diverged_trials;
      continue;
    }
    lin.push_back(err.lin);
    pred.push_back(err.pred);
  }
  out.lin = stable_mean(lin);
  out.pred = stable_mean(pred);
  return out;
}

ErrorAggregate ErrorReport::aggregate(const std::string &split) const {
  ErrorAggregate agg;
  agg.split = split;
  for (const auto &r : rows) {
    if (split != "all" && split != to_string(r.split)) {
      continue;
    }
    agg.e_lin += r.e_lin;
    agg.e_pred += r.e_pred;
    agg.e_n_lin += r.e_n_lin;
    agg.e_n_pred += r.e_n_pred;
    agg.diverged_trials += r.diverged_trials;
    ++agg.count;
  }
  if (agg.count > 0) {
    const auto c = static_cast<double>(agg.count);
    agg.e_lin /= c;
    agg.e_pred /= c;
    agg.e_n_lin /= c;
    agg.e_n_pred /= c;
  }
  return agg;
}

std::vector<std::string> ErrorReport::ids() const {
  std::vector<std::string> out;
  for (const auto &r : rows) {
    out.push_back(r.id);
  }
  return out;
}

ErrorReport evaluate(const KoopmanModel &model, const std::string &method,
                     const std::vector<Trajectory> &trajectories, const Corpus &split_source,
                     const EvalOptions &opts) {
  ErrorReport report;
  report.method = method;
  report.trials = opts.trials;
  for (const auto &t : trajectories) {
    TrajectoryErrors row;
    row.id = t.id;
    row.split = split_source.is_train(t.id) ? Split::Train : Split::Test;
    const auto single = single_errors(model, t, opts.filtered);
    row.e_lin = single.lin;
    row.e_pred = single.pred;
    row.single_diverged = single.diverged;
    const auto noisy = noisy_errors(model, t, opts);
    row.e_n_lin = noisy.lin;
    row.e_n_pred = noisy.pred;
    row.diverged_trials = noisy.diverged_trials;
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_error_csv(std::ostream &out, const std::vector<ErrorReport> &reports) {
  out << "method,trajectory_id,split,e_lin,e_pred,e_n_lin,e_n_pred,diverged_trials\n";
  for (const auto &rep : reports) {
    for (const auto &r : rep.rows) {
      out << rep.method << ',' << r.id << ',' << to_string(r.split) << ',' << format_double(r.e_lin)
          << ',' << format_double(r.e_pred) << ',' << format_double(r.e_n_lin) << ','
          << format_double(r.e_n_pred) << ',' << r.diverged_trials << '\n';
    }
    for (const char *split : {"train", "test", "all"}) {
      const auto agg = rep.aggregate(split);
      if (agg.count == 0) {
        continue;
      }
      out << rep.method << ",mean," << split << ',' << format_double(agg.e_lin) << ','
          << format_double(agg.e_pred) << ',' << format_double(agg.e_n_lin) << ','
          << format_double(agg.e_n_pred) << ',' << agg.diverged_trials << '\n';
    }
  }
}

ComparisonTable compare_table(const std::vector<ErrorReport> &reports) {
  if (reports.empty()) {
    throw InputError("compare_table: no reports");
  }
  const auto reference = reports.front().ids();
  const std::set<std::string> ref_set(reference.begin(), reference.end());
  for (const auto &rep : reports) {
    const auto ids = rep.ids();
    const std::set<std::string> s(ids.begin(), ids.end());
    if (s != ref_set) {
      std::ostringstream msg;
      msg << "compare_table: '" << rep.method << "' covers a different trajectory set;";
      for (const auto &id : s) {
        if (ref_set.count(id) == 0) {
          msg << " +" << id;
        }
      }
      for (const auto &id : ref_set) {
        if (s.count(id) == 0) {
          msg << " -" << id;
        }
      }
      throw InputError(msg.str());
    }
  }

  ComparisonTable table;
  table.rows = {{"single", "pred", {}}, {"single", "lin", {}}, {"noisy", "pred", {}}, {"noisy", "lin", {}}};
  for (const auto &rep : reports) {
    table.methods.push_back(rep.method);
    const auto agg = rep.aggregate("all");
    table.rows[0].values.push_back(agg.e_pred);
    table.rows[1].values.push_back(agg.e_lin);
    table.rows[2].values.push_back(agg.e_n_pred);
    table.rows[3].values.push_back(agg.e_n_lin);
  }
  return table;
}

void write_table_csv(std::ostream &out, const ComparisonTable &table) {
  out << "reconstruction,error";
  for (const auto &m : table.methods) {
    out << ',' << m;
  }
  out << '\n';
  for (const auto &row : table.rows) {
    out << row.reconstruction << ',' << row.error;
    for (double v : row.values) {
      out << ',' << format_double(v);
    }
    out << '\n';
  }
}

void write_table_text(std::ostream &out, const ComparisonTable &table) {
  constexpr int label = 18;
  constexpr int cell = 16;
  out << std::left << std::setw(label) << "";
  for (const auto &m : table.methods) {
    out << std::right << std::setw(cell) << m;
  }
  out << '\n';
  std::string section;
  for (const auto &row : table.rows) {
    if (row.reconstruction != section) {
      section = row.reconstruction;
      out << "Average error per trajectory ("
          << (section == "single" ? "single reconstruction" : "noisy reconstruction") << ")\n";
    }
    const std::string name = row.error == "pred" ? "Prediction Error" : "Linear Error";
    out << std::left << std::setw(label) << name;
    for (double v : row.values) {
      std::ostringstream cellv;
      cellv << std::setprecision(7) << v;
      out << std::right << std::setw(cell) << cellv.str();
    }
    out << '\n';
  }
}

} // namespace admd
