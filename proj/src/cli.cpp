#include "admd/cli.hpp"

#include "admd/corpus.hpp"
#include "admd/delay.hpp"
#include "admd/errors.hpp"
#include "admd/metrics.hpp"
#include "admd/model_io.hpp"
#include "admd/plot.hpp"
#include "admd/training.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace admd::cli {

namespace fs = std::filesystem;

std::string character_of(const std::string &id) {
  const auto pos = id.find_last_of('_');
  if (pos == std::string::npos || pos + 1 == id.size()) {
    return id;
  }
  for (std::size_t i = pos + 1; i < id.size(); ++i) {
    if (id[i] < '0' || id[i] > '9') {
      return id;
    }
  }
  return id.substr(0, pos);
}

namespace {

struct TrainArgs {
  std::string corpus;
  std::string out;
  std::string method = "admd";
  int degree = 3;
  int d_poly = 2;
  int log_every = 0;
  TrainingConfig cfg;
  long long delay = 20;
  long long latent_dim = 20;
  long long hid_width = 20;
  std::string activation = "elu";
  std::string k_mode = "differentiated";
};

struct EvalArgs {
  std::string corpus;
  std::vector<std::string> models;
  std::string out;
  std::string split = "all";
  bool filter = false;
  bool refit_per_character = false;
  EvalOptions opts;
};

struct PlotArgs {
  std::string corpus;
  std::string model;
  std::string out;
  int noisy = 0;
  double sigma = 0.05;
  std::uint64_t seed = 0;
  bool filter = false;
};

Corpus load_normalized(const std::string &root, std::ostream &err) {
  Corpus corpus = load_corpus(root);
  for (const auto &r : corpus.rejected) {
    err << "warning: rejected '" << r.id << "': " << r.reason << '\n';
  }
  for (auto &t : corpus.trajectories) {
    t = normalize(t);
  }
  return corpus;
}

void ensure_dir(const std::string &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw InputError("cannot create output directory '" + dir + "'");
  }
}

template <class Fn> void write_file(const fs::path &file, Fn &&fn) {
  std::ofstream out(file);
  if (!out) {
    throw InputError("cannot write " + file.string());
  }
  fn(out);
  if (!out) {
    throw InputError("failed writing " + file.string());
  }
}

int cmd_train(const TrainArgs &a, std::ostream &out, std::ostream &err) {
  const Corpus corpus = load_normalized(a.corpus, err);
  const auto train_set = corpus.select(Split::Train);
  if (train_set.empty()) {
    throw InputError("corpus '" + a.corpus + "' has no loadable training trajectories");
  }
  ensure_dir(a.out);

  ModelDocument doc;
  for (const auto &t : train_set) {
    doc.normalization[t.id] = t.normalization;
  }

  if (a.method == "pdmd") {
    if (a.degree < 1 || a.d_poly < 0) {
      throw InputError("--degree must be >= 1 and --d-poly >= 0");
    }
    std::vector<DelayEmbedding> embeddings;
    for (const auto &t : train_set) {
      embeddings.push_back(embed(t, a.d_poly));
    }
    auto map = std::make_shared<const PolynomialDictionary>(corpus.n * (a.d_poly + 1), a.degree);
    doc.method = "pdmd";
    doc.name = "pdmd" + std::to_string(a.degree);
    doc.model = fit(std::move(map), embeddings, a.cfg.pinv_rel_tol);
    doc.config = {{"degree", a.degree}, {"d_poly", a.d_poly}, {"pinv_rel_tol", a.cfg.pinv_rel_tol}};
    save_model(doc, fs::path(a.out) / "model.json");
    out << "fitted " << doc.name << " (" << doc.model.latent_dim() << " observables) on "
        << train_set.size() << " trajectories -> " << (fs::path(a.out) / "model.json").string() << '\n';
    return 0;
  }
  if (a.method != "admd") {
    throw InputError("unknown --method '" + a.method + "' (expected admd or pdmd)");
  }

  TrainingConfig cfg = a.cfg;
  cfg.delay = a.delay;
  cfg.arch.latent_dim = a.latent_dim;
  cfg.arch.hid_width = a.hid_width;
  cfg.arch.activation = activation_from_string(a.activation);
  cfg.k_mode = k_mode_from_string(a.k_mode);
  cfg.validate();

  const fs::path loss_path = fs::path(a.out) / "loss.csv";
  try {
    auto result = train(train_set, cfg, [&](const EpochRecord &r) {
      if (a.log_every > 0 && r.epoch % a.log_every == 0) {
        err << "epoch " << r.epoch << " total " << r.loss.total << " lin " << r.loss.lin << " pred "
            << r.loss.pred << " recon " << r.loss.recon << '\n';
      }
    });
    write_file(loss_path, [&](std::ostream &o) { write_loss_history_csv(o, result.history); });
    doc.method = "admd";
    doc.name = "admd";
    doc.model = std::move(result.model);
    doc.config = to_json(cfg);
    save_model(doc, fs::path(a.out) / "model.json");
    out << "trained admd on " << train_set.size() << " trajectories for " << cfg.epochs
        << " epochs -> " << (fs::path(a.out) / "model.json").string() << '\n';
    return 0;
  } catch (const TrainingDiverged &e) {
    write_file(loss_path, [&](std::ostream &o) { write_loss_history_csv(o, e.history()); });
    throw;
  }
}

std::vector<Trajectory> pick(const Corpus &corpus, const std::string &split) {
  if (split == "train") {
    return corpus.select(Split::Train);
  }
  if (split == "test") {
    return corpus.select(Split::Test);
  }
  if (split == "all") {
    auto all = corpus.select(Split::Train);
    auto test = corpus.select(Split::Test);
    all.insert(all.end(), test.begin(), test.end());
    return all;
  }
  throw InputError("--split must be train, test or all");
}

void check_dims(const ModelDocument &doc, const Corpus &corpus, const std::string &path) {
  if (doc.model.state_dim != corpus.n) {
    throw InputError("model '" + path + "' has state dimension " +
                     std::to_string(doc.model.state_dim) + " but corpus has n = " +
                     std::to_string(corpus.n));
  }
}

// Per-character K with the model's observables held fixed.
ErrorReport evaluate_refit(const ModelDocument &doc, const std::vector<Trajectory> &set,
                           const Corpus &corpus, const EvalOptions &opts, double rel_tol) {
  std::map<std::string, std::vector<Trajectory>> groups;
  for (const auto &t : set) {
    groups[character_of(t.id)].push_back(t);
  }
  ErrorReport report;
  report.method = doc.name + "-refit";
  report.trials = opts.trials;
  for (const auto &t : set) {
    std::vector<DelayEmbedding> embeddings;
    for (const auto &g : groups[character_of(t.id)]) {
      embeddings.push_back(embed(g, doc.model.delay));
    }
    const KoopmanModel local = fit(doc.model.map, embeddings, rel_tol);
    auto single = evaluate(local, report.method, {t}, corpus, opts);
    report.rows.push_back(single.rows.front());
  }
  return report;
}

int cmd_evaluate(const EvalArgs &a, std::ostream &out, std::ostream &err) {
  const Corpus corpus = load_normalized(a.corpus, err);
  const auto set = pick(corpus, a.split);
  if (set.empty()) {
    throw InputError("no trajectories to evaluate");
  }
  ensure_dir(a.out);
  EvalOptions opts = a.opts;
  opts.filtered = a.filter;

  std::vector<ErrorReport> reports;
  for (const auto &path : a.models) {
    const ModelDocument doc = load_model(path);
    check_dims(doc, corpus, path);
    if (opts.filtered && !doc.model.filtering_available()) {
      err << "warning: " << path << ": " << doc.model.spectrum_error << "; evaluating unfiltered\n";
    }
    if (a.refit_per_character) {
      reports.push_back(evaluate_refit(doc, set, corpus, opts,
                                       doc.config.value("pinv_rel_tol", linalg::kDefaultPinvRelTol)));
    } else {
      reports.push_back(evaluate(doc.model, doc.name, set, corpus, opts));
    }
    for (const auto &r : reports.back().rows) {
      if (r.single_diverged || r.diverged_trials > 0) {
        err << "warning: " << reports.back().method << " '" << r.id << "': "
            << (r.single_diverged ? "single rollout diverged; " : "") << r.diverged_trials
            << " diverged noisy trials excluded\n";
      }
    }
  }

  const auto table = compare_table(reports);
  const fs::path dir(a.out);
  write_file(dir / "errors.csv", [&](std::ostream &o) { write_error_csv(o, reports); });
  write_file(dir / "table.csv", [&](std::ostream &o) { write_table_csv(o, table); });
  write_file(dir / "table.txt", [&](std::ostream &o) { write_table_text(o, table); });
  write_table_text(out, table);
  return 0;
}

int cmd_plot(const PlotArgs &a, std::ostream &out, std::ostream &err) {
  const Corpus corpus = load_normalized(a.corpus, err);
  const ModelDocument doc = load_model(a.model);
  check_dims(doc, corpus, a.model);
  if (corpus.n != 2) {
    throw InputError("plot requires 2-D trajectories");
  }
  if (a.noisy < 0) {
    throw InputError("--noisy must be non-negative");
  }
  ensure_dir(a.out);

  std::map<std::string, std::vector<Trajectory>> groups;
  for (const auto &t : pick(corpus, "all")) {
    groups[character_of(t.id)].push_back(t);
  }
  EvalOptions opts;
  opts.sigma = a.sigma;
  opts.seed = a.seed;
  const bool filtered = a.filter;

  for (const auto &[character, demos] : groups) {
    std::vector<plot::Polyline> lines;
    std::vector<std::string> notes;
    for (const auto &t : demos) {
      const auto raw = t.normalization.invert(t.points);
      lines.push_back({raw, plot::kOriginal, 1.0, 1.5});
    }
    for (const auto &t : demos) {
      const char *color = corpus.is_train(t.id) ? plot::kTrain : plot::kTest;
      const DelayEmbedding e = embed(t, doc.model.delay);
      const Eigen::Index steps = e.length() - 1;
      auto draw = [&](const Eigen::VectorXd &x1, double opacity, double width) {
        try {
          const Rollout r = rollout(doc.model, x1, steps, filtered);
          lines.push_back({t.normalization.invert(unembed(r.decoded, corpus.n)), color, opacity, width});
          return true;
        } catch (const NumericalError &ex) {
          return false;
        }
      };
      if (!draw(e.columns.col(0), 1.0, 1.5)) {
        notes.push_back(t.id + ": rollout diverged");
        err << "warning: " << t.id << ": rollout diverged, plotting original only\n";
        continue;
      }
      for (int k = 0; k < a.noisy; ++k) {
        if (!draw(perturbed_initial(e.columns.col(0), t.id, k, opts), 0.3, 1.0)) {
          notes.push_back(t.id + ": noisy rollout " + std::to_string(k) + " diverged");
        }
      }
    }
    const fs::path file = fs::path(a.out) / (character + ".svg");
    write_file(file, [&](std::ostream &o) { o << plot::render_svg(character, lines, notes); });
    out << file.string() << '\n';
  }
  return 0;
}

int cmd_convert_check(const std::string &root, std::ostream &out, std::ostream &err) {
  const Corpus corpus = load_corpus(root);
  out << "corpus '" << corpus.name << "': n = " << corpus.n << ", " << corpus.train_ids.size()
      << " train, " << corpus.test_ids.size() << " test\n";
  for (const auto &t : corpus.trajectories) {
    out << "  " << t.id << " (" << (corpus.is_train(t.id) ? "train" : "test") << "): "
        << t.length() << " samples\n";
  }
  for (const auto &r : corpus.rejected) {
    err << "rejected '" << r.id << "': " << r.reason << '\n';
  }
  return corpus.rejected.empty() ? 0 : 1;
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Autoencoder DMD: learn linear latent models of demonstrated trajectories"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  TrainArgs ta;
  auto *train_cmd = app.add_subcommand("train", "Train aDMD or fit polynomial eDMD on the training split");
  train_cmd->add_option("--corpus", ta.corpus, "Corpus directory")->required();
  train_cmd->add_option("--out", ta.out, "Output directory for model.json and loss.csv")->required();
  train_cmd->add_option("--method", ta.method, "admd | pdmd");
  train_cmd->add_option("--degree", ta.degree, "pdmd: polynomial degree");
  train_cmd->add_option("--d-poly", ta.d_poly, "pdmd: delay count of the dictionary input");
  train_cmd->add_option("--delay", ta.delay, "aDMD delay coordinates d");
  train_cmd->add_option("--latent-dim", ta.latent_dim, "Koopman dimension m");
  train_cmd->add_option("--hid-width", ta.hid_width, "hidden layer width");
  train_cmd->add_option("--num-hidden", ta.cfg.arch.num_hidden, "hidden layers per network");
  train_cmd->add_option("--activation", ta.activation, "hidden activation: elu | linear");
  train_cmd->add_option("--alpha", ta.cfg.alpha, "prediction loss weight");
  train_cmd->add_option("--beta", ta.cfg.beta, "L2 weight regularization");
  train_cmd->add_option("--epochs", ta.cfg.epochs, "training epochs");
  train_cmd->add_option("--lr", ta.cfg.learning_rate, "Adam learning rate");
  train_cmd->add_option("--final-lr", ta.cfg.final_learning_rate,
                        "cosine-decay the learning rate to this value (negative = constant)");
  train_cmd->add_option("--adam-beta1", ta.cfg.adam_beta1, "Adam first-moment decay");
  train_cmd->add_option("--adam-beta2", ta.cfg.adam_beta2, "Adam second-moment decay");
  train_cmd->add_option("--adam-eps", ta.cfg.adam_epsilon, "Adam epsilon");
  train_cmd->add_option("--sigma", ta.cfg.noise_sigma, "training noise stddev");
  train_cmd->add_option("--seed", ta.cfg.seed, "random seed");
  train_cmd->add_option("--k-mode", ta.k_mode,
                        "differentiated (K refit inside the loss) | frozen (K refit every --refit-period epochs, held constant)");
  train_cmd->add_option("--refit-period", ta.cfg.refit_period, "frozen mode: epochs between K refits");
  train_cmd->add_option("--final-fit-draws", ta.cfg.final_fit_draws,
                        "noise draws pooled into the final K fit (0 = clean encodings)");
  train_cmd->add_option("--grad-clip", ta.cfg.grad_clip, "maximum gradient norm");
  train_cmd->add_option("--rel-tol", ta.cfg.pinv_rel_tol, "pseudoinverse relative cutoff");
  train_cmd->add_option("--log-every", ta.log_every, "print loss every N epochs (0: quiet)");

  EvalArgs ea;
  auto *eval_cmd = app.add_subcommand("evaluate", "Single and noisy reconstruction errors");
  eval_cmd->add_option("--corpus", ea.corpus, "Corpus directory")->required();
  eval_cmd->add_option("--model", ea.models, "model.json (repeat to compare)")->required();
  eval_cmd->add_option("--out", ea.out, "Output directory")->required();
  eval_cmd->add_option("--split", ea.split, "train | test | all");
  eval_cmd->add_option("--trials", ea.opts.trials, "noisy initial conditions per trajectory");
  eval_cmd->add_option("--sigma", ea.opts.sigma, "initial-condition noise stddev");
  eval_cmd->add_option("--seed", ea.opts.seed, "random seed");
  eval_cmd->add_flag("--filter", ea.filter, "drop unstable eigenmodes before decoding");
  eval_cmd->add_flag("--refit-per-character", ea.refit_per_character,
                     "fit one K per character with the model's observables fixed");

  PlotArgs pa;
  auto *plot_cmd = app.add_subcommand("plot", "SVG reconstructions per character");
  plot_cmd->add_option("--corpus", pa.corpus, "Corpus directory")->required();
  plot_cmd->add_option("--model", pa.model, "model.json")->required();
  plot_cmd->add_option("--out", pa.out, "Output directory")->required();
  plot_cmd->add_option("--noisy", pa.noisy, "perturbed rollouts overlaid per demonstration");
  plot_cmd->add_option("--sigma", pa.sigma, "initial-condition noise stddev");
  plot_cmd->add_option("--seed", pa.seed, "random seed");
  plot_cmd->add_flag("--filter", pa.filter, "drop unstable eigenmodes before decoding");

  std::string check_root;
  auto *check_cmd = app.add_subcommand("convert-check", "Validate a corpus directory");
  check_cmd->add_option("--corpus", check_root, "Corpus directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    // Help requests print the help of the subcommand that raised them.
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (train_cmd->parsed()) {
      return cmd_train(ta, out, err);
    }
    if (eval_cmd->parsed()) {
      return cmd_evaluate(ea, out, err);
    }
    if (plot_cmd->parsed()) {
      return cmd_plot(pa, out, err);
    }
    return cmd_convert_check(check_root, out, err);
  } catch (const InputError &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError &e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace admd::cli
