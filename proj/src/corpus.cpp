#include "admd/corpus.hpp"

#include "admd/errors.hpp"
#include "admd/format.hpp"
#include "admd/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace admd {

namespace fs = std::filesystem;

Normalization Normalization::identity(Eigen::Index n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
}

Eigen::MatrixXd Normalization::apply(const Eigen::MatrixXd &raw) const {
  return (raw.colwise() - offset).array().colwise() / scale.array();
}

Eigen::MatrixXd Normalization::invert(const Eigen::MatrixXd &normalized) const {
  return (normalized.array().colwise() * scale.array()).matrix().colwise() + offset;
}

Trajectory::Trajectory(std::string id_, Eigen::MatrixXd points_)
    : id(std::move(id_)), points(std::move(points_)),
      normalization(Normalization::identity(points.rows())) {}

void Trajectory::validate() const {
  if (points.cols() < 2) {
    throw InputError("trajectory '" + id + "' has fewer than 2 samples");
  }
  if (points.rows() < 1) {
    throw InputError("trajectory '" + id + "' has zero state dimension");
  }
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    if (!points.col(j).allFinite()) {
      throw InputError("trajectory '" + id + "' sample " + std::to_string(j) + " is not finite");
    }
  }
}

const char *to_string(Split split) { return split == Split::Train ? "train" : "test"; }

void Corpus::validate() const {
  std::set<std::string> seen;
  for (const auto &t : trajectories) {
    if (!seen.insert(t.id).second) {
      throw InputError("duplicate trajectory id '" + t.id + "'");
    }
  }
  const std::set<std::string> train(train_ids.begin(), train_ids.end());
  for (const auto &id : test_ids) {
    if (train.count(id) != 0) {
      throw InputError("id '" + id + "' is in both train_ids and test_ids");
    }
  }
  if (train.size() != train_ids.size()) {
    throw InputError("train_ids contains duplicates");
  }
  if (std::set<std::string>(test_ids.begin(), test_ids.end()).size() != test_ids.size()) {
    throw InputError("test_ids contains duplicates");
  }
}

const Trajectory *Corpus::find(const std::string &id) const {
  auto it = std::find_if(trajectories.begin(), trajectories.end(),
                         [&](const Trajectory &t) { return t.id == id; });
  return it == trajectories.end() ? nullptr : &*it;
}

bool Corpus::is_train(const std::string &id) const {
  return std::find(train_ids.begin(), train_ids.end(), id) != train_ids.end();
}

std::vector<Trajectory> Corpus::select(Split split) const {
  const auto &ids = split == Split::Train ? train_ids : test_ids;
  std::vector<Trajectory> out;
  out.reserve(ids.size());
  for (const auto &id : ids) {
    if (const Trajectory *t = find(id)) {
      out.push_back(*t);
    }
  }
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string &line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    field.erase(0, field.find_first_not_of(" \t\r"));
    field.erase(field.find_last_not_of(" \t\r") + 1);
    fields.push_back(field);
  }
  return fields;
}

std::vector<std::string> header_for(Eigen::Index n) {
  static const char *names[] = {"x", "y", "z"};
  std::vector<std::string> h{"t"};
  for (Eigen::Index i = 0; i < n; ++i) {
    h.push_back(n <= 3 ? names[i] : "x" + std::to_string(i));
  }
  return h;
}

} // namespace

Trajectory read_trajectory_csv(const fs::path &file, const std::string &id,
                               Eigen::Index expected_dim) {
  std::ifstream in(file);
  if (!in) {
    throw InputError(file.string() + ": cannot open");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw InputError(file.string() + ": empty file");
  }
  const auto header = split_fields(line);
  const bool has_t = !header.empty() && header.front() == "t";
  const auto value_cols = static_cast<Eigen::Index>(header.size()) - (has_t ? 1 : 0);
  if (value_cols != expected_dim) {
    throw InputError(file.string() + ": header has " + std::to_string(value_cols) +
                     " value columns, manifest n = " + std::to_string(expected_dim));
  }

  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw InputError(file.string() + ": row " + std::to_string(row) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(header.size()));
    }
    for (std::size_t c = has_t ? 1 : 0; c < fields.size(); ++c) {
      double v = 0.0;
      std::size_t used = 0;
      try {
        v = std::stod(fields[c], &used);
      } catch (const std::exception &) {
        used = 0;
      }
      if (used == 0 || used != fields[c].size()) {
        throw InputError(file.string() + ": row " + std::to_string(row) + " field '" +
                         fields[c] + "' is not a number");
      }
      if (!std::isfinite(v)) {
        throw InputError(file.string() + ": row " + std::to_string(row) + " is not finite");
      }
      values.push_back(v);
    }
  }
  const auto n_samples = static_cast<Eigen::Index>(values.size()) / expected_dim;
  Eigen::MatrixXd points =
      Eigen::Map<const Eigen::MatrixXd>(values.data(), expected_dim, n_samples);
  Trajectory t(id, std::move(points));
  try {
    t.validate();
  } catch (const InputError &e) {
    throw InputError(file.string() + ": " + e.what());
  }
  return t;
}

Corpus load_corpus(const fs::path &root) {
  const fs::path manifest_path = root / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) {
    throw InputError("no manifest: " + manifest_path.string());
  }
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception &e) {
    throw InputError(manifest_path.string() + ": " + e.what());
  }

  Corpus corpus;
  try {
    corpus.name = manifest.value("name", root.filename().string());
    corpus.n = manifest.at("n").get<Eigen::Index>();
    corpus.train_ids = manifest.at("train_ids").get<std::vector<std::string>>();
    corpus.test_ids = manifest.at("test_ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception &e) {
    throw InputError(manifest_path.string() + ": " + e.what());
  }
  if (corpus.n < 1) {
    throw InputError(manifest_path.string() + ": n must be positive");
  }
  corpus.validate();

  auto load_ids = [&](std::vector<std::string> &ids) {
    std::vector<std::string> kept;
    for (const auto &id : ids) {
      try {
        corpus.trajectories.push_back(read_trajectory_csv(root / (id + ".csv"), id, corpus.n));
        kept.push_back(id);
      } catch (const InputError &e) {
        corpus.rejected.push_back({id, e.what()});
      }
    }
    ids = std::move(kept);
  };
  load_ids(corpus.train_ids);
  load_ids(corpus.test_ids);
  corpus.validate();
  return corpus;
}

void save_corpus(const Corpus &corpus, const fs::path &root) {
  corpus.validate();
  fs::create_directories(root);
  nlohmann::json manifest = {{"name", corpus.name},
                             {"n", corpus.n},
                             {"train_ids", corpus.train_ids},
                             {"test_ids", corpus.test_ids}};
  std::ofstream(root / "manifest.json") << manifest.dump(2) << "\n";

  const auto header = header_for(corpus.n);
  for (const auto &t : corpus.trajectories) {
    std::ofstream out(root / (t.id + ".csv"));
    for (std::size_t i = 0; i < header.size(); ++i) {
      out << (i ? "," : "") << header[i];
    }
    out << "\n";
    for (Eigen::Index j = 0; j < t.length(); ++j) {
      out << j;
      for (Eigen::Index i = 0; i < t.dim(); ++i) {
        out << "," << format_double(t.points(i, j));
      }
      out << "\n";
    }
    if (!out) {
      throw InputError("failed writing " + (root / (t.id + ".csv")).string());
    }
  }
}

Trajectory normalize(const Trajectory &t) {
  t.validate();
  const Eigen::VectorXd mean = t.points.rowwise().mean();
  const Eigen::MatrixXd centered = t.points.colwise() - mean;
  Eigen::VectorXd scale = centered.cwiseAbs().rowwise().maxCoeff();
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    if (!(scale(i) > 0.0)) {
      scale(i) = 1.0;
    }
  }
  Trajectory out = t;
  out.points = centered.array().colwise() / scale.array();
  // Compose with any earlier map: raw = inner.scale * (scale * y + mean) + inner.offset.
  out.normalization.offset = t.normalization.offset + t.normalization.scale.cwiseProduct(mean);
  out.normalization.scale = t.normalization.scale.cwiseProduct(scale);
  return out;
}

Eigen::MatrixXd augment_noise(const Eigen::MatrixXd &states, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) {
    throw InputError("noise sigma must be non-negative, got " + format_double(sigma));
  }
  Eigen::MatrixXd out = states;
  if (sigma == 0.0) {
    return out;
  }
  auto rng = make_rng({seed});
  std::normal_distribution<double> normal(0.0, sigma);
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      out(i, j) += normal(rng);
    }
  }
  return out;
}

} // namespace admd
