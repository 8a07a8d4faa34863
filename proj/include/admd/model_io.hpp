#pragma once

#include "admd/corpus.hpp"
#include "admd/koopman.hpp"
#include "admd/training.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace admd {

/// Everything needed to re-run a fitted model: the observable map, K, and
/// the normalization of the trajectories it was fitted on.
struct ModelDocument {
  std::string method; ///< "admd" or "pdmd"
  std::string name;   ///< label used in reports, e.g. "admd" or "pdmd3"
  KoopmanModel model;
  std::map<std::string, Normalization> normalization;
  nlohmann::json config = nlohmann::json::object();
};

nlohmann::json to_json(const ModelDocument &doc);
/// Rebuilds the map and K; the spectrum and stable set are recomputed from K.
ModelDocument model_from_json(const nlohmann::json &j);

void save_model(const ModelDocument &doc, const std::filesystem::path &file);
ModelDocument load_model(const std::filesystem::path &file);

nlohmann::json to_json(const TrainingConfig &cfg);

} // namespace admd
