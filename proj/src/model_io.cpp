#include "admd/model_io.hpp"

#include "admd/errors.hpp"

#include <fstream>

namespace admd {

using nlohmann::json;

namespace {

std::vector<double> row_major(const Eigen::MatrixXd &m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out.push_back(m(i, j));
    }
  }
  return out;
}

Eigen::MatrixXd from_row_major(const std::vector<double> &v, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) {
    throw InputError("model: matrix has " + std::to_string(v.size()) + " entries, expected " +
                     std::to_string(rows * cols));
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = v[static_cast<std::size_t>(i * cols + j)];
    }
  }
  return m;
}

std::vector<double> to_vector(const Eigen::VectorXd &v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vector(const std::vector<double> &v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json layers_to_json(const Mlp &mlp) {
  json arr = json::array();
  for (const auto &l : mlp.layers()) {
    arr.push_back({{"rows", l.weights.rows()},
                   {"cols", l.weights.cols()},
                   {"weights", row_major(l.weights)},
                   {"bias", to_vector(l.bias)}});
  }
  return arr;
}

Mlp layers_from_json(const json &arr, Activation activation) {
  std::vector<DenseLayer> layers;
  for (const auto &l : arr) {
    const auto rows = l.at("rows").get<Eigen::Index>();
    const auto cols = l.at("cols").get<Eigen::Index>();
    layers.push_back({from_row_major(l.at("weights").get<std::vector<double>>(), rows, cols),
                      from_vector(l.at("bias").get<std::vector<double>>())});
  }
  return Mlp(std::move(layers), activation);
}

json map_to_json(const ObservableMap &map) {
  if (const auto *ae = dynamic_cast<const Autoencoder *>(&map)) {
    const auto &p = ae->params();
    return {{"kind", "autoencoder"},
            {"architecture",
             {{"input_dim", p.arch.input_dim},
              {"latent_dim", p.arch.latent_dim},
              {"hid_width", p.arch.hid_width},
              {"num_hidden", p.arch.num_hidden},
              {"activation", to_string(p.arch.activation)}}},
            {"encoder", layers_to_json(p.encoder)},
            {"decoder", layers_to_json(p.decoder)}};
  }
  if (const auto *poly = dynamic_cast<const PolynomialDictionary *>(&map)) {
    return {{"kind", "polynomial"}, {"base_dim", poly->input_dim()}, {"degree", poly->degree()}};
  }
  if (dynamic_cast<const IdentityMap *>(&map) != nullptr) {
    return {{"kind", "identity"}, {"dim", map.input_dim()}};
  }
  throw InputError("model: unsupported observable map '" + map.kind() + "'");
}

std::shared_ptr<const ObservableMap> map_from_json(const json &j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "autoencoder") {
    const auto &a = j.at("architecture");
    AutoencoderParams p;
    p.arch.input_dim = a.at("input_dim").get<Eigen::Index>();
    p.arch.latent_dim = a.at("latent_dim").get<Eigen::Index>();
    p.arch.hid_width = a.at("hid_width").get<Eigen::Index>();
    p.arch.num_hidden = a.at("num_hidden").get<int>();
    p.arch.activation = activation_from_string(a.at("activation").get<std::string>());
    p.encoder = layers_from_json(j.at("encoder"), p.arch.activation);
    p.decoder = layers_from_json(j.at("decoder"), p.arch.activation);
    if (p.encoder.input_dim() != p.arch.input_dim || p.encoder.output_dim() != p.arch.latent_dim ||
        p.decoder.input_dim() != p.arch.latent_dim || p.decoder.output_dim() != p.arch.input_dim) {
      throw InputError("model: autoencoder layers do not match the architecture");
    }
    return std::make_shared<const Autoencoder>(std::move(p));
  }
  if (kind == "polynomial") {
    return std::make_shared<const PolynomialDictionary>(j.at("base_dim").get<Eigen::Index>(),
                                                        j.at("degree").get<int>());
  }
  if (kind == "identity") {
    return std::make_shared<const IdentityMap>(j.at("dim").get<Eigen::Index>());
  }
  throw InputError("model: unknown observable kind '" + kind + "'");
}

} // namespace

json to_json(const TrainingConfig &cfg) {
  return {{"alpha", cfg.alpha},
          {"beta", cfg.beta},
          {"epochs", cfg.epochs},
          {"learning_rate", cfg.learning_rate},
          {"final_learning_rate", cfg.final_learning_rate},
          {"adam_beta1", cfg.adam_beta1},
          {"adam_beta2", cfg.adam_beta2},
          {"adam_epsilon", cfg.adam_epsilon},
          {"noise_sigma", cfg.noise_sigma},
          {"seed", cfg.seed},
          {"k_mode", to_string(cfg.k_mode)},
          {"final_fit_draws", cfg.final_fit_draws},
          {"refit_period", cfg.refit_period},
          {"grad_clip", cfg.grad_clip},
          {"pinv_rel_tol", cfg.pinv_rel_tol},
          {"delay", cfg.delay},
          {"latent_dim", cfg.arch.latent_dim},
          {"hid_width", cfg.arch.hid_width},
          {"num_hidden", cfg.arch.num_hidden},
          {"activation", to_string(cfg.arch.activation)}};
}

json to_json(const ModelDocument &doc) {
  const auto &m = doc.model;
  if (!m.map) {
    throw InputError("model: no observable map");
  }
  json eigenvalues = json::array();
  if (m.spectrum) {
    for (Eigen::Index j = 0; j < m.spectrum->values.size(); ++j) {
      eigenvalues.push_back({m.spectrum->values(j).real(), m.spectrum->values(j).imag()});
    }
  }
  json norm = json::object();
  for (const auto &[id, nm] : doc.normalization) {
    norm[id] = {{"offset", to_vector(nm.offset)}, {"scale", to_vector(nm.scale)}};
  }
  return {{"format", "admd-model"},
          {"version", 1},
          {"method", doc.method},
          {"name", doc.name},
          {"state_dim", m.state_dim},
          {"delay", m.delay},
          {"latent_dim", m.latent_dim()},
          {"observables", map_to_json(*m.map)},
          {"koopman",
           {{"rows", m.transition.rows()},
            {"matrix", row_major(m.transition)},
            {"eigenvalues", eigenvalues},
            {"stable_set", m.stable_set},
            {"stability_margin", m.stability_margin},
            {"spectrum_error", m.spectrum_error}}},
          {"normalization", norm},
          {"config", doc.config}};
}

ModelDocument model_from_json(const json &j) {
  try {
    if (j.value("format", "") != "admd-model") {
      throw InputError("model: not an admd-model document");
    }
    ModelDocument doc;
    doc.method = j.at("method").get<std::string>();
    doc.name = j.value("name", doc.method);
    auto map = map_from_json(j.at("observables"));
    const auto &k = j.at("koopman");
    const auto rows = k.at("rows").get<Eigen::Index>();
    if (rows != map->latent_dim()) {
      throw InputError("model: koopman matrix size " + std::to_string(rows) +
                       " does not match latent dimension " + std::to_string(map->latent_dim()));
    }
    auto transition = from_row_major(k.at("matrix").get<std::vector<double>>(), rows, rows);
    doc.model = make_model(std::move(transition), std::move(map), j.at("delay").get<Eigen::Index>(),
                           j.at("state_dim").get<Eigen::Index>(),
                           k.value("stability_margin", kStabilityMargin));
    if (doc.model.map->input_dim() != doc.model.state_dim * (doc.model.delay + 1)) {
      throw InputError("model: observable input dimension does not equal n(d+1)");
    }
    const json norm = j.value("normalization", json::object());
    for (const auto &[id, nm] : norm.items()) {
      doc.normalization[id] = {from_vector(nm.at("offset").get<std::vector<double>>()),
                               from_vector(nm.at("scale").get<std::vector<double>>())};
    }
    doc.config = j.value("config", json::object());
    return doc;
  } catch (const json::exception &e) {
    throw InputError(std::string("model: ") + e.what());
  }
}

void save_model(const ModelDocument &doc, const std::filesystem::path &file) {
  std::ofstream out(file);
  if (!out) {
    throw InputError("cannot write " + file.string());
  }
  out << to_json(doc).dump(1) << '\n';
}

ModelDocument load_model(const std::filesystem::path &file) {
  std::ifstream in(file);
  if (!in) {
    throw InputError("cannot open model " + file.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw InputError(file.string() + ": " + e.what());
  }
  return model_from_json(j);
}

} // namespace admd
