#include "admd/errors.hpp"
#include "admd/model_io.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace admd;
using admd::testing::spiral;
using admd::testing::temp_dir;

namespace {

std::vector<DelayEmbedding> spiral_embeddings(Eigen::Index d) {
  std::vector<DelayEmbedding> es;
  for (int i = 0; i < 3; ++i) {
    es.push_back(embed(spiral("s_" + std::to_string(i), 40, 4.0 + 0.5 * i, 0.3 * i), d));
  }
  return es;
}

} // namespace

TEST_CASE("autoencoder model round-trips through JSON bit-exactly") {
  AutoencoderArchitecture arch{6, 3, 5, 2, Activation::Elu};
  auto map = std::make_shared<Autoencoder>(init_params(4, arch));
  ModelDocument doc;
  doc.method = "admd";
  doc.name = "admd";
  doc.model = fit(map, spiral_embeddings(2));
  Normalization norm;
  norm.offset = Eigen::Vector2d(0.25, -1.0);
  norm.scale = Eigen::Vector2d(3.5, 3.5);
  doc.normalization["s_0"] = norm;
  TrainingConfig cfg;
  cfg.seed = 17;
  doc.config = to_json(cfg);

  const auto dir = temp_dir("model_io");
  save_model(doc, dir / "model.json");
  const ModelDocument back = load_model(dir / "model.json");
  CHECK(back.method == "admd");
  CHECK(back.model.transition == doc.model.transition);
  CHECK(back.model.delay == 2);
  CHECK(back.model.state_dim == 2);
  CHECK(back.model.stable_set == doc.model.stable_set);
  CHECK(back.normalization.at("s_0").offset == norm.offset);
  CHECK(back.normalization.at("s_0").scale == norm.scale);
  CHECK(back.config.at("seed") == 17);
  CHECK(back.config.at("alpha") == 100.0);

  const auto *ae = dynamic_cast<const Autoencoder *>(back.model.map.get());
  REQUIRE(ae != nullptr);
  CHECK(ae->params().flatten() == map->params().flatten());
  const Eigen::MatrixXd x = spiral_embeddings(2).front().columns;
  CHECK(back.model.map->encode(x) == map->encode(x));

  // Saving the loaded document reproduces the file byte for byte.
  save_model(back, dir / "again.json");
  CHECK(admd::testing::read_text(dir / "model.json") == admd::testing::read_text(dir / "again.json"));
}

TEST_CASE("polynomial model round-trips") {
  ModelDocument doc;
  doc.method = "pdmd";
  doc.name = "pdmd3";
  doc.model = fit(std::make_shared<PolynomialDictionary>(4, 3), spiral_embeddings(1));
  const ModelDocument back = model_from_json(to_json(doc));
  CHECK(back.name == "pdmd3");
  CHECK(back.model.transition == doc.model.transition);
  CHECK(back.model.map->kind() == "polynomial");
  CHECK(back.model.latent_dim() == 35);
}

TEST_CASE("matrices are stored row-major") {
  Eigen::MatrixXd k(2, 2);
  k << 0.5, 0.1, -0.2, 0.3;
  ModelDocument doc;
  doc.method = "pdmd";
  doc.name = "x";
  doc.model = make_model(k, std::make_shared<PolynomialDictionary>(1, 1), 0, 1);
  const nlohmann::json j = to_json(doc);
  CHECK(j.at("koopman").at("matrix") == nlohmann::json({0.5, 0.1, -0.2, 0.3}));
  CHECK(j.at("koopman").at("eigenvalues").size() == 2);
  CHECK(j.at("koopman").at("eigenvalues")[0].size() == 2);
}

TEST_CASE("malformed model documents are input errors") {
  const auto dir = temp_dir("model_io_bad");
  CHECK_THROWS_AS(load_model(dir / "missing.json"), InputError);
  admd::testing::write_text(dir / "bad.json", "{ not json");
  CHECK_THROWS_AS(load_model(dir / "bad.json"), InputError);
  admd::testing::write_text(dir / "wrong.json", R"({"format": "something-else", "version": 1})");
  CHECK_THROWS_AS(load_model(dir / "wrong.json"), InputError);
}
