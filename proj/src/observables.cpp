#include "admd/observables.hpp"

#include "admd/errors.hpp"
#include "admd/random.hpp"

#include <cmath>
#include <random>

namespace admd {

namespace {

void check_rows(const Eigen::MatrixXd &m, Eigen::Index expected, const char *what) {
  if (m.rows() != expected) {
    throw InputError(std::string(what) + ": dimension mismatch, got " + std::to_string(m.rows()) +
                     ", expected " + std::to_string(expected));
  }
}

// Appends every exponent vector of exactly `remaining` total degree over the
// variables [var, p), first variable's power descending.
void enumerate(std::vector<int> &current, Eigen::Index var, int remaining,
               std::vector<std::vector<int>> &out) {
  const auto p = static_cast<Eigen::Index>(current.size());
  if (var == p - 1) {
    current[static_cast<std::size_t>(var)] = remaining;
    out.push_back(current);
    current[static_cast<std::size_t>(var)] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[static_cast<std::size_t>(var)] = e;
    enumerate(current, var + 1, remaining - e, out);
  }
  current[static_cast<std::size_t>(var)] = 0;
}

} // namespace

// ---------------------------------------------------------------------------

Eigen::MatrixXd IdentityMap::encode(const Eigen::MatrixXd &x) const {
  check_rows(x, dim_, "encode");
  return x;
}

Eigen::MatrixXd IdentityMap::decode(const Eigen::MatrixXd &z) const {
  check_rows(z, dim_, "decode");
  return z;
}

// ---------------------------------------------------------------------------

std::uint64_t binomial(unsigned n, unsigned k) {
  if (k > n) {
    return 0;
  }
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (unsigned i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

PolynomialDictionary::PolynomialDictionary(Eigen::Index base_dim, int degree)
    : base_dim_(base_dim), degree_(degree) {
  if (base_dim < 1 || degree < 1) {
    throw InputError("polynomial dictionary needs base_dim >= 1 and degree >= 1");
  }
  std::vector<int> current(static_cast<std::size_t>(base_dim), 0);
  for (int deg = 0; deg <= degree; ++deg) {
    enumerate(current, 0, deg, exponents_);
  }
}

Eigen::MatrixXd PolynomialDictionary::encode(const Eigen::MatrixXd &x) const {
  check_rows(x, base_dim_, "encode");
  Eigen::MatrixXd out(latent_dim(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (std::size_t k = 0; k < exponents_.size(); ++k) {
      double v = 1.0;
      for (Eigen::Index i = 0; i < base_dim_; ++i) {
        for (int e = 0; e < exponents_[k][static_cast<std::size_t>(i)]; ++e) {
          v *= x(i, j);
        }
      }
      out(static_cast<Eigen::Index>(k), j) = v;
    }
  }
  return out;
}

Eigen::MatrixXd PolynomialDictionary::decode(const Eigen::MatrixXd &z) const {
  check_rows(z, latent_dim(), "decode");
  return z.middleRows(1, base_dim_);
}

// ---------------------------------------------------------------------------

double elu(double u) { return u > 0.0 ? u : std::expm1(u); }

double elu_grad(double u) { return u > 0.0 ? 1.0 : std::exp(u); }

const char *to_string(Activation a) { return a == Activation::Elu ? "elu" : "linear"; }

Activation activation_from_string(const std::string &s) {
  if (s == "elu") {
    return Activation::Elu;
  }
  if (s == "linear") {
    return Activation::Linear;
  }
  throw InputError("unknown activation '" + s + "'");
}

Mlp::Mlp(std::vector<DenseLayer> layers, Activation hidden)
    : layers_(std::move(layers)), hidden_(hidden) {
  if (layers_.empty()) {
    throw InputError("mlp needs at least one layer");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].bias.size() != layers_[i].weights.rows()) {
      throw InputError("mlp layer " + std::to_string(i) + ": bias/weight shape mismatch");
    }
    if (i > 0 && layers_[i].weights.cols() != layers_[i - 1].weights.rows()) {
      throw InputError("mlp layer " + std::to_string(i) + ": input width mismatch");
    }
  }
}

Mlp Mlp::zeros(Eigen::Index in, Eigen::Index width, int num_hidden, Eigen::Index out,
               Activation hidden) {
  std::vector<DenseLayer> layers;
  Eigen::Index prev = in;
  for (int h = 0; h < num_hidden; ++h) {
    layers.push_back({Eigen::MatrixXd::Zero(width, prev), Eigen::VectorXd::Zero(width)});
    prev = width;
  }
  layers.push_back({Eigen::MatrixXd::Zero(out, prev), Eigen::VectorXd::Zero(out)});
  return Mlp(std::move(layers), hidden);
}

Eigen::Index Mlp::input_dim() const { return layers_.front().weights.cols(); }

Eigen::Index Mlp::output_dim() const { return layers_.back().weights.rows(); }

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd &x) const {
  MlpTape tape;
  return forward(x, tape);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd &x, MlpTape &tape) const {
  check_rows(x, input_dim(), "mlp forward");
  tape.inputs.clear();
  tape.preactivations.clear();
  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto &layer = layers_[i];
    Eigen::MatrixXd pre = layer.weights * h;
    pre.colwise() += layer.bias;
    if (!pre.allFinite()) {
      throw NumericalError("non-finite activation in layer " + std::to_string(i));
    }
    tape.inputs.push_back(std::move(h));
    const bool last = i + 1 == layers_.size();
    if (last || hidden_ == Activation::Linear) {
      h = pre;
    } else {
      h = pre.unaryExpr([](double u) { return elu(u); });
    }
    tape.preactivations.push_back(std::move(pre));
  }
  return h;
}

Eigen::MatrixXd Mlp::backward(const MlpTape &tape, const Eigen::MatrixXd &upstream,
                              MlpGradient &grad) const {
  Eigen::MatrixXd delta = upstream;
  for (std::size_t r = layers_.size(); r-- > 0;) {
    const bool last = r + 1 == layers_.size();
    if (!last && hidden_ == Activation::Elu) {
      delta.array() *= tape.preactivations[r].unaryExpr([](double u) { return elu_grad(u); }).array();
    }
    if (!delta.allFinite()) {
      throw NumericalError("non-finite gradient in layer " + std::to_string(r));
    }
    grad.layers[r].weights.noalias() += delta * tape.inputs[r].transpose();
    grad.layers[r].bias += delta.rowwise().sum();
    delta = layers_[r].weights.transpose() * delta;
  }
  return delta;
}

MlpGradient Mlp::zero_gradient() const {
  MlpGradient g;
  for (const auto &l : layers_) {
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  }
  return g;
}

// ---------------------------------------------------------------------------

namespace {

template <class Fn> void for_each_layer(const AutoencoderParams &p, Fn &&fn) {
  for (const auto &l : p.encoder.layers()) {
    fn(l);
  }
  for (const auto &l : p.decoder.layers()) {
    fn(l);
  }
}

void append(const std::vector<DenseLayer> &layers, Eigen::VectorXd &flat, Eigen::Index &pos) {
  for (const auto &l : layers) {
    flat.segment(pos, l.weights.size()) = l.weights.reshaped();
    pos += l.weights.size();
    flat.segment(pos, l.bias.size()) = l.bias;
    pos += l.bias.size();
  }
}

void extract(std::vector<DenseLayer> &layers, const Eigen::VectorXd &flat, Eigen::Index &pos) {
  for (auto &l : layers) {
    l.weights.reshaped() = flat.segment(pos, l.weights.size());
    pos += l.weights.size();
    l.bias = flat.segment(pos, l.bias.size());
    pos += l.bias.size();
  }
}

} // namespace

Eigen::Index AutoencoderParams::parameter_count() const {
  Eigen::Index n = 0;
  for_each_layer(*this, [&](const DenseLayer &l) { n += l.weights.size() + l.bias.size(); });
  return n;
}

Eigen::VectorXd AutoencoderParams::flatten() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index pos = 0;
  append(encoder.layers(), flat, pos);
  append(decoder.layers(), flat, pos);
  return flat;
}

void AutoencoderParams::assign(const Eigen::VectorXd &flat) {
  if (flat.size() != parameter_count()) {
    throw InputError("parameter vector has wrong length");
  }
  Eigen::Index pos = 0;
  extract(encoder.layers(), flat, pos);
  extract(decoder.layers(), flat, pos);
}

Eigen::VectorXd AutoencoderParams::weight_mask() const {
  Eigen::VectorXd mask(parameter_count());
  Eigen::Index pos = 0;
  for_each_layer(*this, [&](const DenseLayer &l) {
    mask.segment(pos, l.weights.size()).setOnes();
    pos += l.weights.size();
    mask.segment(pos, l.bias.size()).setZero();
    pos += l.bias.size();
  });
  return mask;
}

double AutoencoderParams::weight_norm_squared() const {
  double s = 0.0;
  for_each_layer(*this, [&](const DenseLayer &l) { s += l.weights.squaredNorm(); });
  return s;
}

bool AutoencoderParams::all_finite() const {
  bool ok = true;
  for_each_layer(*this, [&](const DenseLayer &l) {
    ok = ok && l.weights.allFinite() && l.bias.allFinite();
  });
  return ok;
}

AutoencoderParams init_params(std::uint64_t seed, const AutoencoderArchitecture &arch) {
  if (arch.input_dim < 1 || arch.latent_dim < 1 || arch.num_hidden < 0 ||
      (arch.num_hidden > 0 && arch.hid_width < 1)) {
    throw InputError("invalid autoencoder architecture");
  }
  AutoencoderParams p;
  p.arch = arch;
  p.encoder = Mlp::zeros(arch.input_dim, arch.hid_width, arch.num_hidden, arch.latent_dim,
                         arch.activation);
  p.decoder = Mlp::zeros(arch.latent_dim, arch.hid_width, arch.num_hidden, arch.input_dim,
                         arch.activation);
  auto rng = make_rng({seed});
  auto fill = [&](std::vector<DenseLayer> &layers) {
    for (auto &l : layers) {
      const double bound = std::sqrt(6.0 / static_cast<double>(l.weights.rows() + l.weights.cols()));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) {
        for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
          l.weights(i, j) = dist(rng);
        }
      }
    }
  };
  fill(p.encoder.layers());
  fill(p.decoder.layers());
  return p;
}

Eigen::VectorXd flatten_gradient(const MlpGradient &encoder, const MlpGradient &decoder) {
  Eigen::Index n = 0;
  for (const auto *g : {&encoder, &decoder}) {
    for (const auto &l : g->layers) {
      n += l.weights.size() + l.bias.size();
    }
  }
  Eigen::VectorXd flat(n);
  Eigen::Index pos = 0;
  append(encoder.layers, flat, pos);
  append(decoder.layers, flat, pos);
  return flat;
}

Eigen::MatrixXd Autoencoder::encode(const Eigen::MatrixXd &x) const {
  check_rows(x, input_dim(), "encode");
  return params_.encoder.forward(x);
}

Eigen::MatrixXd Autoencoder::decode(const Eigen::MatrixXd &z) const {
  check_rows(z, latent_dim(), "decode");
  return params_.decoder.forward(z);
}

} // namespace admd
