#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace admd {

/// Encoder/decoder pair between delay space (dim n_d) and latent space (dim m).
/// Batched: every column of the argument is one point.
class ObservableMap {
public:
  virtual ~ObservableMap() = default;

  virtual Eigen::Index input_dim() const = 0;
  virtual Eigen::Index latent_dim() const = 0;
  virtual bool trainable() const = 0;
  virtual std::string kind() const = 0;

  /// Throws InputError when x.rows() != input_dim().
  virtual Eigen::MatrixXd encode(const Eigen::MatrixXd &x) const = 0;
  /// Throws InputError when z.rows() != latent_dim().
  virtual Eigen::MatrixXd decode(const Eigen::MatrixXd &z) const = 0;
};

/// Phi = Psi = identity; plain DMD.
class IdentityMap final : public ObservableMap {
public:
  explicit IdentityMap(Eigen::Index dim) : dim_(dim) {}

  Eigen::Index input_dim() const override { return dim_; }
  Eigen::Index latent_dim() const override { return dim_; }
  bool trainable() const override { return false; }
  std::string kind() const override { return "identity"; }
  Eigen::MatrixXd encode(const Eigen::MatrixXd &x) const override;
  Eigen::MatrixXd decode(const Eigen::MatrixXd &z) const override;

private:
  Eigen::Index dim_;
};

/// All monomials of total degree <= degree in `base_dim` variables, graded by
/// degree and, within a degree, ordered with the first variable's power
/// descending. Entry 0 is the constant, entries 1..base_dim are the raw
/// coordinates, so decode() is a coordinate projection.
class PolynomialDictionary final : public ObservableMap {
public:
  PolynomialDictionary(Eigen::Index base_dim, int degree);

  Eigen::Index input_dim() const override { return base_dim_; }
  Eigen::Index latent_dim() const override { return static_cast<Eigen::Index>(exponents_.size()); }
  bool trainable() const override { return false; }
  std::string kind() const override { return "polynomial"; }
  Eigen::MatrixXd encode(const Eigen::MatrixXd &x) const override;
  Eigen::MatrixXd decode(const Eigen::MatrixXd &z) const override;

  int degree() const { return degree_; }
  const std::vector<std::vector<int>> &exponents() const { return exponents_; }

private:
  Eigen::Index base_dim_;
  int degree_;
  std::vector<std::vector<int>> exponents_;
};

/// Binomial coefficient C(n, k).
std::uint64_t binomial(unsigned n, unsigned k);

// ---------------------------------------------------------------------------
// Dense networks

double elu(double u);
double elu_grad(double u);

enum class Activation { Elu, Linear };

const char *to_string(Activation a);
Activation activation_from_string(const std::string &s);

struct DenseLayer {
  Eigen::MatrixXd weights; ///< out x in
  Eigen::VectorXd bias;
};

/// Intermediate values kept by Mlp::forward for the reverse pass.
struct MlpTape {
  std::vector<Eigen::MatrixXd> inputs;         ///< input to each layer
  std::vector<Eigen::MatrixXd> preactivations; ///< W x + b of each layer
};

/// Gradient with the same layout as Mlp::layers().
struct MlpGradient {
  std::vector<DenseLayer> layers;
};

/// Fully connected network: hidden layers use the activation, the output
/// layer is linear.
class Mlp {
public:
  Mlp() = default;
  Mlp(std::vector<DenseLayer> layers, Activation hidden);

  /// in -> num_hidden x width (activation) -> out (linear), all entries zero.
  static Mlp zeros(Eigen::Index in, Eigen::Index width, int num_hidden, Eigen::Index out,
                   Activation hidden);

  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;
  Activation activation() const { return hidden_; }
  const std::vector<DenseLayer> &layers() const { return layers_; }
  std::vector<DenseLayer> &layers() { return layers_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd &x) const;
  /// Records the tape; throws NumericalError naming the layer on non-finite values.
  Eigen::MatrixXd forward(const Eigen::MatrixXd &x, MlpTape &tape) const;
  /// Accumulates dLoss/dparams into `grad` and returns dLoss/dinput.
  Eigen::MatrixXd backward(const MlpTape &tape, const Eigen::MatrixXd &upstream,
                           MlpGradient &grad) const;

  MlpGradient zero_gradient() const;

private:
  std::vector<DenseLayer> layers_;
  Activation hidden_ = Activation::Elu;
};

struct AutoencoderArchitecture {
  Eigen::Index input_dim = 42;
  Eigen::Index latent_dim = 20;
  Eigen::Index hid_width = 20;
  int num_hidden = 2;
  Activation activation = Activation::Elu;
};

/// Encoder and decoder parameters plus a flat-vector view for the optimizer.
/// The flat layout is encoder layers then decoder layers, each as the
/// column-major weight matrix followed by the bias.
struct AutoencoderParams {
  AutoencoderArchitecture arch;
  Mlp encoder;
  Mlp decoder;

  Eigen::Index parameter_count() const;
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd &flat);
  /// 1 for weight entries, 0 for biases; same layout as flatten().
  Eigen::VectorXd weight_mask() const;
  /// Sum of squared weights (biases excluded).
  double weight_norm_squared() const;
  bool all_finite() const;
};

/// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
AutoencoderParams init_params(std::uint64_t seed, const AutoencoderArchitecture &arch);

/// Flattens a pair of MLP gradients in AutoencoderParams::flatten() order.
Eigen::VectorXd flatten_gradient(const MlpGradient &encoder, const MlpGradient &decoder);

class Autoencoder final : public ObservableMap {
public:
  explicit Autoencoder(AutoencoderParams params) : params_(std::move(params)) {}

  Eigen::Index input_dim() const override { return params_.arch.input_dim; }
  Eigen::Index latent_dim() const override { return params_.arch.latent_dim; }
  bool trainable() const override { return true; }
  std::string kind() const override { return "autoencoder"; }
  Eigen::MatrixXd encode(const Eigen::MatrixXd &x) const override;
  Eigen::MatrixXd decode(const Eigen::MatrixXd &z) const override;

  const AutoencoderParams &params() const { return params_; }

private:
  AutoencoderParams params_;
};

} // namespace admd
