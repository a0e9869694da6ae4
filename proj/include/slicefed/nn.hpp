#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicefed/common.hpp"

namespace slicefed::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

/// Dense feedforward network: rectifier on hidden layers, linear output.
///
/// Every instance carries an identity (fresh on construction and copy) and a
/// version bumped by each mutable access, so a forward cache can be checked
/// against the exact parameters it was computed with.
class ParamSet {
 public:
  ParamSet();
  explicit ParamSet(std::vector<DenseLayer> layers);
  ParamSet(const ParamSet& other);
  ParamSet& operator=(const ParamSet& other);
  ParamSet(ParamSet&&) noexcept = default;
  ParamSet& operator=(ParamSet&&) noexcept = default;

  /// `sizes` = {input, hidden..., output}; fan-in scaled uniform weights,
  /// zero biases, output layer weights scaled by `output_scale`.
  static ParamSet create(std::span<const std::size_t> sizes, Rng& rng, double output_scale = 1.0);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers();

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t num_parameters() const;
  bool finite() const;
  bool same_shape(const ParamSet& other) const;

  /// Row-major weights then bias, layer by layer.
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> values);

  std::uint64_t identity() const { return identity_; }
  std::uint64_t version() const { return version_; }

 private:
  void check_chain() const;

  std::vector<DenseLayer> layers_;
  std::uint64_t identity_;
  std::uint64_t version_ = 0;
};

/// Partial derivatives, shape-congruent with a ParamSet.
struct GradientSet {
  std::vector<DenseLayer> layers;

  static GradientSet zeros_like(const ParamSet& params);
  double squared_norm() const;
  void scale(double factor);
  GradientSet& operator+=(const GradientSet& other);
  bool finite() const;
};

/// Per-layer inputs and pre-activations of a batched forward pass.
struct ForwardCache {
  std::uint64_t param_identity = 0;
  std::uint64_t param_version = 0;
  std::vector<Matrix> inputs;          // input to layer l (in_l x batch)
  std::vector<Matrix> pre_activations;  // W x + b of layer l
};

/// Batched forward: `input` is in x batch, returns out x batch.
Matrix forward(const ParamSet& params, const Matrix& input, ForwardCache* cache = nullptr);
Vector forward(const ParamSet& params, const Vector& input);

/// Gradient of sum over batch columns of output . output_grad.
GradientSet backward(const ParamSet& params, const ForwardCache& cache, const Matrix& output_grad);

struct OptimizerState {
  GradientSet first_moment;
  GradientSet second_moment;
  std::int64_t step = 0;
  double learning_rate = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static OptimizerState for_params(const ParamSet& params, double learning_rate = 3e-3);
};

enum class Direction { Ascent, Descent };

void adam_step(ParamSet& params, const GradientSet& grads, OptimizerState& state, Direction direction);

/// Text format: "paramset 1\nlayers L\n", then per layer "out in" and
/// row-major weights followed by biases, one value per line (%.17g).
std::string serialize(const ParamSet& params);
ParamSet deserialize(std::string_view text);
/// FNV-1a 64 of the serialized text.
std::uint64_t checksum(const ParamSet& params);
std::string checksum_hex(const ParamSet& params);

}  // namespace slicefed::nn
