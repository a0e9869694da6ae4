#include "slicefed/nn.hpp"

#include <atomic>
#include <cstdio>
#include <sstream>

namespace slicefed::nn {

namespace {

std::uint64_t next_identity() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace

ParamSet::ParamSet() : identity_(next_identity()) {}

ParamSet::ParamSet(std::vector<DenseLayer> layers) : layers_(std::move(layers)), identity_(next_identity()) {
  check_chain();
}

ParamSet::ParamSet(const ParamSet& other) : layers_(other.layers_), identity_(next_identity()) {}

ParamSet& ParamSet::operator=(const ParamSet& other) {
  if (this != &other) {
    layers_ = other.layers_;
    ++version_;
  }
  return *this;
}

void ParamSet::check_chain() const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].bias.size() != layers_[l].weight.rows())
      throw ContractViolation("ParamSet: bias size does not match weight rows");
    if (l > 0 && layers_[l].weight.cols() != layers_[l - 1].weight.rows())
      throw ContractViolation("ParamSet: layer shapes do not chain");
  }
}

ParamSet ParamSet::create(std::span<const std::size_t> sizes, Rng& rng, double output_scale) {
  if (sizes.size() < 2) throw ContractViolation("ParamSet::create: need at least input and output sizes");
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(sizes[l]);
    const auto out = static_cast<Eigen::Index>(sizes[l + 1]);
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    if (l + 2 == sizes.size()) bound *= output_scale;
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Matrix(out, in), Vector::Zero(out)};
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = dist(rng);
    layers.push_back(std::move(layer));
  }
  return ParamSet(std::move(layers));
}

std::vector<DenseLayer>& ParamSet::mutable_layers() {
  ++version_;
  return layers_;
}

std::size_t ParamSet::input_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weight.cols());
}

std::size_t ParamSet::output_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weight.rows());
}

std::size_t ParamSet::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool ParamSet::finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

bool ParamSet::same_shape(const ParamSet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].weight.rows() != other.layers_[l].weight.rows() ||
        layers_[l].weight.cols() != other.layers_[l].weight.cols())
      return false;
  }
  return true;
}

std::vector<double> ParamSet::flatten() const {
  std::vector<double> out;
  out.reserve(num_parameters());
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

void ParamSet::assign_flat(std::span<const double> values) {
  if (values.size() != num_parameters()) throw ContractViolation("assign_flat: size mismatch");
  std::size_t i = 0;
  for (auto& l : mutable_layers()) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = values[i++];
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = values[i++];
  }
}

GradientSet GradientSet::zeros_like(const ParamSet& params) {
  GradientSet g;
  for (const auto& l : params.layers())
    g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  return g;
}

double GradientSet::squared_norm() const {
  double s = 0.0;
  for (const auto& l : layers) s += l.weight.squaredNorm() + l.bias.squaredNorm();
  return s;
}

void GradientSet::scale(double factor) {
  for (auto& l : layers) {
    l.weight *= factor;
    l.bias *= factor;
  }
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  if (other.layers.size() != layers.size()) throw ContractViolation("GradientSet: shape mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
  }
  return *this;
}

bool GradientSet::finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

Matrix forward(const ParamSet& params, const Matrix& input, ForwardCache* cache) {
  const auto& layers = params.layers();
  if (layers.empty()) throw ContractViolation("forward: empty network");
  if (input.rows() != layers.front().weight.cols()) throw ContractViolation("forward: input dimension mismatch");
  if (cache) {
    cache->param_identity = params.identity();
    cache->param_version = params.version();
    cache->inputs.clear();
    cache->pre_activations.clear();
  }
  Matrix x = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix pre = layers[l].weight * x;
    pre.colwise() += layers[l].bias;
    if (cache) cache->inputs.push_back(std::move(x));
    if (l + 1 < layers.size()) {
      x = pre.cwiseMax(0.0);
    } else {
      x = pre;
    }
    if (cache) cache->pre_activations.push_back(std::move(pre));
  }
  return x;
}

Vector forward(const ParamSet& params, const Vector& input) {
  const auto& layers = params.layers();
  if (layers.empty()) throw ContractViolation("forward: empty network");
  if (input.size() != layers.front().weight.cols()) throw ContractViolation("forward: input dimension mismatch");
  Vector x = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Vector pre = layers[l].weight * x + layers[l].bias;
    x = (l + 1 < layers.size()) ? Vector(pre.cwiseMax(0.0)) : pre;
  }
  return x;
}

GradientSet backward(const ParamSet& params, const ForwardCache& cache, const Matrix& output_grad) {
  if (cache.param_identity != params.identity() || cache.param_version != params.version())
    throw ContractViolation("backward: cache is stale for these parameters");
  const auto& layers = params.layers();
  if (cache.inputs.size() != layers.size()) throw ContractViolation("backward: cache depth mismatch");
  if (output_grad.rows() != layers.back().weight.rows() || output_grad.cols() != cache.inputs.front().cols())
    throw ContractViolation("backward: output gradient shape mismatch");

  GradientSet grads;
  grads.layers.resize(layers.size());
  Matrix g = output_grad;
  for (std::size_t i = layers.size(); i-- > 0;) {
    grads.layers[i].weight.noalias() = g * cache.inputs[i].transpose();
    grads.layers[i].bias = g.rowwise().sum();
    if (i > 0) {
      Matrix upstream = layers[i].weight.transpose() * g;
      g = upstream.cwiseProduct((cache.pre_activations[i - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

OptimizerState OptimizerState::for_params(const ParamSet& params, double learning_rate) {
  OptimizerState s;
  s.first_moment = GradientSet::zeros_like(params);
  s.second_moment = GradientSet::zeros_like(params);
  s.learning_rate = learning_rate;
  return s;
}

void adam_step(ParamSet& params, const GradientSet& grads, OptimizerState& state, Direction direction) {
  if (grads.layers.size() != params.layers().size() || state.first_moment.layers.size() != params.layers().size())
    throw ContractViolation("adam_step: shape mismatch");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const double sign = direction == Direction::Ascent ? 1.0 : -1.0;
  auto& layers = params.mutable_layers();
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * grad;
    v = state.beta2 * v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
    param.array() += sign * state.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + state.epsilon);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weight, grads.layers[i].weight, state.first_moment.layers[i].weight,
           state.second_moment.layers[i].weight);
    update(layers[i].bias, grads.layers[i].bias, state.first_moment.layers[i].bias,
           state.second_moment.layers[i].bias);
  }
}

std::string serialize(const ParamSet& params) {
  std::string out = "paramset 1\nlayers " + std::to_string(params.layers().size()) + "\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out += buf;
  };
  for (const auto& l : params.layers()) {
    out += std::to_string(l.weight.rows()) + " " + std::to_string(l.weight.cols()) + "\n";
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) put(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) put(l.bias(r));
  }
  return out;
}

ParamSet deserialize(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string tag;
  int format = 0;
  std::size_t count = 0;
  if (!(in >> tag >> format) || tag != "paramset" || format != 1)
    throw ContractViolation("deserialize: bad header");
  if (!(in >> tag >> count) || tag != "layers") throw ContractViolation("deserialize: missing layer count");
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l < count; ++l) {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(in >> rows >> cols) || rows <= 0 || cols <= 0) throw ContractViolation("deserialize: bad layer shape");
    DenseLayer layer{Matrix(rows, cols), Vector(rows)};
    std::string token;
    auto next = [&]() {
      if (!(in >> token)) throw ContractViolation("deserialize: truncated values");
      return std::stod(token);
    };
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = next();
    for (Eigen::Index r = 0; r < rows; ++r) layer.bias(r) = next();
    layers.push_back(std::move(layer));
  }
  return ParamSet(std::move(layers));
}

std::uint64_t checksum(const ParamSet& params) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : serialize(params)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string checksum_hex(const ParamSet& params) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(checksum(params)));
  return buf;
}

}  // namespace slicefed::nn
