#include <gtest/gtest.h>

#include "slicefed/nn.hpp"

using namespace slicefed;
using namespace slicefed::nn;

namespace {

DenseLayer layer(double w, double b) {
  DenseLayer l;
  l.weight = Matrix::Constant(1, 1, w);
  l.bias = Vector::Constant(1, b);
  return l;
}

Vector scalar(double x) { return Vector::Constant(1, x); }

const std::size_t kSizes[] = {12, 16, 16, 4};

}  // namespace

TEST(Forward, ZeroWeightsGiveBias) {
  DenseLayer l;
  l.weight = Matrix::Zero(2, 3);
  l.bias = Vector(2);
  l.bias << 0.7, -1.3;
  const ParamSet p({l});
  const Vector y = forward(p, Vector(Vector::Constant(3, 5.0)));
  EXPECT_EQ(y(0), 0.7);
  EXPECT_EQ(y(1), -1.3);
}

TEST(Forward, LinearOutput) {
  const ParamSet p({layer(2.0, 0.0)});
  EXPECT_EQ(forward(p, scalar(3.0))(0), 6.0);
  EXPECT_EQ(forward(p, scalar(-3.0))(0), -6.0);
}

TEST(Forward, HiddenRectifier) {
  const ParamSet p({layer(-1.0, 0.0), layer(1.0, 0.0)});
  EXPECT_EQ(forward(p, scalar(5.0))(0), 0.0);
  EXPECT_EQ(forward(p, scalar(-5.0))(0), 5.0);
}

TEST(Forward, BatchMatchesColumns) {
  Rng rng(1);
  const auto p = ParamSet::create(kSizes, rng);
  Matrix x = Matrix::Random(12, 5);
  const Matrix y = forward(p, x);
  for (int j = 0; j < 5; ++j) EXPECT_LT((y.col(j) - forward(p, Vector(x.col(j)))).norm(), 1e-12);
}

TEST(Backward, OutputBiasGradientIsOne) {
  const ParamSet p({layer(0.5, 0.1)});
  ForwardCache cache;
  forward(p, Matrix::Constant(1, 1, 2.0), &cache);
  const auto g = backward(p, cache, Matrix::Constant(1, 1, 1.0));
  EXPECT_EQ(g.layers[0].bias(0), 1.0);
  EXPECT_EQ(g.layers[0].weight(0, 0), 2.0);
}

TEST(Backward, ZeroOutputGradient) {
  Rng rng(2);
  const auto p = ParamSet::create(kSizes, rng);
  ForwardCache cache;
  forward(p, Matrix::Random(12, 3), &cache);
  const auto g = backward(p, cache, Matrix::Zero(4, 3));
  EXPECT_EQ(g.squared_norm(), 0.0);
}

TEST(Backward, MatchesCentralDifference) {
  Rng rng(3);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int net = 0; net < 10; ++net) {
    auto p = ParamSet::create(kSizes, rng);
    Matrix x(12, 2), c(4, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(rng);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = n01(rng);
    ForwardCache cache;
    forward(p, x, &cache);
    const auto g = backward(p, cache, c);
    auto theta = p.flatten();
    std::vector<double> analytic;
    for (const auto& l : g.layers) {
      for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
        for (Eigen::Index j = 0; j < l.weight.cols(); ++j) analytic.push_back(l.weight(i, j));
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) analytic.push_back(l.bias(i));
    }
    ASSERT_EQ(analytic.size(), theta.size());
    double diff = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double saved = theta[k];
      theta[k] = saved + 1e-5;
      p.assign_flat(theta);
      const double up = forward(p, x).cwiseProduct(c).sum();
      theta[k] = saved - 1e-5;
      p.assign_flat(theta);
      const double down = forward(p, x).cwiseProduct(c).sum();
      theta[k] = saved;
      const double fd = (up - down) / 2e-5;
      diff += (fd - analytic[k]) * (fd - analytic[k]);
      norm += analytic[k] * analytic[k];
    }
    p.assign_flat(theta);
    EXPECT_LT(std::sqrt(diff / norm), 1e-4);
  }
}

TEST(Backward, StaleCacheRejected) {
  Rng rng(4);
  auto p = ParamSet::create(kSizes, rng);
  ForwardCache cache;
  forward(p, Matrix::Random(12, 1), &cache);
  auto theta = p.flatten();
  theta[0] += 1.0;
  p.assign_flat(theta);
  EXPECT_THROW(backward(p, cache, Matrix::Ones(4, 1)), ContractViolation);
}

TEST(Adam, ZeroGradientLeavesParams) {
  Rng rng(5);
  auto p = ParamSet::create(kSizes, rng);
  const auto before = p.flatten();
  auto state = OptimizerState::for_params(p, 1e-3);
  adam_step(p, GradientSet::zeros_like(p), state, Direction::Descent);
  EXPECT_EQ(p.flatten(), before);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // Bias-corrected moments of a constant gradient g are g and g^2, so the
  // first step is lr * g / (|g| + eps).
  auto p = ParamSet({layer(1.0, 1.0)});
  auto grads = GradientSet::zeros_like(p);
  grads.layers[0].weight(0, 0) = 0.3;
  grads.layers[0].bias(0) = -2.0;
  auto state = OptimizerState::for_params(p, 0.01);
  adam_step(p, grads, state, Direction::Descent);
  EXPECT_NEAR(p.layers()[0].weight(0, 0), 1.0 - 0.01 * 0.3 / (0.3 + 1e-8), 1e-12);
  EXPECT_NEAR(p.layers()[0].bias(0), 1.0 + 0.01 * 2.0 / (2.0 + 1e-8), 1e-12);

  auto q = ParamSet({layer(1.0, 1.0)});
  auto qs = OptimizerState::for_params(q, 0.01);
  adam_step(q, grads, qs, Direction::Ascent);
  EXPECT_NEAR(q.layers()[0].weight(0, 0), 1.0 + 0.01 * 0.3 / (0.3 + 1e-8), 1e-12);
}

TEST(Adam, DeterministicTrajectories) {
  auto run = [] {
    Rng rng(6);
    auto p = ParamSet::create(kSizes, rng);
    auto state = OptimizerState::for_params(p);
    for (int i = 0; i < 20; ++i) {
      ForwardCache cache;
      forward(p, Matrix::Ones(12, 4), &cache);
      adam_step(p, backward(p, cache, Matrix::Ones(4, 4)), state, Direction::Descent);
    }
    return serialize(p);
  };
  EXPECT_EQ(run(), run());
}

TEST(Serialization, RoundTripIsByteStable) {
  Rng rng(7);
  const auto p = ParamSet::create(kSizes, rng);
  const std::string text = serialize(p);
  const auto q = deserialize(text);
  EXPECT_EQ(q.flatten(), p.flatten());
  EXPECT_EQ(serialize(q), text);
  EXPECT_EQ(checksum(q), checksum(p));
  EXPECT_EQ(checksum_hex(p).size(), 16u);
}

TEST(Serialization, RejectsGarbage) {
  EXPECT_ANY_THROW(deserialize("not a parameter file"));
  Rng rng(8);
  std::string text = serialize(ParamSet::create(kSizes, rng));
  text.resize(text.size() / 2);
  EXPECT_ANY_THROW(deserialize(text));
}

TEST(ParamSet, ShapeChecks) {
  Rng rng(9);
  const auto p = ParamSet::create(kSizes, rng);
  EXPECT_EQ(p.input_dim(), 12u);
  EXPECT_EQ(p.output_dim(), 4u);
  EXPECT_EQ(p.num_parameters(), 12u * 16 + 16 + 16 * 16 + 16 + 16 * 4 + 4);
  EXPECT_TRUE(p.finite());
  EXPECT_TRUE(p.same_shape(ParamSet::create(kSizes, rng)));
  DenseLayer a = layer(1.0, 0.0);
  DenseLayer b;
  b.weight = Matrix::Ones(1, 2);
  b.bias = Vector::Ones(1);
  EXPECT_THROW(ParamSet({a, b}), ContractViolation);
}
