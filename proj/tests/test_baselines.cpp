#include <gtest/gtest.h>

#include "slicefed/baselines.hpp"
#include "slicefed/env.hpp"

using namespace slicefed;
using namespace slicefed::baselines;

TEST(Equal, AlwaysThirds) {
  const auto a = equal_slicing();
  for (double f : a.fractions) EXPECT_DOUBLE_EQ(f, 1.0 / 3.0);
  Rng rng(1);
  EXPECT_EQ(decide(BaselineKind::EqualSlicing, {5.0, 0.0, 9.0}, rng).fractions, a.fractions);
}

TEST(QueueProp, Examples) {
  const auto a = queue_proportional({2.0, 6.0, 2.0});
  EXPECT_DOUBLE_EQ(a.fractions[0], 0.2);
  EXPECT_DOUBLE_EQ(a.fractions[1], 0.6);
  EXPECT_DOUBLE_EQ(a.fractions[2], 0.2);
  const auto tie = queue_proportional({0.0, 0.0, 0.0});
  for (double f : tie.fractions) EXPECT_DOUBLE_EQ(f, 1.0 / 3.0);
  const auto one = queue_proportional({0.0, 5.0, 0.0});
  EXPECT_EQ(one.fractions, (PerSlice<double>{0.0, 1.0, 0.0}));
}

TEST(QueueProp, RejectsNegativeQueues) { EXPECT_ANY_THROW(queue_proportional({-1.0, 2.0, 0.0})); }

TEST(Random, UniformOnSimplex) {
  Rng rng(2);
  PerSlice<double> mean{};
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto a = random_dirichlet(rng);
    EXPECT_EQ(env::constraint_g3(a), 0.0);
    for (std::size_t s = 0; s < 3; ++s) mean[s] += a.fractions[s] / n;
  }
  for (double m : mean) EXPECT_NEAR(m, 1.0 / 3.0, 0.01);
}

TEST(Names, RoundTrip) {
  for (auto k : {BaselineKind::EqualSlicing, BaselineKind::QueueProportional, BaselineKind::RandomDirichlet})
    EXPECT_EQ(parse_baseline(to_string(k)), k);
  EXPECT_FALSE(parse_baseline("nope").has_value());
}
