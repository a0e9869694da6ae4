#include <gtest/gtest.h>

#include "slicefed/env.hpp"

using namespace slicefed;
using namespace slicefed::env;

namespace {

EnvConfig small_config(std::size_t gnbs) {
  EnvConfig c;
  c.num_gnbs = gnbs;
  c.ues_per_cell = 6;
  return c;
}

}  // namespace

TEST(Reward, AllTermsVanish) {
  RewardComponents c;
  EXPECT_EQ(compute_reward(c, RewardWeights{}), 0.0);
}

TEST(Reward, ReconfigurationCost) {
  const auto rho = reconfiguration_cost(Action{{0.5, 0.3, 0.2}}, Action{{0.4, 0.4, 0.2}});
  EXPECT_NEAR(rho[0], 0.1, 1e-15);
  EXPECT_NEAR(rho[1], 0.1, 1e-15);
  EXPECT_NEAR(rho[2], 0.0, 1e-15);
}

TEST(Reward, ThroughputOnlyIsWeightedSum) {
  RewardComponents c;
  c.throughput = {0.2, 0.05, 0.1};
  RewardWeights w;
  w.tput_weight = {1.0, 1.0, 1.0};
  EXPECT_NEAR(compute_reward(c, w), 0.35, 1e-15);
}

TEST(Reward, SignsOfPenalties) {
  RewardComponents c;
  c.qos_penalty = {0.0, 1.0, 0.0};
  c.recfg_cost = {0.1, 0.0, 0.0};
  RewardWeights w;
  EXPECT_NEAR(compute_reward(c, w), -w.qos_weight[1] - 0.1 * w.recfg_weight[0], 1e-15);
}

TEST(Constraints, G1) {
  EXPECT_EQ(constraint_g1(1e-4, 1e-4), 0.0);
  EXPECT_NEAR(constraint_g1(1e-4 + 3e-6, 1e-4), 3e-6, 1e-18);
  EXPECT_EQ(constraint_g1(0.0, 1e-4), 0.0);
}

TEST(Constraints, G2) {
  traffic::SliceQueue empty(Slice::URLLC);
  EXPECT_EQ(constraint_g2({}, empty, 1, 0), 0.0);
  const std::vector<traffic::Completion> late{{2, false}, {3, false}, {2, false}};
  EXPECT_EQ(constraint_g2(late, empty, 1, 3), 3.0);
  const std::vector<traffic::Completion> ok{{1, false}, {1, false}};
  EXPECT_EQ(constraint_g2(ok, empty, 1, 3), 0.0);
}

TEST(Constraints, G3) {
  EXPECT_EQ(constraint_g3(Action{{0.5, 0.3, 0.2}}), 0.0);
  EXPECT_NEAR(constraint_g3(Action{{0.5, 0.5, 0.2}}), 0.2, 1e-15);
  EXPECT_EQ(constraint_g3(Action{{0.3, 0.2, 0.2}}), 0.0);
}

TEST(Network, ZeroAllocationServesNothing) {
  Network net(small_config(3), 5);
  const std::vector<Action> zero(3, Action{{0.0, 0.0, 0.0}});
  for (int t = 0; t < 20; ++t) {
    const auto out = net.step(zero);
    for (const auto& g : out.gnbs)
      for (double b : g.throughput_bits) EXPECT_EQ(b, 0.0);
  }
  for (std::size_t n = 0; n < 3; ++n) {
    for (auto s : {Slice::EMBB, Slice::URLLC, Slice::MMTC}) {
      const auto& q = net.queue(n, s);
      EXPECT_EQ(q.completed(), 0);
      EXPECT_EQ(static_cast<std::int64_t>(q.size()), q.arrived());
    }
  }
}

TEST(Network, SingleCellUrllcOnlyMeetsConstraints) {
  EnvConfig c = small_config(1);
  c.inter_site_distance_m = 100.0;
  c.fading.shadowing_sigma_db = 0.0;
  c.traffic.lambda_embb = 0.0;
  c.traffic.lambda_mmtc = 0.0;
  Network net(c, 9);
  const std::vector<Action> a{Action{{0.0, 1.0, 0.0}}};
  for (int t = 0; t < 200; ++t) {
    const auto out = net.step(a);
    EXPECT_EQ(out.gnbs[0].constraints.g1, 0.0);
    EXPECT_EQ(out.gnbs[0].constraints.g2, 0.0);
  }
}

TEST(Network, DeterministicForSeed) {
  auto run = [] {
    Network net(small_config(3), 42);
    Rng rng(1);
    std::uniform_real_distribution<double> u(0.0, 0.5);
    std::vector<double> trace;
    for (int t = 0; t < 100; ++t) {
      std::vector<Action> a(3);
      for (auto& x : a) x = Action{{u(rng), u(rng), u(rng)}};
      const auto out = net.step(a);
      for (const auto& g : out.gnbs) {
        trace.push_back(g.reward);
        trace.push_back(g.constraints.g2);
        trace.push_back(g.leakage_w);
        for (double f : g.next.features) trace.push_back(f);
      }
    }
    return trace;
  };
  EXPECT_EQ(run(), run());
}

TEST(Network, ObservationsFiniteAndRewardBounded) {
  Network net(small_config(7), 3);
  const std::vector<Action> a(7, Action::equal_split());
  const RewardWeights w;
  const double r_max = w.tput_weight[0] + w.tput_weight[1] + w.tput_weight[2];
  for (int t = 0; t < 300; ++t) {
    const auto out = net.step(a);
    for (const auto& g : out.gnbs) {
      EXPECT_TRUE(g.next.finite());
      EXPECT_LE(g.reward, r_max + 1e-12);
      EXPECT_GE(g.constraints.g1, 0.0);
      EXPECT_GE(g.constraints.g2, 0.0);
      EXPECT_EQ(g.constraints.g3, 0.0);
      for (std::size_t s = 0; s < kNumSlices; ++s) {
        EXPECT_GE(g.components.throughput[s], 0.0);
        EXPECT_LE(g.components.throughput[s], 1.0 + 1e-12);
      }
    }
  }
}

TEST(Network, OverAllocationReportsG3) {
  Network net(small_config(2), 3);
  const std::vector<Action> a{Action{{0.6, 0.6, 0.2}}, Action::equal_split()};
  const auto out = net.step(a);
  EXPECT_NEAR(out.gnbs[0].constraints.g3, 0.4, 1e-12);
  EXPECT_EQ(out.gnbs[1].constraints.g3, 0.0);
}

TEST(Network, RejectsMalformedActions) {
  Network net(small_config(2), 3);
  const std::vector<Action> bad{Action{{-0.1, 0.5, 0.5}}, Action::equal_split()};
  EXPECT_THROW(net.step(bad), ContractViolation);
  const std::vector<Action> wrong_count{Action::equal_split()};
  EXPECT_THROW(net.step(wrong_count), ContractViolation);
}

TEST(Network, ResetRestartsEpisode) {
  Network net(small_config(3), 8);
  const std::vector<Action> a(3, Action::equal_split());
  for (int t = 0; t < 10; ++t) net.step(a);
  net.reset(0);
  Network fresh(small_config(3), 8);
  EXPECT_EQ(net.slot(), 0);
  for (std::size_t n = 0; n < 3; ++n) {
    // Queue features are normalized by a running maximum that persists
    // across episodes; everything else restarts.
    const auto& x = net.observation(n).features;
    const auto& y = fresh.observation(n).features;
    for (std::size_t i : {0, 1, 2, 6, 7, 8, 9, 10, 11}) EXPECT_EQ(x[i], y[i]);
    EXPECT_EQ(net.queue_lengths(n), fresh.queue_lengths(n));
  }
}

TEST(Config, RejectsInvalid) {
  EnvConfig c;
  c.num_gnbs = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = EnvConfig{};
  c.ues_per_cell = 2;
  EXPECT_THROW(c.validate(), ConfigError);
}
