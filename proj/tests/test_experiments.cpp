#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "slicefed/experiments.hpp"

using namespace slicefed;
using namespace slicefed::experiments;
namespace fs = std::filesystem;

namespace {

ScenarioConfig tiny() {
  ScenarioConfig c;
  c.network.num_gnbs = 2;
  c.network.ues_per_cell = 6;
  c.agent.hidden = {16, 16};
  c.federation.rounds = 2;
  c.federation.local_steps = 30;
  c.federation.distill_probes = 8;
  c.experiment.seeds = 2;
  c.experiment.eval_slots = 120;
  c.experiment.eval_episode_slots = 60;
  c.experiment.sweep_slots = 40;
  c.experiment.sweep_lambdas = {2.0, 6.0};
  c.experiment.trace_slots = 40;
  return c;
}

fs::path fresh_dir(const std::string& tag) {
  std::random_device rd;
  const auto p = fs::temp_directory_path() / ("slicefed_test_" + tag + "_" + std::to_string(rd()));
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST(Analysis, RollingMean) {
  const std::vector<double> v{1, 2, 3, 4, 5};
  EXPECT_EQ(rolling_mean(v, 2), (std::vector<double>{1.5, 2.5, 3.5, 4.5}));
  EXPECT_EQ(rolling_mean(v, 10), (std::vector<double>{3.0}));
  EXPECT_EQ(rolling_mean(v, 1), v);
}

TEST(Analysis, ConvergenceRatio) {
  // Peak rolling mean (window 2) is 9; final 20% of 10 values is {0.5, 0.5}.
  const std::vector<double> g{8, 10, 8, 4, 2, 1, 1, 1, 0.5, 0.5};
  EXPECT_NEAR(convergence_ratio(g, 2), 0.5 / 9.0, 1e-15);
  const std::vector<double> zeros(10, 0.0);
  EXPECT_EQ(convergence_ratio(zeros, 2), 0.0);
}

TEST(Analysis, TailNonincreasing) {
  std::vector<double> down;
  for (int i = 0; i < 20; ++i) down.push_back(20.0 - i);
  EXPECT_TRUE(tail_nonincreasing(down, 5, 10));
  auto bump = down;
  bump[18] = 30.0;
  EXPECT_FALSE(tail_nonincreasing(bump, 5, 10));
  EXPECT_TRUE(tail_nonincreasing(std::vector<double>(20, 0.0), 5, 10));
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(3.0), "3");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Policies, Names) {
  for (auto k : kAllPolicies) EXPECT_EQ(parse_policy(to_string(k)), k);
  EXPECT_FALSE(parse_policy("oracle").has_value());
}

TEST(EvalStatsTest, CdfCountsCensoredAsLate) {
  EvalStats s;
  s.delay_counts = {{1, 6}, {2, 2}};
  s.censored = 2;
  EXPECT_EQ(s.packets(), 10u);
  EXPECT_DOUBLE_EQ(s.cdf(1), 0.6);
  EXPECT_DOUBLE_EQ(s.cdf(2), 0.8);
  EXPECT_DOUBLE_EQ(s.cdf(100), 0.8);
  EvalStats t;
  t.delay_counts = {{1, 10}};
  s.merge(t);
  EXPECT_DOUBLE_EQ(s.cdf(1), 0.8);
}

TEST(Evaluate, OverProvisionedSingleSliceMeetsDeadline) {
  ScenarioConfig c = tiny();
  c.network.num_gnbs = 1;
  c.network.inter_site_distance_m = 100.0;
  c.network.fading.shadowing_sigma_db = 0.0;
  c.network.traffic.lambda_embb = 0.0;
  c.network.traffic.lambda_mmtc = 0.0;
  c.network.traffic.lambda_urllc = 2.0;
  const auto stats = evaluate(c, c.network, PolicyKind::QueueProportional, nullptr, 1, 500);
  ASSERT_GT(stats.packets(), 0u);
  EXPECT_EQ(stats.cdf(1), 1.0);
  EXPECT_EQ(stats.mean_g2(), 0.0);
}

TEST(Trace, ZeroArrivalsAndEqualSlicing) {
  ScenarioConfig c = tiny();
  c.network.traffic.lambda_embb = 0.0;
  c.network.traffic.lambda_urllc = 0.0;
  c.network.traffic.lambda_mmtc = 0.0;
  const auto tr = trace(c, PolicyKind::EqualSlicing, nullptr, 3);
  ASSERT_EQ(tr.queues.size(), c.experiment.trace_slots);
  for (const auto& q : tr.queues)
    for (double v : q) EXPECT_EQ(v, 0.0);
  for (const auto& a : tr.allocations)
    for (double v : a) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
  for (double v : tr.allocation_variance()) EXPECT_EQ(v, 0.0);
}

TEST(Training, ZeroRoundsLeavesInitialModel) {
  ScenarioConfig c = tiny();
  c.federation.rounds = 0;
  const auto a = train_seed(c, PolicyKind::SliceFed, 5);
  EXPECT_TRUE(a.rounds.empty());
  federation::Federation fresh(c.network, c.agent, c.federation, 5);
  EXPECT_EQ(nn::serialize(a.global), nn::serialize(fresh.global()));
}

TEST(Training, BaselineRoundsHaveNoModel) {
  const auto r = train_seed(tiny(), PolicyKind::RandomDirichlet, 5);
  EXPECT_EQ(r.rounds.size(), 2u);
  EXPECT_EQ(r.global.num_parameters(), 0u);
  for (const auto& rec : r.rounds) EXPECT_EQ(rec.network_mean.g3, 0.0);
}

TEST(Suites, ByteIdenticalAcrossRuns) {
  const ScenarioConfig c = tiny();
  auto run = [&](const fs::path& out) {
    RunOptions o;
    o.out_dir = out;
    for (auto k : kAllPolicies) run_training(c, k, o);
    run_delay_cdf(c, o);
    run_queue_traces(c, o);
    run_load_sweep(c, o);
  };
  const auto a = fresh_dir("a");
  const auto b = fresh_dir("b");
  run(a);
  run(b);
  const auto ta = tree(a);
  const auto tb = tree(b);
  EXPECT_EQ(ta, tb);
  for (const char* f : {"slicefed/fig1_reward.csv", "slicefed/fig1_constraints.csv", "eval/fig2_cdf.csv",
                        "eval/fig3_traces.csv", "eval/fig4_sweep.csv"}) {
    ASSERT_TRUE(ta.contains(f)) << f;
  }
  // Every record file carries the resolved config in its header.
  for (const auto& [name, content] : ta) {
    if (name.ends_with(".csv") || name.ends_with(".params")) {
      EXPECT_TRUE(content.starts_with("# {")) << name;
    } else if (name.ends_with(".jsonl")) {
      EXPECT_TRUE(content.starts_with("{\"header\"")) << name;
    }
    EXPECT_NE(content.find("\"base_seed\""), std::string::npos) << name;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Suites, EnsureModelReusesMatchingTraining) {
  const ScenarioConfig c = tiny();
  const auto dir = fresh_dir("ensure");
  RunOptions o;
  o.out_dir = dir;
  o.seeds = {1};
  run_training(c, PolicyKind::SliceFed, o);
  const auto stored = slurp(dir / "slicefed" / "seed_1" / "global_model.params");
  const auto model = ensure_model(c, 1, o);
  EXPECT_NE(stored.find(nn::serialize(model)), std::string::npos);
  EXPECT_EQ(slurp(dir / "slicefed" / "seed_1" / "global_model.params"), stored);
  fs::remove_all(dir);
}
