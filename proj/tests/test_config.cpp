#include <gtest/gtest.h>

#include "slicefed/config.hpp"

using namespace slicefed;

TEST(Config, EmptyObjectIsDefaults) {
  const auto c = config_from_json("{}");
  EXPECT_EQ(config_to_json(c), config_to_json(ScenarioConfig{}));
  EXPECT_EQ(c.network.num_gnbs, 7u);
  EXPECT_EQ(c.federation.rounds, 200u);
}

TEST(Config, RoundTrip) {
  ScenarioConfig c;
  c.network.traffic.lambda_urllc = 5.5;
  c.agent.hidden = {32, 16};
  c.federation.sync_mode = federation::SyncMode::LossTriggered;
  c.federation.sync_threshold = 0.25;
  c.experiment.sweep_lambdas = {1.0, 2.5};
  const std::string text = config_to_json(c);
  const auto back = config_from_json(text);
  EXPECT_EQ(config_to_json(back), text);
  EXPECT_EQ(back.agent.hidden, (std::vector<std::size_t>{32, 16}));
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(config_from_json(R"({"netwrok": {}})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"network": {"fading": {"alpha": 3}}})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"agent": {"lr": 0.1}})"), ConfigError);
}

TEST(Config, TypeAndValueErrors) {
  EXPECT_THROW(config_from_json(R"({"network": {"num_gnbs": "seven"}})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"network": {"num_gnbs": 0}})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"agent": {"advantage": "mc"}})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"federation": {"participation": 1.5}})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"experiment": {"trace_gnb": 7}})"), ConfigError);
  EXPECT_THROW(config_from_json("{not json"), ConfigError);
  EXPECT_THROW(config_from_json("[]"), ConfigError);
}

TEST(Config, Smoke) {
  ScenarioConfig c;
  c.apply_smoke();
  EXPECT_EQ(c.federation.rounds, 20u);
  EXPECT_EQ(c.federation.local_steps, 200u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, SeedList) {
  ScenarioConfig c;
  c.experiment.base_seed = 10;
  c.experiment.seeds = 3;
  EXPECT_EQ(c.seed_list(), (std::vector<std::uint64_t>{10, 11, 12}));
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError); }
