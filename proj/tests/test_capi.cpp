#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "slicefed/slicefed.h"

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(sf_version(), "1.0.0");
  EXPECT_STREQ(sf_status_name(SF_OK), "ok");
  EXPECT_STREQ(sf_status_name(SF_ERR_SELFTEST), "selftest failure");
}

TEST(CApi, ConfigLifecycle) {
  sf_config* c = nullptr;
  ASSERT_EQ(sf_config_default(&c), SF_OK);
  EXPECT_EQ(sf_config_num_gnbs(c), 7u);
  ASSERT_EQ(sf_config_set_seeds(c, 40, 2), SF_OK);
  uint64_t base = 0;
  size_t count = 0;
  ASSERT_EQ(sf_config_get_seeds(c, &base, &count), SF_OK);
  EXPECT_EQ(base, 40u);
  EXPECT_EQ(count, 2u);

  size_t need = 0;
  ASSERT_EQ(sf_config_to_json(c, nullptr, 0, &need), SF_OK);
  std::string buf(need, '\0');
  ASSERT_EQ(sf_config_to_json(c, buf.data(), buf.size(), &need), SF_OK);
  char tiny[4];
  EXPECT_EQ(sf_config_to_json(c, tiny, sizeof tiny, &need), SF_ERR_INVALID_ARG);

  sf_config* d = nullptr;
  ASSERT_EQ(sf_config_parse(buf.c_str(), &d), SF_OK);
  EXPECT_EQ(sf_config_get_seeds(d, &base, &count), SF_OK);
  EXPECT_EQ(base, 40u);
  sf_config_free(d);
  sf_config_free(c);
}

TEST(CApi, ConfigErrors) {
  sf_config* c = nullptr;
  EXPECT_EQ(sf_config_parse(R"({"bogus": 1})", &c), SF_ERR_CONFIG);
  EXPECT_NE(std::string(sf_last_error()).find("bogus"), std::string::npos);
  EXPECT_EQ(sf_config_load("/nonexistent.json", &c), SF_ERR_CONFIG);
  EXPECT_EQ(sf_config_parse(nullptr, &c), SF_ERR_INVALID_ARG);
  ASSERT_EQ(sf_config_default(&c), SF_OK);
  EXPECT_EQ(sf_config_set_seeds(c, 1, 0), SF_ERR_CONFIG);
  EXPECT_EQ(sf_run_train(c, "/tmp", "oracle", nullptr, 0, nullptr, nullptr), SF_ERR_CONFIG);
  sf_config_free(c);
}

TEST(CApi, EnvironmentStep) {
  sf_config* c = nullptr;
  ASSERT_EQ(sf_config_parse(R"({"network": {"num_gnbs": 3, "ues_per_cell": 6}})", &c), SF_OK);
  sf_env* e = nullptr;
  ASSERT_EQ(sf_env_create(c, 5, &e), SF_OK);
  const size_t n = sf_env_num_gnbs(e);
  ASSERT_EQ(n, 3u);
  std::vector<double> obs(n * sf_env_obs_dim());
  ASSERT_EQ(sf_env_observe(e, obs.data()), SF_OK);
  for (double v : obs) EXPECT_TRUE(std::isfinite(v));
  std::vector<double> actions(n * 3, 1.0 / 3.0), rewards(n), g(n * 3);
  for (int t = 0; t < 10; ++t) ASSERT_EQ(sf_env_step(e, actions.data(), rewards.data(), g.data()), SF_OK);
  for (size_t i = 0; i < n; ++i) EXPECT_EQ(g[i * 3 + 2], 0.0);
  actions[0] = -1.0;
  EXPECT_EQ(sf_env_step(e, actions.data(), nullptr, nullptr), SF_ERR_INVALID_ARG);
  EXPECT_EQ(sf_env_reset(e, 1), SF_OK);
  sf_env_free(e);
  sf_config_free(c);
}

namespace {
void count_lines(void* user, const char*) { ++*static_cast<int*>(user); }
}  // namespace

TEST(CApi, TrainAndEvaluateSmallRun) {
  sf_config* c = nullptr;
  ASSERT_EQ(sf_config_parse(R"({
    "network": {"num_gnbs": 2, "ues_per_cell": 6},
    "agent": {"hidden": [16, 16]},
    "federation": {"rounds": 2, "local_steps": 20, "distill_probes": 8},
    "experiment": {"seeds": 1, "eval_slots": 60, "eval_episode_slots": 30, "sweep_slots": 20,
                   "sweep_lambdas": [4.0], "trace_slots": 20}
  })",
                            &c),
            SF_OK);
  const auto dir = std::filesystem::temp_directory_path() / "slicefed_capi_test";
  std::filesystem::remove_all(dir);
  int lines = 0;
  ASSERT_EQ(sf_run_train(c, dir.c_str(), "slicefed,equal", nullptr, 0, count_lines, &lines), SF_OK)
      << sf_last_error();
  ASSERT_EQ(sf_run_eval_cdf(c, dir.c_str(), nullptr, nullptr, 0, nullptr, nullptr), SF_OK) << sf_last_error();
  const uint64_t seeds[] = {1};
  ASSERT_EQ(sf_run_eval_traces(c, dir.c_str(), "queueprop", seeds, 1, nullptr, nullptr), SF_OK);
  ASSERT_EQ(sf_run_eval_sweep(c, dir.c_str(), "all", seeds, 1, nullptr, nullptr), SF_OK);
  EXPECT_TRUE(std::filesystem::exists(dir / "slicefed" / "seed_1" / "fig1_reward.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "equal" / "fig1_constraints.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "eval" / "fig2_cdf.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "eval" / "fig3_traces.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "eval" / "fig4_sweep.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "random"));
  std::filesystem::remove_all(dir);
  sf_config_free(c);
}
