#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "slicefed/agent.hpp"
#include "slicefed/env.hpp"
#include "slicefed/federation.hpp"

namespace slicefed {

struct ExperimentSettings {
  std::size_t seeds = 5;
  std::uint64_t base_seed = 1;
  std::size_t eval_slots = 10000;         // per seed, per policy
  std::size_t eval_episode_slots = 1000;
  std::vector<std::int64_t> cdf_grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 50, 100};
  std::vector<double> sweep_lambdas{2.0, 3.0, 4.0, 5.0, 6.0};
  std::size_t sweep_slots = 2000;         // per seed, per policy, per lambda
  std::size_t trace_gnb = 0;
  std::size_t trace_slots = 1000;
  std::size_t rolling_window = 5;
  bool stochastic_eval = false;           // sample the learned policy instead of its mean action

  void validate(std::size_t num_gnbs) const;
};

struct ScenarioConfig {
  env::EnvConfig network;
  agent::AgentHyper agent;
  federation::FederationConfig federation;
  ExperimentSettings experiment;

  void validate() const;
  /// Reduced horizon for CI: 20 rounds of 200 slots, shorter evaluations.
  void apply_smoke();
  std::vector<std::uint64_t> seed_list() const;
};

/// Key-value tree mirroring the struct field names. Missing keys keep their
/// defaults; unknown keys and ill-typed values raise ConfigError.
ScenarioConfig config_from_json(const std::string& text);
std::string config_to_json(const ScenarioConfig& config, int indent = 2);
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace slicefed
