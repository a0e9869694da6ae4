#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicefed/baselines.hpp"
#include "slicefed/config.hpp"
#include "slicefed/federation.hpp"

namespace slicefed::experiments {

enum class PolicyKind { SliceFed, EqualSlicing, QueueProportional, RandomDirichlet };

inline constexpr std::array<PolicyKind, 4> kAllPolicies{PolicyKind::SliceFed, PolicyKind::EqualSlicing,
                                                       PolicyKind::QueueProportional, PolicyKind::RandomDirichlet};

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);

/// Decides one slot of actions for every gNB of a network.
class Controller {
 public:
  /// `model` is required for SliceFed and ignored otherwise.
  Controller(PolicyKind kind, const nn::ParamSet* model, bool stochastic, std::uint64_t seed);
  std::vector<Action> decide(const env::Network& network);
  PolicyKind kind() const { return kind_; }

 private:
  PolicyKind kind_;
  const nn::ParamSet* model_;
  bool stochastic_;
  Rng rng_;
};

struct SeedTraining {
  std::uint64_t seed = 0;
  std::vector<federation::RoundRecord> rounds;
  nn::ParamSet global;  // empty for baselines
};

using RoundCallback = std::function<void(const federation::RoundRecord&)>;

/// K federated rounds for SliceFed, or K rollout rounds of T_loc slots for a
/// baseline on the same episode schedule.
SeedTraining train_seed(const ScenarioConfig& config, PolicyKind kind, std::uint64_t seed,
                        std::ostream* artifacts = nullptr, const RoundCallback& on_round = {});

/// Delay histogram of URLLC packets plus aggregate per-slot metrics.
struct EvalStats {
  std::map<std::int64_t, std::uint64_t> delay_counts;
  std::uint64_t censored = 0;  // still queued at episode end after at least one service opportunity
  double g2_sum = 0.0;
  double raw_reward_sum = 0.0;
  std::uint64_t gnb_slots = 0;

  std::uint64_t packets() const;
  double mean_g2() const { return gnb_slots ? g2_sum / static_cast<double>(gnb_slots) : 0.0; }
  double mean_raw_reward() const { return gnb_slots ? raw_reward_sum / static_cast<double>(gnb_slots) : 0.0; }
  /// Fraction of packets with delay <= d; censored packets count as late.
  double cdf(std::int64_t d) const;
  void merge(const EvalStats& other);
};

/// Runs `slots` slots in episodes of `episode_slots` on the seed's evaluation
/// network (same topologies for every policy).
EvalStats evaluate(const ScenarioConfig& config, const env::EnvConfig& env_config, PolicyKind kind,
                   const nn::ParamSet* model, std::uint64_t seed, std::size_t slots);

struct Trace {
  std::vector<PerSlice<double>> queues;       // packets, observed before each decision
  std::vector<PerSlice<double>> allocations;
  PerSlice<double> allocation_variance() const;
};

Trace trace(const ScenarioConfig& config, PolicyKind kind, const nn::ParamSet* model, std::uint64_t seed);

/// Trailing means over full windows: element i covers values[i, i + window).
/// A series shorter than the window yields its overall mean.
std::vector<double> rolling_mean(std::span<const double> values, std::size_t window);
/// Mean of the final 20% of the series divided by the peak rolling mean.
double convergence_ratio(std::span<const double> g2, std::size_t window);
/// The last `tail` rolling means never increase.
bool tail_nonincreasing(std::span<const double> g2, std::size_t window, std::size_t tail);

std::vector<double> g2_series(std::span<const federation::RoundRecord> rounds);

// ---------------------------------------------------------------------------
// File-producing suites. Every file starts with a reproducibility header.

struct RunOptions {
  std::filesystem::path out_dir = "results";
  std::vector<std::uint64_t> seeds;  // empty: config seed list
  std::vector<PolicyKind> policies;  // evaluation suites; empty: all four
  std::ostream* log = nullptr;
};

/// JSON object: resolved config, seeds, reward normalizer and command.
std::string header_json(const ScenarioConfig& config, std::string_view command, std::string_view policy,
                        std::span<const std::uint64_t> seeds);

/// Writes <out>/<policy>/seed_<s>/{header.json, rounds.jsonl, fig1_reward.csv,
/// fig1_constraints.csv} and, for SliceFed, round_artifacts.jsonl and
/// global_model.params; plus cross-seed fig1 files under <out>/<policy>/.
std::vector<SeedTraining> run_training(const ScenarioConfig& config, PolicyKind kind, const RunOptions& options);

/// Trained global model for a seed, training it first if it is missing or was
/// trained under a different configuration.
nn::ParamSet ensure_model(const ScenarioConfig& config, std::uint64_t seed, const RunOptions& options);

struct CdfTable {
  std::map<PolicyKind, EvalStats> pooled;
  std::map<PolicyKind, std::map<std::uint64_t, EvalStats>> per_seed;
};
CdfTable run_delay_cdf(const ScenarioConfig& config, const RunOptions& options);

struct TraceTable {
  std::map<PolicyKind, std::map<std::uint64_t, Trace>> traces;
};
TraceTable run_queue_traces(const ScenarioConfig& config, const RunOptions& options);

struct SweepPoint {
  double mean_normalized_reward = 0.0;
  double std_normalized_reward = 0.0;
  double mean_g2 = 0.0;
  double std_g2 = 0.0;
  std::vector<double> seed_g2;
  std::vector<double> seed_normalized_reward;
};
struct SweepTable {
  std::vector<double> lambdas;
  std::map<PolicyKind, std::vector<SweepPoint>> points;  // aligned with lambdas
};
SweepTable run_load_sweep(const ScenarioConfig& config, const RunOptions& options);

/// Shortest round-trip decimal text; stable across runs.
std::string format_double(double v);

}  // namespace slicefed::experiments
