#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "slicefed/agent.hpp"
#include "slicefed/env.hpp"
#include "slicefed/nn.hpp"

namespace slicefed::federation {

enum class SyncMode { Always, LossTriggered };

struct FederationConfig {
  std::size_t rounds = 200;
  std::size_t local_steps = 1000;
  SyncMode sync_mode = SyncMode::Always;
  double sync_threshold = 0.0;
  double participation = 1.0;  // fraction of gNBs selected per round
  double distill_weight = 0.1;
  std::size_t distill_probes = 256;

  void validate() const;
};

struct RoundPlan {
  std::size_t round = 0;
  std::vector<std::size_t> participants;
  std::size_t local_steps = 1000;
  std::vector<double> weights;  // aligned with participants

  void validate(std::size_t num_gnbs) const;
};

/// Participants drawn without replacement when participation < 1; uniform weights.
RoundPlan make_plan(std::size_t round, std::size_t num_gnbs, const FederationConfig& config, Rng& rng);

struct ModelUpdate {
  std::size_t gnb = 0;
  nn::ParamSet params;
  std::size_t samples = 0;
  double loss = 0.0;
  agent::DualVariables duals;
};

/// theta = sum_n (|D_n| / sum_j |D_j|) theta_n, summed in gNB order so the
/// result does not depend on the order of `updates`.
nn::ParamSet fedavg(std::span<const ModelUpdate> updates);

/// True iff the mean local loss strictly exceeds the threshold.
bool sync_trigger(std::span<const double> losses, double threshold);

/// Squared distance between local and global mean actions, averaged over probes.
double distillation_loss(const nn::ParamSet& local, const nn::ParamSet& global,
                         std::span<const env::Observation> probes);

/// Per-gNB round metrics (per-slot means over the round's rollout).
struct GnbRecord {
  double raw_reward = 0.0;
  double normalized_reward = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double g3 = 0.0;
  double leakage_w = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double distill_loss = 0.0;
  std::array<double, kNumConstraints> lambda{};
  PerSlice<double> allocation{};
};

struct RoundRecord {
  std::size_t round = 0;
  bool aggregated = false;
  std::vector<GnbRecord> gnbs;
  GnbRecord network_mean;
  std::string global_checksum;
};

/// Accumulates slot outcomes into GnbRecords.
class RoundAccumulator {
 public:
  explicit RoundAccumulator(std::size_t num_gnbs, double reward_normalizer);
  void add(const env::SlotOutcome& outcome, std::span<const Action> actions);
  RoundRecord finish(std::size_t round) const;

 private:
  std::vector<GnbRecord> sums_;
  double reward_normalizer_;
  std::size_t steps_ = 0;
};

GnbRecord network_mean(std::span<const GnbRecord> gnbs);

/// Synchronous federated round driver over one shared multi-cell network.
class Federation {
 public:
  Federation(const env::EnvConfig& env_config, const agent::AgentHyper& hyper, const FederationConfig& config,
             std::uint64_t seed);

  /// Broadcast (if a new global model exists), joint rollout of T_loc slots,
  /// local training of participants, optional aggregation. An exception from
  /// any agent leaves the global model and all agents untouched.
  RoundRecord run_round();
  RoundRecord run_round(const RoundPlan& plan);

  const nn::ParamSet& global() const { return global_; }
  const std::vector<agent::Agent>& agents() const { return agents_; }
  env::Network& network() { return network_; }
  std::size_t rounds_completed() const { return round_; }
  const std::vector<ModelUpdate>& last_updates() const { return last_updates_; }

  /// Round artifacts (one JSON object per line) go to this stream if set.
  void set_artifact_stream(std::ostream* out) { artifacts_ = out; }

 private:
  env::Network network_;
  agent::AgentHyper hyper_;
  FederationConfig config_;
  nn::ParamSet global_;
  std::vector<agent::Agent> agents_;
  std::vector<ModelUpdate> last_updates_;
  Rng plan_rng_;
  std::size_t round_ = 0;
  bool broadcast_pending_ = true;
  std::ostream* artifacts_ = nullptr;
};

/// Update exchange files: JSON with the serialized ParamSet embedded.
std::string update_to_json(const ModelUpdate& update);
ModelUpdate update_from_json(const std::string& text);
void write_update(const std::filesystem::path& path, const ModelUpdate& update);
ModelUpdate read_update(const std::filesystem::path& path);

/// One line: round, aggregation flag, per-gNB losses and duals, global checksum.
std::string round_artifact_line(const RoundRecord& record, std::span<const ModelUpdate> updates);

}  // namespace slicefed::federation
