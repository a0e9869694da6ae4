#pragma once

#include <span>
#include <vector>

#include "slicefed/channel.hpp"
#include "slicefed/common.hpp"
#include "slicefed/traffic.hpp"

namespace slicefed::env {

inline constexpr std::size_t kObsDim = 12;

/// Per-gNB local state. Layout:
///   [0,3)  mean spectral efficiency log2(1+gamma) of each slice's UEs
///   [3,6)  queue lengths / running max
///   [6,9)  previous allocation
///   9      last-slot throughput (sum over slices, normalized)
///   10     last-slot URLLC deadline violations
///   11     last-slot leakage / I_max
struct Observation {
  std::array<double, kObsDim> features{};

  double operator[](std::size_t i) const { return features[i]; }
  bool finite() const;
};

struct RewardWeights {
  PerSlice<double> tput_weight{1.0, 1.0, 1.0};
  PerSlice<double> qos_weight{0.1, 10.0, 0.1};
  PerSlice<double> recfg_weight{0.1, 0.1, 0.1};

  void validate() const;
};

struct ConstraintSignals {
  double g1 = 0.0;  // watts above the leakage budget
  double g2 = 0.0;  // URLLC deadline violations this slot
  double g3 = 0.0;  // allocation excess over 1

  std::array<double, kNumConstraints> as_array() const { return {g1, g2, g3}; }
};

struct RewardComponents {
  PerSlice<double> throughput{};  // eta, normalized to [0,1] per slot
  PerSlice<double> qos_penalty{};  // delta
  PerSlice<double> recfg_cost{};   // rho
};

struct GnbOutcome {
  Observation next;
  double reward = 0.0;
  ConstraintSignals constraints;
  RewardComponents components;
  PerSlice<double> throughput_bits{};
  double leakage_w = 0.0;
  std::vector<std::int64_t> urllc_delays;  // completions this slot
};

struct SlotOutcome {
  std::int64_t slot = 0;
  std::vector<GnbOutcome> gnbs;
};

struct EnvConfig {
  std::size_t num_gnbs = 7;
  std::size_t ues_per_cell = 10;
  double bandwidth_hz = 20e6;
  double slot_seconds = 1e-3;
  double inter_site_distance_m = 500.0;
  double min_ue_distance_m = 10.0;
  channel::FadingParams fading;
  double interference_budget_dbm = -15.0;
  double sinr_cap = 1e3;
  traffic::TrafficConfig traffic;
  RewardWeights reward;

  double interference_budget_w() const { return dbm_to_watts(interference_budget_dbm); }
  /// Bits one slot carries over the whole band at the SINR cap.
  double throughput_normalizer_bits() const;
  void validate() const;
};

double compute_reward(const RewardComponents& c, const RewardWeights& w);
PerSlice<double> reconfiguration_cost(const Action& current, const Action& previous);

double constraint_g1(double leakage_w, double budget_w);
double constraint_g2(std::span<const traffic::Completion> urllc_completions, traffic::SliceQueue& urllc_backlog,
                     std::int64_t deadline, std::int64_t slot);
double constraint_g3(const Action& action);

/// The coupled multi-cell world: channel, queues and per-gNB CMDP bookkeeping.
class Network {
 public:
  Network(const EnvConfig& config, std::uint64_t seed);

  /// New episode: fresh UE drop and shadowing, empty queues, first arrivals.
  void reset(std::uint64_t episode);

  /// Advances one slot for all gNBs jointly.
  SlotOutcome step(std::span<const Action> actions);

  std::size_t num_gnbs() const { return config_.num_gnbs; }
  std::int64_t slot() const { return slot_; }
  const EnvConfig& config() const { return config_; }
  const Observation& observation(std::size_t gnb) const { return observations_.at(gnb); }
  std::span<const Observation> observations() const { return observations_; }
  PerSlice<double> queue_lengths(std::size_t gnb) const;
  const traffic::SliceQueue& queue(std::size_t gnb, Slice s) const { return queues_.at(gnb)[index(s)]; }
  const channel::GainMatrix& gains() const { return channel_.gains(); }
  const channel::Topology& topology() const { return topology_; }
  /// Uncapped SINR per global UE from the last step.
  std::span<const double> last_sinr() const { return last_sinr_; }

 private:
  Observation build_observation(std::size_t gnb, const PerSlice<double>& mean_se, double tput_norm,
                                double violations, double leakage_w);
  PerSlice<double> slice_spectral_efficiency(std::size_t gnb, std::span<const double> se) const;
  void enqueue_arrivals(std::int64_t slot);

  EnvConfig config_;
  std::uint64_t seed_;
  channel::Topology topology_;
  channel::ChannelState channel_;
  std::vector<Rng> fading_streams_;
  std::vector<Rng> traffic_streams_;
  std::vector<PerSlice<traffic::SliceQueue>> queues_;
  std::vector<PerSlice<double>> queue_running_max_;
  std::vector<Action> previous_actions_;
  std::vector<Observation> observations_;
  std::vector<double> last_sinr_;
  std::int64_t slot_ = 0;
};

}  // namespace slicefed::env
