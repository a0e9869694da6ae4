#include "slicefed/env.hpp"

#include <algorithm>

namespace slicefed::env {

bool Observation::finite() const {
  return std::all_of(features.begin(), features.end(), [](double v) { return std::isfinite(v); });
}

void RewardWeights::validate() const {
  for (std::size_t s = 0; s < kNumSlices; ++s) {
    if (!(tput_weight[s] >= 0.0 && qos_weight[s] >= 0.0 && recfg_weight[s] >= 0.0))
      throw ConfigError("reward weights must be >= 0");
  }
}

double EnvConfig::throughput_normalizer_bits() const {
  return bandwidth_hz * slot_seconds * std::log2(1.0 + sinr_cap);
}

void EnvConfig::validate() const {
  if (num_gnbs == 0) throw ConfigError("num_gnbs must be >= 1");
  if (ues_per_cell < kNumSlices) throw ConfigError("ues_per_cell must cover every slice");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be > 0");
  if (!(slot_seconds > 0.0)) throw ConfigError("slot_seconds must be > 0");
  if (!(inter_site_distance_m > 0.0)) throw ConfigError("inter_site_distance_m must be > 0");
  if (!(min_ue_distance_m > 0.0) || min_ue_distance_m >= inter_site_distance_m / 2.0)
    throw ConfigError("min_ue_distance_m must lie in (0, isd/2)");
  if (!(sinr_cap > 0.0)) throw ConfigError("sinr_cap must be > 0");
  if (!std::isfinite(interference_budget_dbm)) throw ConfigError("interference_budget_dbm must be finite");
  try {
    fading.validate();
    traffic.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  reward.validate();
}

double compute_reward(const RewardComponents& c, const RewardWeights& w) {
  double r = 0.0;
  for (std::size_t s = 0; s < kNumSlices; ++s) {
    r += w.tput_weight[s] * c.throughput[s] - w.qos_weight[s] * c.qos_penalty[s] -
         w.recfg_weight[s] * c.recfg_cost[s];
  }
  return r;
}

PerSlice<double> reconfiguration_cost(const Action& current, const Action& previous) {
  PerSlice<double> rho{};
  for (std::size_t s = 0; s < kNumSlices; ++s) rho[s] = std::abs(current.fractions[s] - previous.fractions[s]);
  return rho;
}

double constraint_g1(double leakage_w, double budget_w) { return std::max(0.0, leakage_w - budget_w); }

double constraint_g2(std::span<const traffic::Completion> urllc_completions, traffic::SliceQueue& urllc_backlog,
                     std::int64_t deadline, std::int64_t slot) {
  return static_cast<double>(traffic::deadline_violations(urllc_completions, urllc_backlog, deadline, slot));
}

double constraint_g3(const Action& action) {
  const double excess = action.sum() - 1.0;
  return excess > kSimplexTolerance ? excess : 0.0;
}

Network::Network(const EnvConfig& config, std::uint64_t seed)
    : config_(config),
      seed_(seed),
      queues_(config.num_gnbs),
      queue_running_max_(config.num_gnbs, PerSlice<double>{1.0, 1.0, 1.0}),
      previous_actions_(config.num_gnbs, Action::equal_split()),
      observations_(config.num_gnbs) {
  config_.validate();
  for (auto& per_gnb : queues_) {
    per_gnb = {traffic::SliceQueue(Slice::EMBB), traffic::SliceQueue(Slice::URLLC), traffic::SliceQueue(Slice::MMTC)};
  }
  reset(0);
}

void Network::enqueue_arrivals(std::int64_t slot) {
  for (std::size_t n = 0; n < config_.num_gnbs; ++n) {
    for (std::size_t s = 0; s < kNumSlices; ++s) {
      const auto count = traffic::sample_arrivals(config_.traffic.arrival_rate(static_cast<Slice>(s)), traffic_streams_[n]);
      queues_[n][s].enqueue(count, slot, config_.traffic.packet_bits[s]);
      queue_running_max_[n][s] = std::max(queue_running_max_[n][s], static_cast<double>(queues_[n][s].size()));
    }
  }
}

void Network::reset(std::uint64_t episode) {
  const std::size_t n_gnbs = config_.num_gnbs;
  Rng topo_rng = make_stream(seed_, stream::kTopology, episode);
  topology_ = channel::Topology::hexagonal(n_gnbs, config_.ues_per_cell, config_.inter_site_distance_m,
                                           config_.min_ue_distance_m, topo_rng);
  channel_ = channel::ChannelState(topology_, config_.fading, topo_rng);
  fading_streams_.clear();
  traffic_streams_.clear();
  for (std::size_t n = 0; n < n_gnbs; ++n) {
    fading_streams_.push_back(make_stream(seed_, stream::kFading, (episode << 16) | n));
    traffic_streams_.push_back(make_stream(seed_, stream::kTraffic, (episode << 16) | n));
  }
  for (auto& per_gnb : queues_)
    for (auto& q : per_gnb) q.clear();
  std::fill(previous_actions_.begin(), previous_actions_.end(), Action::equal_split());
  slot_ = 0;

  // CSI for the first decision comes from a pre-episode fading draw.
  channel_.draw_slot(-1, fading_streams_);
  const auto& gains = channel_.gains();
  last_sinr_.assign(gains.num_ues(), 0.0);
  std::vector<double> se(gains.num_ues());
  for (std::size_t u = 0; u < gains.num_ues(); ++u) {
    last_sinr_[u] = channel::sinr(gains.serving_cell(u), u, gains, config_.fading);
    se[u] = std::log2(1.0 + std::min(last_sinr_[u], config_.sinr_cap));
  }
  enqueue_arrivals(0);
  for (std::size_t n = 0; n < n_gnbs; ++n)
    observations_[n] = build_observation(n, slice_spectral_efficiency(n, se), 0.0, 0.0, 0.0);
}

PerSlice<double> Network::slice_spectral_efficiency(std::size_t gnb, std::span<const double> se) const {
  PerSlice<double> sum{};
  PerSlice<double> count{};
  for (std::size_t k = 0; k < config_.ues_per_cell; ++k) {
    const std::size_t s = index(slice_of_local_ue(k));
    sum[s] += se[gnb * config_.ues_per_cell + k];
    count[s] += 1.0;
  }
  for (std::size_t s = 0; s < kNumSlices; ++s) sum[s] = count[s] > 0 ? sum[s] / count[s] : 0.0;
  return sum;
}

Observation Network::build_observation(std::size_t gnb, const PerSlice<double>& mean_se, double tput_norm,
                                       double violations, double leakage_w) {
  Observation obs;
  for (std::size_t s = 0; s < kNumSlices; ++s) {
    obs.features[s] = mean_se[s];
    obs.features[3 + s] = static_cast<double>(queues_[gnb][s].size()) / queue_running_max_[gnb][s];
    obs.features[6 + s] = previous_actions_[gnb].fractions[s];
  }
  obs.features[9] = tput_norm;
  obs.features[10] = violations;
  obs.features[11] = leakage_w / config_.interference_budget_w();
  return obs;
}

PerSlice<double> Network::queue_lengths(std::size_t gnb) const {
  PerSlice<double> q{};
  for (std::size_t s = 0; s < kNumSlices; ++s) q[s] = static_cast<double>(queues_.at(gnb)[s].size());
  return q;
}

SlotOutcome Network::step(std::span<const Action> actions) {
  const std::size_t n_gnbs = config_.num_gnbs;
  const std::size_t upc = config_.ues_per_cell;
  if (actions.size() != n_gnbs) throw ContractViolation("step: expected one action per gNB");
  for (const auto& a : actions) {
    if (!a.valid()) throw ContractViolation("step: malformed action (fractions must be finite and in [0,1])");
  }

  // Phase 1: channel and rates from the shared slot gain matrix.
  channel_.draw_slot(slot_, fading_streams_);
  const auto& gains = channel_.gains();
  std::vector<double> capped(gains.num_ues());
  std::vector<double> se(gains.num_ues());
  for (std::size_t u = 0; u < gains.num_ues(); ++u) {
    last_sinr_[u] = channel::sinr(gains.serving_cell(u), u, gains, config_.fading);
    capped[u] = std::min(last_sinr_[u], config_.sinr_cap);
    se[u] = std::log2(1.0 + capped[u]);
  }

  const double normalizer = config_.throughput_normalizer_bits();
  PerSlice<double> slice_ues{};
  for (std::size_t k = 0; k < upc; ++k) slice_ues[index(slice_of_local_ue(k))] += 1.0;

  SlotOutcome out;
  out.slot = slot_;
  out.gnbs.resize(n_gnbs);
  std::vector<PerSlice<double>> utilization(n_gnbs);
  std::vector<std::vector<traffic::Completion>> urllc_completions(n_gnbs);

  // Phase 2: per-gNB queue service.
  for (std::size_t n = 0; n < n_gnbs; ++n) {
    GnbOutcome& g = out.gnbs[n];
    Action effective = actions[n];
    const double total = effective.sum();
    if (total > 1.0) {
      for (double& f : effective.fractions) f /= total;
    }
    PerSlice<double> capacity{};
    for (std::size_t k = 0; k < upc; ++k) {
      const std::size_t s = index(slice_of_local_ue(k));
      const double ue_bandwidth = effective.fractions[s] * config_.bandwidth_hz / slice_ues[s];
      capacity[s] += channel::achievable_rate(ue_bandwidth, capped[n * upc + k]) * config_.slot_seconds;
    }
    for (std::size_t s = 0; s < kNumSlices; ++s) {
      auto& queue = queues_[n][s];
      const double backlog_before = queue.backlog_bits();
      auto served = queue.serve(capacity[s], slot_);
      utilization[n][s] = capacity[s] > 0.0 ? served.served_bits / capacity[s] : 0.0;
      g.throughput_bits[s] = served.served_bits;
      g.components.throughput[s] = served.served_bits / normalizer;
      if (static_cast<Slice>(s) == Slice::URLLC) {
        urllc_completions[n] = std::move(served.completions);
      } else {
        const double required = config_.traffic.arrival_rate(static_cast<Slice>(s)) * config_.traffic.packet_bits[s];
        const double demand = std::min(backlog_before, required);
        g.components.qos_penalty[s] = required > 0.0 ? std::max(0.0, demand - served.served_bits) / required : 0.0;
      }
    }
  }

  const double budget = config_.interference_budget_w();
  for (std::size_t n = 0; n < n_gnbs; ++n) {
    GnbOutcome& g = out.gnbs[n];
    g.leakage_w = channel::interference_leakage(n, gains, actions, config_.fading, utilization);
    g.constraints.g1 = constraint_g1(g.leakage_w, budget);
    g.constraints.g2 = constraint_g2(urllc_completions[n], queues_[n][index(Slice::URLLC)],
                                     config_.traffic.urllc_deadline_slots, slot_);
    g.constraints.g3 = constraint_g3(actions[n]);
    g.components.qos_penalty[index(Slice::URLLC)] = g.constraints.g2;
    g.components.recfg_cost = reconfiguration_cost(actions[n], previous_actions_[n]);
    g.reward = compute_reward(g.components, config_.reward);
    g.urllc_delays.reserve(urllc_completions[n].size());
    for (const auto& c : urllc_completions[n]) g.urllc_delays.push_back(c.delay);
    previous_actions_[n] = actions[n];
  }

  enqueue_arrivals(slot_ + 1);
  for (std::size_t n = 0; n < n_gnbs; ++n) {
    GnbOutcome& g = out.gnbs[n];
    const auto& c = g.components.throughput;
    observations_[n] = build_observation(n, slice_spectral_efficiency(n, se), c[0] + c[1] + c[2],
                                         g.constraints.g2, g.leakage_w);
    g.next = observations_[n];
  }
  ++slot_;
  return out;
}

}  // namespace slicefed::env
