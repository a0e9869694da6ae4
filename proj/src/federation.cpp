#include "slicefed/federation.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace slicefed::federation {

using nlohmann::json;

void FederationConfig::validate() const {
  if (local_steps == 0) throw ConfigError("local_steps must be >= 1");
  if (!(participation > 0.0 && participation <= 1.0)) throw ConfigError("participation must lie in (0,1]");
  if (!(distill_weight >= 0.0)) throw ConfigError("distill_weight must be >= 0");
  if (!std::isfinite(sync_threshold)) throw ConfigError("sync_threshold must be finite");
}

void RoundPlan::validate(std::size_t num_gnbs) const {
  if (participants.empty()) throw ProtocolError("round plan has no participants");
  if (weights.size() != participants.size()) throw ProtocolError("round plan weights misaligned");
  for (std::size_t n : participants)
    if (n >= num_gnbs) throw ProtocolError("round plan names an unknown gNB");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw ProtocolError("round plan weights must sum to 1");
  if (local_steps == 0) throw ProtocolError("round plan local horizon must be >= 1");
}

RoundPlan make_plan(std::size_t round, std::size_t num_gnbs, const FederationConfig& config, Rng& rng) {
  RoundPlan plan;
  plan.round = round;
  plan.local_steps = config.local_steps;
  plan.participants.resize(num_gnbs);
  std::iota(plan.participants.begin(), plan.participants.end(), 0);
  if (config.participation < 1.0) {
    const auto count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(config.participation * static_cast<double>(num_gnbs))));
    std::shuffle(plan.participants.begin(), plan.participants.end(), rng);
    plan.participants.resize(count);
    std::sort(plan.participants.begin(), plan.participants.end());
  }
  plan.weights.assign(plan.participants.size(), 1.0 / static_cast<double>(plan.participants.size()));
  return plan;
}

nn::ParamSet fedavg(std::span<const ModelUpdate> updates) {
  if (updates.empty()) throw ProtocolError("fedavg: no updates to aggregate");
  std::vector<const ModelUpdate*> ordered;
  for (const auto& u : updates) {
    if (u.samples == 0) throw ProtocolError("fedavg: update with zero samples");
    if (!u.params.same_shape(updates.front().params)) throw ProtocolError("fedavg: parameter shapes differ");
    ordered.push_back(&u);
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) { return a->gnb < b->gnb; });

  double total = 0.0;
  for (const auto* u : ordered) total += static_cast<double>(u->samples);
  auto layers = ordered.front()->params.layers();
  for (auto& l : layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  for (const auto* u : ordered) {
    const double w = static_cast<double>(u->samples) / total;
    const auto& src = u->params.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
      layers[i].weight += w * src[i].weight;
      layers[i].bias += w * src[i].bias;
    }
  }
  return nn::ParamSet(std::move(layers));
}

bool sync_trigger(std::span<const double> losses, double threshold) {
  if (losses.empty()) return false;
  const double mean = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
  return mean > threshold;
}

double distillation_loss(const nn::ParamSet& local, const nn::ParamSet& global,
                         std::span<const env::Observation> probes) {
  return agent::mean_action_distance(local, global, probes);
}

RoundAccumulator::RoundAccumulator(std::size_t num_gnbs, double reward_normalizer)
    : sums_(num_gnbs), reward_normalizer_(reward_normalizer) {}

void RoundAccumulator::add(const env::SlotOutcome& outcome, std::span<const Action> actions) {
  for (std::size_t n = 0; n < sums_.size(); ++n) {
    const auto& g = outcome.gnbs[n];
    sums_[n].raw_reward += g.reward;
    sums_[n].g1 += g.constraints.g1;
    sums_[n].g2 += g.constraints.g2;
    sums_[n].g3 += g.constraints.g3;
    sums_[n].leakage_w += g.leakage_w;
    for (std::size_t s = 0; s < kNumSlices; ++s) sums_[n].allocation[s] += actions[n].fractions[s];
  }
  ++steps_;
}

RoundRecord RoundAccumulator::finish(std::size_t round) const {
  RoundRecord rec;
  rec.round = round;
  rec.gnbs = sums_;
  const double inv = steps_ > 0 ? 1.0 / static_cast<double>(steps_) : 0.0;
  for (auto& g : rec.gnbs) {
    g.raw_reward *= inv;
    g.normalized_reward = g.raw_reward / reward_normalizer_;
    g.g1 *= inv;
    g.g2 *= inv;
    g.g3 *= inv;
    g.leakage_w *= inv;
    for (double& a : g.allocation) a *= inv;
  }
  rec.network_mean = network_mean(rec.gnbs);
  return rec;
}

GnbRecord network_mean(std::span<const GnbRecord> gnbs) {
  GnbRecord m;
  if (gnbs.empty()) return m;
  const double inv = 1.0 / static_cast<double>(gnbs.size());
  for (const auto& g : gnbs) {
    m.raw_reward += g.raw_reward * inv;
    m.normalized_reward += g.normalized_reward * inv;
    m.g1 += g.g1 * inv;
    m.g2 += g.g2 * inv;
    m.g3 += g.g3 * inv;
    m.leakage_w += g.leakage_w * inv;
    m.actor_loss += g.actor_loss * inv;
    m.critic_loss += g.critic_loss * inv;
    m.distill_loss += g.distill_loss * inv;
    for (std::size_t i = 0; i < kNumConstraints; ++i) m.lambda[i] += g.lambda[i] * inv;
    for (std::size_t s = 0; s < kNumSlices; ++s) m.allocation[s] += g.allocation[s] * inv;
  }
  return m;
}

Federation::Federation(const env::EnvConfig& env_config, const agent::AgentHyper& hyper,
                       const FederationConfig& config, std::uint64_t seed)
    : network_(env_config, seed), hyper_(hyper), config_(config), plan_rng_(make_stream(seed, stream::kFederation)) {
  config_.validate();
  hyper_.validate();
  Rng init = make_stream(seed, stream::kInit, 0);
  // Small output layer so the initial policy is a near-uniform Dirichlet.
  global_ = nn::ParamSet::create(agent::layer_sizes(env::kObsDim, hyper_.hidden, kNumSlices), init, 0.01);
  agents_.reserve(env_config.num_gnbs);
  for (std::size_t n = 0; n < env_config.num_gnbs; ++n) agents_.emplace_back(hyper_, seed, n, global_);
}

RoundRecord Federation::run_round() {
  return run_round(make_plan(round_, network_.num_gnbs(), config_, plan_rng_));
}

RoundRecord Federation::run_round(const RoundPlan& plan) {
  const std::size_t n_gnbs = network_.num_gnbs();
  plan.validate(n_gnbs);

  std::vector<agent::Agent> work = agents_;
  if (broadcast_pending_) {
    for (auto& a : work) a.set_policy(global_);
  }

  network_.reset(plan.round);
  const auto& cfg = network_.config();
  RoundAccumulator acc(n_gnbs, cfg.bandwidth_hz * cfg.slot_seconds);
  std::vector<Action> actions(n_gnbs);
  std::vector<agent::ActResult> decisions(n_gnbs);
  std::vector<env::Observation> states(n_gnbs);
  for (std::size_t t = 0; t < plan.local_steps; ++t) {
    for (std::size_t n = 0; n < n_gnbs; ++n) {
      states[n] = network_.observation(n);
      decisions[n] = work[n].act(states[n]);
      actions[n] = decisions[n].action;
    }
    const env::SlotOutcome out = network_.step(actions);
    for (std::size_t n = 0; n < n_gnbs; ++n) {
      const auto& g = out.gnbs[n];
      // Episodes end on a time limit, not a terminal state: keep bootstrapping.
      work[n].record(states[n], decisions[n], g.reward, g.constraints, g.next, false);
    }
    acc.add(out, actions);
  }

  RoundRecord record = acc.finish(plan.round);
  std::vector<ModelUpdate> updates;
  std::vector<double> losses;
  for (std::size_t n : plan.participants) {
    auto& agent = work[n];
    const auto stats = agent.train();
    const double distill = agent.distill(global_, config_.distill_probes, config_.distill_weight);
    agent.update_duals();
    auto& rec = record.gnbs[n];
    rec.actor_loss = stats.actor_loss;
    rec.critic_loss = stats.critic_loss;
    rec.distill_loss = distill;
    ModelUpdate u;
    u.gnb = n;
    u.params = agent.policy();
    u.samples = stats.samples;
    u.loss = stats.critic_loss + std::abs(stats.actor_loss);
    u.duals = agent.duals();
    losses.push_back(u.loss);
    updates.push_back(std::move(u));
  }
  for (std::size_t n = 0; n < n_gnbs; ++n) {
    record.gnbs[n].lambda = work[n].duals().lambda;
    work[n].clear_buffer();
  }

  const bool aggregate = config_.sync_mode == SyncMode::Always || sync_trigger(losses, config_.sync_threshold);
  nn::ParamSet next_global = aggregate ? fedavg(updates) : global_;
  if (!next_global.finite()) throw NumericalFailure("aggregated global model is non-finite");

  // Commit.
  agents_ = std::move(work);
  global_ = std::move(next_global);
  broadcast_pending_ = aggregate;
  last_updates_ = std::move(updates);
  record.aggregated = aggregate;
  record.network_mean = network_mean(record.gnbs);
  record.global_checksum = nn::checksum_hex(global_);
  if (artifacts_) *artifacts_ << round_artifact_line(record, last_updates_) << '\n';
  round_ = plan.round + 1;
  return record;
}

std::string update_to_json(const ModelUpdate& update) {
  json j;
  j["gnb"] = update.gnb;
  j["samples"] = update.samples;
  j["loss"] = update.loss;
  j["lambda"] = update.duals.lambda;
  j["dual_learning_rate"] = update.duals.learning_rate;
  j["params"] = nn::serialize(update.params);
  j["checksum"] = nn::checksum_hex(update.params);
  return j.dump();
}

ModelUpdate update_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ModelUpdate u;
    u.gnb = j.at("gnb").get<std::size_t>();
    u.samples = j.at("samples").get<std::size_t>();
    u.loss = j.at("loss").get<double>();
    u.duals.lambda = j.at("lambda").get<std::array<double, kNumConstraints>>();
    u.duals.learning_rate = j.at("dual_learning_rate").get<std::array<double, kNumConstraints>>();
    u.params = nn::deserialize(j.at("params").get<std::string>());
    if (nn::checksum_hex(u.params) != j.at("checksum").get<std::string>())
      throw ProtocolError("model update checksum mismatch");
    if (u.samples == 0 || !u.params.finite()) throw ProtocolError("model update violates its invariants");
    return u;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed model update: ") + e.what());
  }
}

void write_update(const std::filesystem::path& path, const ModelUpdate& update) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << update_to_json(update) << '\n';
}

ModelUpdate read_update(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return update_from_json(ss.str());
}

std::string round_artifact_line(const RoundRecord& record, std::span<const ModelUpdate> updates) {
  json j;
  j["round"] = record.round;
  j["aggregated"] = record.aggregated;
  json gnbs = json::array();
  for (const auto& u : updates) {
    gnbs.push_back({{"gnb", u.gnb}, {"samples", u.samples}, {"loss", u.loss}, {"lambda", u.duals.lambda}});
  }
  j["updates"] = gnbs;
  j["global_checksum"] = record.global_checksum;
  return j.dump();
}

}  // namespace slicefed::federation
