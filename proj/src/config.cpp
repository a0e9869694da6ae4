#include "slicefed/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace slicefed {

using nlohmann::json;

namespace {

// Reads known keys from one object level and rejects anything left over.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  Reader child(const char* key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    static const json kEmpty = json::object();
    return Reader(it == node_.end() ? kEmpty : *it, path_ + "." + key);
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown config key: " + path_ + "." + key);
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string sync_mode_name(federation::SyncMode m) {
  return m == federation::SyncMode::Always ? "always" : "loss_triggered";
}

std::string estimator_name(agent::AdvantageEstimator e) { return e == agent::AdvantageEstimator::GAE ? "gae" : "td0"; }

}  // namespace

void ExperimentSettings::validate(std::size_t num_gnbs) const {
  if (seeds == 0) throw ConfigError("experiment.seeds must be >= 1");
  if (eval_slots == 0 || eval_episode_slots == 0 || sweep_slots == 0 || trace_slots == 0)
    throw ConfigError("evaluation horizons must be >= 1");
  if (trace_gnb >= num_gnbs) throw ConfigError("experiment.trace_gnb out of range");
  if (rolling_window == 0) throw ConfigError("experiment.rolling_window must be >= 1");
  for (auto d : cdf_grid)
    if (d < 1) throw ConfigError("experiment.cdf_grid entries must be >= 1");
  for (double l : sweep_lambdas)
    if (!(l >= 0.0)) throw ConfigError("experiment.sweep_lambdas must be >= 0");
}

void ScenarioConfig::validate() const {
  network.validate();
  agent.validate();
  federation.validate();
  experiment.validate(network.num_gnbs);
}

void ScenarioConfig::apply_smoke() {
  federation.rounds = 20;
  federation.local_steps = 200;
  experiment.eval_slots = 2000;
  experiment.sweep_slots = 500;
  experiment.trace_slots = 500;
}

std::vector<std::uint64_t> ScenarioConfig::seed_list() const {
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < experiment.seeds; ++i) seeds.push_back(experiment.base_seed + i);
  return seeds;
}

ScenarioConfig config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig c;
  Reader top(root, "config");

  auto net = top.child("network");
  net.get("num_gnbs", c.network.num_gnbs);
  net.get("ues_per_cell", c.network.ues_per_cell);
  net.get("bandwidth_hz", c.network.bandwidth_hz);
  net.get("slot_seconds", c.network.slot_seconds);
  net.get("inter_site_distance_m", c.network.inter_site_distance_m);
  net.get("min_ue_distance_m", c.network.min_ue_distance_m);
  net.get("interference_budget_dbm", c.network.interference_budget_dbm);
  net.get("sinr_cap", c.network.sinr_cap);
  auto fading = net.child("fading");
  fading.get("pathloss_exponent", c.network.fading.pathloss_exponent);
  fading.get("shadowing_sigma_db", c.network.fading.shadowing_sigma_db);
  fading.get("noise_power_w", c.network.fading.noise_power_w);
  fading.get("tx_power_w", c.network.fading.tx_power_w);
  fading.finish();
  auto traffic = net.child("traffic");
  traffic.get("lambda_embb", c.network.traffic.lambda_embb);
  traffic.get("lambda_urllc", c.network.traffic.lambda_urllc);
  traffic.get("lambda_mmtc", c.network.traffic.lambda_mmtc);
  traffic.get("urllc_deadline_slots", c.network.traffic.urllc_deadline_slots);
  traffic.get("packet_bits", c.network.traffic.packet_bits);
  traffic.finish();
  auto reward = net.child("reward");
  reward.get("tput_weight", c.network.reward.tput_weight);
  reward.get("qos_weight", c.network.reward.qos_weight);
  reward.get("recfg_weight", c.network.reward.recfg_weight);
  reward.finish();
  net.finish();

  auto ag = top.child("agent");
  ag.get("hidden", c.agent.hidden);
  ag.get("learning_rate", c.agent.learning_rate);
  ag.get("discount", c.agent.discount);
  ag.get("clip_ratio", c.agent.clip_ratio);
  ag.get("entropy_weight", c.agent.entropy_weight);
  ag.get("epochs", c.agent.epochs);
  ag.get("minibatch", c.agent.minibatch);
  ag.get("dual_learning_rate", c.agent.dual_learning_rate);
  ag.get("dual_tolerance", c.agent.dual_tolerance);
  ag.get("dual_update_per_step", c.agent.dual_update_per_step);
  ag.get("normalize_advantage", c.agent.normalize_advantage);
  ag.get("max_grad_norm", c.agent.max_grad_norm);
  std::string estimator = estimator_name(c.agent.advantage);
  ag.get("advantage", estimator);
  if (estimator == "td0") {
    c.agent.advantage = agent::AdvantageEstimator::TD0;
  } else if (estimator == "gae") {
    c.agent.advantage = agent::AdvantageEstimator::GAE;
  } else {
    throw ConfigError("agent.advantage must be \"td0\" or \"gae\"");
  }
  ag.get("gae_lambda", c.agent.gae_lambda);
  ag.finish();

  auto fed = top.child("federation");
  fed.get("rounds", c.federation.rounds);
  fed.get("local_steps", c.federation.local_steps);
  std::string mode = sync_mode_name(c.federation.sync_mode);
  fed.get("sync_mode", mode);
  if (mode == "always") {
    c.federation.sync_mode = federation::SyncMode::Always;
  } else if (mode == "loss_triggered") {
    c.federation.sync_mode = federation::SyncMode::LossTriggered;
  } else {
    throw ConfigError("federation.sync_mode must be \"always\" or \"loss_triggered\"");
  }
  fed.get("sync_threshold", c.federation.sync_threshold);
  fed.get("participation", c.federation.participation);
  fed.get("distill_weight", c.federation.distill_weight);
  fed.get("distill_probes", c.federation.distill_probes);
  fed.finish();

  auto ex = top.child("experiment");
  ex.get("seeds", c.experiment.seeds);
  ex.get("base_seed", c.experiment.base_seed);
  ex.get("eval_slots", c.experiment.eval_slots);
  ex.get("eval_episode_slots", c.experiment.eval_episode_slots);
  ex.get("cdf_grid", c.experiment.cdf_grid);
  ex.get("sweep_lambdas", c.experiment.sweep_lambdas);
  ex.get("sweep_slots", c.experiment.sweep_slots);
  ex.get("trace_gnb", c.experiment.trace_gnb);
  ex.get("trace_slots", c.experiment.trace_slots);
  ex.get("rolling_window", c.experiment.rolling_window);
  ex.get("stochastic_eval", c.experiment.stochastic_eval);
  ex.finish();

  top.finish();
  c.validate();
  return c;
}

std::string config_to_json(const ScenarioConfig& c, int indent) {
  json j;
  const auto& n = c.network;
  j["network"] = {
      {"num_gnbs", n.num_gnbs},
      {"ues_per_cell", n.ues_per_cell},
      {"bandwidth_hz", n.bandwidth_hz},
      {"slot_seconds", n.slot_seconds},
      {"inter_site_distance_m", n.inter_site_distance_m},
      {"min_ue_distance_m", n.min_ue_distance_m},
      {"interference_budget_dbm", n.interference_budget_dbm},
      {"sinr_cap", n.sinr_cap},
      {"fading",
       {{"pathloss_exponent", n.fading.pathloss_exponent},
        {"shadowing_sigma_db", n.fading.shadowing_sigma_db},
        {"noise_power_w", n.fading.noise_power_w},
        {"tx_power_w", n.fading.tx_power_w}}},
      {"traffic",
       {{"lambda_embb", n.traffic.lambda_embb},
        {"lambda_urllc", n.traffic.lambda_urllc},
        {"lambda_mmtc", n.traffic.lambda_mmtc},
        {"urllc_deadline_slots", n.traffic.urllc_deadline_slots},
        {"packet_bits", n.traffic.packet_bits}}},
      {"reward",
       {{"tput_weight", n.reward.tput_weight},
        {"qos_weight", n.reward.qos_weight},
        {"recfg_weight", n.reward.recfg_weight}}},
  };
  const auto& a = c.agent;
  j["agent"] = {
      {"hidden", a.hidden},
      {"learning_rate", a.learning_rate},
      {"discount", a.discount},
      {"clip_ratio", a.clip_ratio},
      {"entropy_weight", a.entropy_weight},
      {"epochs", a.epochs},
      {"minibatch", a.minibatch},
      {"dual_learning_rate", a.dual_learning_rate},
      {"dual_tolerance", a.dual_tolerance},
      {"dual_update_per_step", a.dual_update_per_step},
      {"normalize_advantage", a.normalize_advantage},
      {"max_grad_norm", a.max_grad_norm},
      {"advantage", estimator_name(a.advantage)},
      {"gae_lambda", a.gae_lambda},
  };
  const auto& f = c.federation;
  j["federation"] = {
      {"rounds", f.rounds},
      {"local_steps", f.local_steps},
      {"sync_mode", sync_mode_name(f.sync_mode)},
      {"sync_threshold", f.sync_threshold},
      {"participation", f.participation},
      {"distill_weight", f.distill_weight},
      {"distill_probes", f.distill_probes},
  };
  const auto& e = c.experiment;
  j["experiment"] = {
      {"seeds", e.seeds},
      {"base_seed", e.base_seed},
      {"eval_slots", e.eval_slots},
      {"eval_episode_slots", e.eval_episode_slots},
      {"cdf_grid", e.cdf_grid},
      {"sweep_lambdas", e.sweep_lambdas},
      {"sweep_slots", e.sweep_slots},
      {"trace_gnb", e.trace_gnb},
      {"trace_slots", e.trace_slots},
      {"rolling_window", e.rolling_window},
      {"stochastic_eval", e.stochastic_eval},
  };
  return j.dump(indent);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

}  // namespace slicefed
