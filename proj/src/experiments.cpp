#include "slicefed/experiments.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "slicefed/dirichlet.hpp"

namespace slicefed::experiments {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::SliceFed:
      return "slicefed";
    case PolicyKind::EqualSlicing:
      return "equal";
    case PolicyKind::QueueProportional:
      return "queueprop";
    case PolicyKind::RandomDirichlet:
      return "random";
  }
  return "unknown";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
  for (auto k : kAllPolicies)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t entity) {
  Rng rng = make_stream(seed, purpose, entity);
  return rng();
}

std::size_t policy_index(PolicyKind k) { return static_cast<std::size_t>(k); }

baselines::BaselineKind baseline_of(PolicyKind k) {
  switch (k) {
    case PolicyKind::EqualSlicing:
      return baselines::BaselineKind::EqualSlicing;
    case PolicyKind::QueueProportional:
      return baselines::BaselineKind::QueueProportional;
    case PolicyKind::RandomDirichlet:
      return baselines::BaselineKind::RandomDirichlet;
    case PolicyKind::SliceFed:
      break;
  }
  throw ContractViolation("SliceFed is not a baseline");
}

std::vector<PolicyKind> selected(const RunOptions& o) {
  if (o.policies.empty()) return {kAllPolicies.begin(), kAllPolicies.end()};
  return o.policies;
}

std::vector<std::uint64_t> seeds_of(const ScenarioConfig& c, const RunOptions& o) {
  return o.seeds.empty() ? c.seed_list() : o.seeds;
}

double reward_normalizer(const env::EnvConfig& e) { return e.bandwidth_hz * e.slot_seconds; }

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json gnb_record_json(const federation::GnbRecord& g) {
  return {{"raw_reward", g.raw_reward},
          {"normalized_reward", g.normalized_reward},
          {"g1", g.g1},
          {"g2", g.g2},
          {"g3", g.g3},
          {"leakage_w", g.leakage_w},
          {"actor_loss", g.actor_loss},
          {"critic_loss", g.critic_loss},
          {"distill_loss", g.distill_loss},
          {"lambda", g.lambda},
          {"allocation", g.allocation}};
}

json round_json(const federation::RoundRecord& r) {
  json gnbs = json::array();
  for (const auto& g : r.gnbs) gnbs.push_back(gnb_record_json(g));
  return {{"round", r.round},
          {"aggregated", r.aggregated},
          {"global_checksum", r.global_checksum},
          {"network", gnb_record_json(r.network_mean)},
          {"gnbs", gnbs}};
}

std::string csv_header_line(const std::string& header) { return "# " + header + "\n"; }

std::string jsonl_header_line(const std::string& header) {
  return json{{"header", json::parse(header)}}.dump() + "\n";
}

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

fs::path seed_dir(const RunOptions& o, PolicyKind k, std::uint64_t seed) {
  return o.out_dir / std::string(to_string(k)) / ("seed_" + std::to_string(seed));
}

json training_sections(const ScenarioConfig& c) {
  const json j = json::parse(config_to_json(c));
  return {{"network", j.at("network")}, {"agent", j.at("agent")}, {"federation", j.at("federation")}};
}

void log_line(const RunOptions& o, const std::string& line) {
  if (o.log) *o.log << line << std::endl;
}

// Trains one seed and writes its files; returns the result for reuse.
SeedTraining train_and_write(const ScenarioConfig& config, PolicyKind kind, std::uint64_t seed,
                             const RunOptions& options) {
  const fs::path dir = seed_dir(options, kind, seed);
  fs::create_directories(dir);
  const std::uint64_t seeds[] = {seed};
  const std::string header = header_json(config, "train", to_string(kind), seeds);
  write_file(dir / "header.json", json::parse(header).dump(2) + "\n");

  std::ostringstream artifacts;
  artifacts << jsonl_header_line(header);
  const std::size_t total = config.federation.rounds;
  const auto on_round = [&](const federation::RoundRecord& r) {
    if ((r.round + 1) % 10 == 0 || r.round + 1 == total) {
      log_line(options, "[" + std::string(to_string(kind)) + " seed " + std::to_string(seed) + "] round " +
                            std::to_string(r.round + 1) + "/" + std::to_string(total) +
                            " g2=" + format_double(r.network_mean.g2) +
                            " reward=" + format_double(r.network_mean.raw_reward));
    }
  };

  SeedTraining result;
  try {
    result = train_seed(config, kind, seed, kind == PolicyKind::SliceFed ? &artifacts : nullptr, on_round);
  } catch (const NumericalFailure& e) {
    json dump = {{"header", json::parse(header)}, {"error", e.what()}};
    write_file(dir / "failure.json", dump.dump(2) + "\n");
    throw;
  }

  std::string rounds = jsonl_header_line(header);
  std::string reward = csv_header_line(header) + "round,raw_reward,normalized_reward,actor_loss,critic_loss\n";
  std::string constraints =
      csv_header_line(header) + "round,g1,g2,g3,lambda1,lambda2,lambda3,alloc_embb,alloc_urllc,alloc_mmtc\n";
  for (const auto& r : result.rounds) {
    const auto& m = r.network_mean;
    rounds += round_json(r).dump() + "\n";
    reward += std::to_string(r.round) + "," + format_double(m.raw_reward) + "," + format_double(m.normalized_reward) +
              "," + format_double(m.actor_loss) + "," + format_double(m.critic_loss) + "\n";
    constraints += std::to_string(r.round) + "," + format_double(m.g1) + "," + format_double(m.g2) + "," +
                   format_double(m.g3) + "," + format_double(m.lambda[0]) + "," + format_double(m.lambda[1]) + "," +
                   format_double(m.lambda[2]) + "," + format_double(m.allocation[0]) + "," +
                   format_double(m.allocation[1]) + "," + format_double(m.allocation[2]) + "\n";
  }
  write_file(dir / "rounds.jsonl", rounds);
  write_file(dir / "fig1_reward.csv", reward);
  write_file(dir / "fig1_constraints.csv", constraints);
  if (kind == PolicyKind::SliceFed) {
    write_file(dir / "round_artifacts.jsonl", artifacts.str());
    write_file(dir / "global_model.params", csv_header_line(header) + nn::serialize(result.global));
  }
  return result;
}

nn::ParamSet load_model_file(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::string body;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    body += line;
    body += '\n';
  }
  return nn::deserialize(body);
}

}  // namespace

Controller::Controller(PolicyKind kind, const nn::ParamSet* model, bool stochastic, std::uint64_t seed)
    : kind_(kind), model_(model), stochastic_(stochastic), rng_(seed) {
  if (kind_ == PolicyKind::SliceFed && (model_ == nullptr || model_->layers().empty()))
    throw ContractViolation("SliceFed controller needs a trained model");
}

std::vector<Action> Controller::decide(const env::Network& network) {
  const std::size_t n_gnbs = network.num_gnbs();
  std::vector<Action> actions(n_gnbs);
  if (kind_ != PolicyKind::SliceFed) {
    for (std::size_t n = 0; n < n_gnbs; ++n)
      actions[n] = baselines::decide(baseline_of(kind_), network.queue_lengths(n), rng_);
    return actions;
  }
  if (stochastic_) {
    for (std::size_t n = 0; n < n_gnbs; ++n) actions[n] = agent::act(*model_, network.observation(n), rng_).action;
    return actions;
  }
  nn::Matrix input(env::kObsDim, n_gnbs);
  for (std::size_t n = 0; n < n_gnbs; ++n) {
    const auto& f = network.observation(n).features;
    for (std::size_t i = 0; i < env::kObsDim; ++i) input(i, n) = f[i];
  }
  const nn::Matrix out = nn::forward(*model_, input);
  if (!out.allFinite()) throw NumericalFailure("policy produced a non-finite output");
  for (std::size_t n = 0; n < n_gnbs; ++n) {
    const dirichlet::Vec3 alpha = dirichlet::concentration_from_logits({out(0, n), out(1, n), out(2, n)});
    actions[n].fractions = dirichlet::mean(alpha);
  }
  return actions;
}

SeedTraining train_seed(const ScenarioConfig& config, PolicyKind kind, std::uint64_t seed, std::ostream* artifacts,
                        const RoundCallback& on_round) {
  config.validate();
  SeedTraining result;
  result.seed = seed;
  const std::size_t rounds = config.federation.rounds;
  if (kind == PolicyKind::SliceFed) {
    federation::Federation fed(config.network, config.agent, config.federation, seed);
    fed.set_artifact_stream(artifacts);
    for (std::size_t k = 0; k < rounds; ++k) {
      result.rounds.push_back(fed.run_round());
      if (on_round) on_round(result.rounds.back());
    }
    result.global = fed.global();
    return result;
  }

  env::Network net(config.network, seed);
  Controller ctl(kind, nullptr, false, derived_seed(seed, stream::kBaseline, policy_index(kind)));
  const double normalizer = reward_normalizer(config.network);
  for (std::size_t k = 0; k < rounds; ++k) {
    net.reset(k);
    federation::RoundAccumulator acc(net.num_gnbs(), normalizer);
    for (std::size_t t = 0; t < config.federation.local_steps; ++t) {
      const auto actions = ctl.decide(net);
      acc.add(net.step(actions), actions);
    }
    result.rounds.push_back(acc.finish(k));
    if (on_round) on_round(result.rounds.back());
  }
  return result;
}

std::uint64_t EvalStats::packets() const {
  std::uint64_t total = censored;
  for (const auto& [d, c] : delay_counts) total += c;
  return total;
}

double EvalStats::cdf(std::int64_t d) const {
  const std::uint64_t total = packets();
  if (total == 0) return 1.0;
  std::uint64_t within = 0;
  for (const auto& [delay, c] : delay_counts) {
    if (delay > d) break;
    within += c;
  }
  return static_cast<double>(within) / static_cast<double>(total);
}

void EvalStats::merge(const EvalStats& other) {
  for (const auto& [d, c] : other.delay_counts) delay_counts[d] += c;
  censored += other.censored;
  g2_sum += other.g2_sum;
  raw_reward_sum += other.raw_reward_sum;
  gnb_slots += other.gnb_slots;
}

EvalStats evaluate(const ScenarioConfig& config, const env::EnvConfig& env_config, PolicyKind kind,
                   const nn::ParamSet* model, std::uint64_t seed, std::size_t slots) {
  EvalStats stats;
  env::Network net(env_config, derived_seed(seed, stream::kEvaluation, 0));
  Controller ctl(kind, model, config.experiment.stochastic_eval,
                 derived_seed(seed, stream::kEvaluation, 16 + policy_index(kind)));
  const std::size_t episode_slots = config.experiment.eval_episode_slots;
  std::size_t done = 0;
  for (std::uint64_t episode = 0; done < slots; ++episode) {
    net.reset(episode);
    const std::size_t len = std::min(episode_slots, slots - done);
    for (std::size_t t = 0; t < len; ++t) {
      const auto out = net.step(ctl.decide(net));
      for (const auto& g : out.gnbs) {
        stats.g2_sum += g.constraints.g2;
        stats.raw_reward_sum += g.reward;
        for (auto d : g.urllc_delays) ++stats.delay_counts[d];
        ++stats.gnb_slots;
      }
    }
    for (std::size_t n = 0; n < net.num_gnbs(); ++n) {
      for (const auto& p : net.queue(n, Slice::URLLC).packets())
        if (p.arrival_slot < net.slot()) ++stats.censored;
    }
    done += len;
  }
  return stats;
}

PerSlice<double> Trace::allocation_variance() const {
  // Welford, so a constant trace gives exactly zero.
  PerSlice<double> mean{}, m2{};
  double n = 0.0;
  for (const auto& a : allocations) {
    n += 1.0;
    for (std::size_t s = 0; s < kNumSlices; ++s) {
      const double d = a[s] - mean[s];
      mean[s] += d / n;
      m2[s] += d * (a[s] - mean[s]);
    }
  }
  PerSlice<double> var{};
  if (n > 0.0)
    for (std::size_t s = 0; s < kNumSlices; ++s) var[s] = m2[s] / n;
  return var;
}

Trace trace(const ScenarioConfig& config, PolicyKind kind, const nn::ParamSet* model, std::uint64_t seed) {
  Trace tr;
  env::Network net(config.network, derived_seed(seed, stream::kEvaluation, 1));
  Controller ctl(kind, model, config.experiment.stochastic_eval,
                 derived_seed(seed, stream::kEvaluation, 32 + policy_index(kind)));
  const std::size_t g = config.experiment.trace_gnb;
  for (std::size_t t = 0; t < config.experiment.trace_slots; ++t) {
    tr.queues.push_back(net.queue_lengths(g));
    const auto actions = ctl.decide(net);
    tr.allocations.push_back(actions[g].fractions);
    net.step(actions);
  }
  return tr;
}

std::vector<double> rolling_mean(std::span<const double> values, std::size_t window) {
  if (window == 0) throw ContractViolation("rolling window must be >= 1");
  if (values.empty()) return {};
  if (values.size() < window) return {mean_of(values)};
  std::vector<double> out;
  double sum = std::accumulate(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(window), 0.0);
  out.push_back(sum / static_cast<double>(window));
  for (std::size_t i = window; i < values.size(); ++i) {
    sum += values[i] - values[i - window];
    out.push_back(sum / static_cast<double>(window));
  }
  return out;
}

double convergence_ratio(std::span<const double> g2, std::size_t window) {
  if (g2.empty()) return 0.0;
  const auto rm = rolling_mean(g2, window);
  const double peak = *std::max_element(rm.begin(), rm.end());
  const std::size_t tail = std::max<std::size_t>(1, (g2.size() + 4) / 5);
  const double final_mean = mean_of(g2.subspan(g2.size() - tail));
  if (peak <= 0.0) return final_mean <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return final_mean / peak;
}

bool tail_nonincreasing(std::span<const double> g2, std::size_t window, std::size_t tail) {
  const auto rm = rolling_mean(g2, window);
  if (rm.size() < tail) return false;
  for (std::size_t i = rm.size() - tail + 1; i < rm.size(); ++i)
    if (rm[i] > rm[i - 1]) return false;
  return true;
}

std::vector<double> g2_series(std::span<const federation::RoundRecord> rounds) {
  std::vector<double> out;
  out.reserve(rounds.size());
  for (const auto& r : rounds) out.push_back(r.network_mean.g2);
  return out;
}

std::string header_json(const ScenarioConfig& config, std::string_view command, std::string_view policy,
                        std::span<const std::uint64_t> seeds) {
  json h;
  h["generator"] = std::string("slicefed ") + kVersion;
  h["command"] = command;
  h["policy"] = policy;
  h["seeds"] = std::vector<std::uint64_t>(seeds.begin(), seeds.end());
  h["reward_normalizer_bits_per_slot"] = reward_normalizer(config.network);
  h["throughput_normalizer_bits"] = config.network.throughput_normalizer_bits();
  h["config"] = json::parse(config_to_json(config));
  return h.dump();
}

std::vector<SeedTraining> run_training(const ScenarioConfig& config, PolicyKind kind, const RunOptions& options) {
  config.validate();
  const auto seeds = seeds_of(config, options);
  std::vector<SeedTraining> results;
  for (auto seed : seeds) results.push_back(train_and_write(config, kind, seed, options));

  const std::string header = header_json(config, "train", to_string(kind), seeds);
  std::string reward = csv_header_line(header) + "round,mean_normalized_reward,std_normalized_reward,mean_raw_reward\n";
  std::string constraints = csv_header_line(header) + "round,mean_g1,mean_g2,std_g2,mean_g3,mean_lambda2\n";
  for (std::size_t k = 0; k < config.federation.rounds; ++k) {
    std::vector<double> nr, raw, g1, g2, g3, l2;
    for (const auto& r : results) {
      const auto& m = r.rounds[k].network_mean;
      nr.push_back(m.normalized_reward);
      raw.push_back(m.raw_reward);
      g1.push_back(m.g1);
      g2.push_back(m.g2);
      g3.push_back(m.g3);
      l2.push_back(m.lambda[1]);
    }
    reward += std::to_string(k) + "," + format_double(mean_of(nr)) + "," + format_double(std_of(nr)) + "," +
              format_double(mean_of(raw)) + "\n";
    constraints += std::to_string(k) + "," + format_double(mean_of(g1)) + "," + format_double(mean_of(g2)) + "," +
                   format_double(std_of(g2)) + "," + format_double(mean_of(g3)) + "," + format_double(mean_of(l2)) +
                   "\n";
  }
  const fs::path dir = options.out_dir / std::string(to_string(kind));
  write_file(dir / "fig1_reward.csv", reward);
  write_file(dir / "fig1_constraints.csv", constraints);
  return results;
}

nn::ParamSet ensure_model(const ScenarioConfig& config, std::uint64_t seed, const RunOptions& options) {
  const fs::path dir = seed_dir(options, PolicyKind::SliceFed, seed);
  const fs::path model = dir / "global_model.params";
  const fs::path header = dir / "header.json";
  if (fs::exists(model) && fs::exists(header)) {
    const json stored = json::parse(read_file(header));
    const json cfg = stored.at("config");
    const json wanted = training_sections(config);
    if (cfg.at("network") == wanted.at("network") && cfg.at("agent") == wanted.at("agent") &&
        cfg.at("federation") == wanted.at("federation")) {
      return load_model_file(model);
    }
    log_line(options, "[slicefed seed " + std::to_string(seed) + "] stored model has a different config; retraining");
  }
  return train_and_write(config, PolicyKind::SliceFed, seed, options).global;
}

CdfTable run_delay_cdf(const ScenarioConfig& config, const RunOptions& options) {
  config.validate();
  const auto seeds = seeds_of(config, options);
  const auto policies = selected(options);
  CdfTable table;
  for (auto seed : seeds) {
    nn::ParamSet model;
    for (auto kind : policies) {
      if (kind == PolicyKind::SliceFed && model.layers().empty()) model = ensure_model(config, seed, options);
      auto stats = evaluate(config, config.network, kind, &model, seed, config.experiment.eval_slots);
      table.pooled[kind].merge(stats);
      table.per_seed[kind][seed] = std::move(stats);
    }
    log_line(options, "[eval-cdf] seed " + std::to_string(seed) + " done");
  }

  const std::string header = header_json(config, "eval-cdf", "all", seeds);
  std::string csv = csv_header_line(header) + "policy,seed,delay,cdf,packets\n";
  std::string jsonl = jsonl_header_line(header);
  const auto emit = [&](PolicyKind kind, const std::string& seed_label, const EvalStats& s) {
    for (auto d : config.experiment.cdf_grid) {
      csv += std::string(to_string(kind)) + "," + seed_label + "," + std::to_string(d) + "," + format_double(s.cdf(d)) +
             "," + std::to_string(s.packets()) + "\n";
    }
    json hist = json::array();
    for (const auto& [d, c] : s.delay_counts) hist.push_back({d, c});
    jsonl += json{{"policy", to_string(kind)},
                  {"seed", seed_label},
                  {"slice", "urllc"},
                  {"delay_histogram", hist},
                  {"censored", s.censored},
                  {"packets", s.packets()},
                  {"mean_g2", s.mean_g2()}}
                 .dump() +
             "\n";
  };
  for (auto kind : policies) {
    emit(kind, "all", table.pooled[kind]);
    for (const auto& [seed, s] : table.per_seed[kind]) emit(kind, std::to_string(seed), s);
  }
  const fs::path dir = options.out_dir / "eval";
  write_file(dir / "fig2_cdf.csv", csv);
  write_file(dir / "fig2_delays.jsonl", jsonl);
  return table;
}

TraceTable run_queue_traces(const ScenarioConfig& config, const RunOptions& options) {
  config.validate();
  const auto seeds = seeds_of(config, options);
  const auto policies = selected(options);
  TraceTable table;
  for (auto seed : seeds) {
    nn::ParamSet model;
    for (auto kind : policies) {
      if (kind == PolicyKind::SliceFed && model.layers().empty()) model = ensure_model(config, seed, options);
      table.traces[kind][seed] = trace(config, kind, &model, seed);
    }
  }

  const std::string header = header_json(config, "eval-traces", "all", seeds);
  std::string csv = csv_header_line(header) + "policy,seed,slot,q_embb,q_urllc,q_mmtc,a_embb,a_urllc,a_mmtc\n";
  std::string var = csv_header_line(header) + "policy,seed,var_embb,var_urllc,var_mmtc\n";
  for (auto kind : policies) {
    for (const auto& [seed, tr] : table.traces[kind]) {
      const std::string prefix = std::string(to_string(kind)) + "," + std::to_string(seed) + ",";
      for (std::size_t t = 0; t < tr.allocations.size(); ++t) {
        const auto& q = tr.queues[t];
        const auto& a = tr.allocations[t];
        csv += prefix + std::to_string(t) + "," + format_double(q[0]) + "," + format_double(q[1]) + "," +
               format_double(q[2]) + "," + format_double(a[0]) + "," + format_double(a[1]) + "," +
               format_double(a[2]) + "\n";
      }
      const auto v = tr.allocation_variance();
      var += prefix + format_double(v[0]) + "," + format_double(v[1]) + "," + format_double(v[2]) + "\n";
    }
  }
  const fs::path dir = options.out_dir / "eval";
  write_file(dir / "fig3_traces.csv", csv);
  write_file(dir / "fig3_variance.csv", var);
  return table;
}

SweepTable run_load_sweep(const ScenarioConfig& config, const RunOptions& options) {
  config.validate();
  const auto seeds = seeds_of(config, options);
  const auto policies = selected(options);
  SweepTable table;
  table.lambdas = config.experiment.sweep_lambdas;
  const double normalizer = reward_normalizer(config.network);

  std::map<std::uint64_t, nn::ParamSet> models;
  if (std::find(policies.begin(), policies.end(), PolicyKind::SliceFed) != policies.end()) {
    for (auto seed : seeds) models[seed] = ensure_model(config, seed, options);
  }
  const std::string header = header_json(config, "eval-sweep", "all", seeds);
  std::string jsonl = jsonl_header_line(header);
  for (auto kind : policies) {
    auto& points = table.points[kind];
    for (double lambda : table.lambdas) {
      env::EnvConfig env_config = config.network;
      env_config.traffic.lambda_urllc = lambda;
      SweepPoint p;
      for (auto seed : seeds) {
        const nn::ParamSet* model = kind == PolicyKind::SliceFed ? &models.at(seed) : nullptr;
        const auto s = evaluate(config, env_config, kind, model, seed, config.experiment.sweep_slots);
        p.seed_g2.push_back(s.mean_g2());
        p.seed_normalized_reward.push_back(s.mean_raw_reward() / normalizer);
        jsonl += json{{"policy", to_string(kind)},
                      {"lambda_urllc", lambda},
                      {"seed", seed},
                      {"mean_g2", s.mean_g2()},
                      {"raw_reward", s.mean_raw_reward()},
                      {"normalized_reward", s.mean_raw_reward() / normalizer}}
                     .dump() +
                 "\n";
      }
      p.mean_g2 = mean_of(p.seed_g2);
      p.std_g2 = std_of(p.seed_g2);
      p.mean_normalized_reward = mean_of(p.seed_normalized_reward);
      p.std_normalized_reward = std_of(p.seed_normalized_reward);
      points.push_back(std::move(p));
    }
    log_line(options, "[eval-sweep] " + std::string(to_string(kind)) + " done");
  }

  std::string csv = csv_header_line(header) +
                    "policy,lambda_urllc,mean_normalized_reward,std_normalized_reward,mean_g2,std_g2,seeds\n";
  for (auto kind : policies) {
    const auto& points = table.points[kind];
    for (std::size_t i = 0; i < table.lambdas.size(); ++i) {
      const auto& p = points[i];
      csv += std::string(to_string(kind)) + "," + format_double(table.lambdas[i]) + "," +
             format_double(p.mean_normalized_reward) + "," + format_double(p.std_normalized_reward) + "," +
             format_double(p.mean_g2) + "," + format_double(p.std_g2) + "," + std::to_string(seeds.size()) + "\n";
    }
  }
  const fs::path dir = options.out_dir / "eval";
  write_file(dir / "fig4_sweep.csv", csv);
  write_file(dir / "fig4_sweep.jsonl", jsonl);
  return table;
}

}  // namespace slicefed::experiments
