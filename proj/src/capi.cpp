#include "slicefed/slicefed.h"

#include <cstring>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <streambuf>
#include <string>

#include "slicefed/config.hpp"
#include "slicefed/experiments.hpp"
#include "slicefed/selftest.hpp"

struct sf_config {
  slicefed::ScenarioConfig value;
};

struct sf_env {
  slicefed::env::Network network;
};

namespace {

using namespace slicefed;

thread_local std::string g_last_error;

// Forwards complete lines to the caller's callback.
class LineBuf : public std::streambuf {
 public:
  LineBuf(sf_log_fn fn, void* user) : fn_(fn), user_(user) {}
  ~LineBuf() override { flush_line(); }

 protected:
  int_type overflow(int_type ch) override {
    if (ch == traits_type::eof()) return ch;
    if (ch == '\n') {
      flush_line();
    } else {
      line_.push_back(static_cast<char>(ch));
    }
    return ch;
  }

 private:
  void flush_line() {
    if (!line_.empty() && fn_) fn_(user_, line_.c_str());
    line_.clear();
  }
  sf_log_fn fn_;
  void* user_;
  std::string line_;
};

template <class F>
sf_status guarded(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const ConfigError& e) {
    g_last_error = e.what();
    return SF_ERR_CONFIG;
  } catch (const NumericalFailure& e) {
    g_last_error = e.what();
    return SF_ERR_NUMERIC;
  } catch (const DomainError& e) {
    g_last_error = e.what();
    return SF_ERR_INVALID_ARG;
  } catch (const ContractViolation& e) {
    g_last_error = e.what();
    return SF_ERR_INVALID_ARG;
  } catch (const ProtocolError& e) {
    g_last_error = e.what();
    return SF_ERR_IO;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return SF_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return SF_ERR_INTERNAL;
  }
}

sf_status invalid(const char* message) {
  g_last_error = message;
  return SF_ERR_INVALID_ARG;
}

std::vector<experiments::PolicyKind> parse_policies(const char* list) {
  std::vector<experiments::PolicyKind> out;
  if (!list || !*list) return out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "all") return {};
    const auto kind = experiments::parse_policy(item);
    if (!kind) throw ConfigError("unknown policy '" + item + "'");
    out.push_back(*kind);
  }
  return out;
}

template <class Suite>
sf_status run_suite(const sf_config* config, const char* out_dir, const char* policies, const uint64_t* seeds,
                    size_t num_seeds, sf_log_fn log, void* user, Suite&& suite) {
  if (!config || !out_dir) return invalid("config and out_dir are required");
  if (num_seeds > 0 && !seeds) return invalid("seeds is NULL but num_seeds > 0");
  return guarded([&] {
    LineBuf buf(log, user);
    std::ostream log_stream(&buf);
    experiments::RunOptions opts;
    opts.out_dir = out_dir;
    opts.seeds.assign(seeds, seeds + num_seeds);
    opts.policies = parse_policies(policies);
    opts.log = log ? &log_stream : nullptr;
    suite(config->value, opts);
    return SF_OK;
  });
}

}  // namespace

extern "C" {

const char* sf_version(void) { return slicefed::kVersion; }

const char* sf_last_error(void) { return g_last_error.c_str(); }

const char* sf_status_name(sf_status status) {
  switch (status) {
    case SF_OK: return "ok";
    case SF_ERR_CONFIG: return "config error";
    case SF_ERR_NUMERIC: return "numerical failure";
    case SF_ERR_SELFTEST: return "selftest failure";
    case SF_ERR_INVALID_ARG: return "invalid argument";
    case SF_ERR_IO: return "i/o error";
    case SF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

sf_status sf_config_default(sf_config** out) {
  if (!out) return invalid("out is NULL");
  return guarded([&] {
    *out = new sf_config{};
    return SF_OK;
  });
}

sf_status sf_config_load(const char* path, sf_config** out) {
  if (!path || !out) return invalid("path and out are required");
  return guarded([&] {
    *out = new sf_config{load_config(path)};
    return SF_OK;
  });
}

sf_status sf_config_parse(const char* json_text, sf_config** out) {
  if (!json_text || !out) return invalid("json_text and out are required");
  return guarded([&] {
    *out = new sf_config{config_from_json(json_text)};
    return SF_OK;
  });
}

void sf_config_free(sf_config* config) { delete config; }

sf_status sf_config_apply_smoke(sf_config* config) {
  if (!config) return invalid("config is NULL");
  config->value.apply_smoke();
  return SF_OK;
}

sf_status sf_config_set_seeds(sf_config* config, uint64_t base_seed, size_t count) {
  if (!config) return invalid("config is NULL");
  return guarded([&] {
    ExperimentSettings e = config->value.experiment;
    e.base_seed = base_seed;
    e.seeds = count;
    e.validate(config->value.network.num_gnbs);
    config->value.experiment = e;
    return SF_OK;
  });
}

sf_status sf_config_get_seeds(const sf_config* config, uint64_t* base_seed, size_t* count) {
  if (!config || !base_seed || !count) return invalid("config, base_seed and count are required");
  *base_seed = config->value.experiment.base_seed;
  *count = config->value.experiment.seeds;
  return SF_OK;
}

sf_status sf_config_to_json(const sf_config* config, char* buffer, size_t capacity, size_t* required) {
  if (!config) return invalid("config is NULL");
  return guarded([&] {
    const std::string text = config_to_json(config->value);
    if (required) *required = text.size() + 1;
    if (buffer && capacity > text.size()) {
      std::memcpy(buffer, text.c_str(), text.size() + 1);
      return SF_OK;
    }
    if (buffer) return invalid("buffer too small");
    return SF_OK;
  });
}

size_t sf_config_num_gnbs(const sf_config* config) { return config ? config->value.network.num_gnbs : 0; }

sf_status sf_run_train(const sf_config* config, const char* out_dir, const char* policies, const uint64_t* seeds,
                       size_t num_seeds, sf_log_fn log, void* user) {
  return run_suite(config, out_dir, policies, seeds, num_seeds, log, user,
                   [](const ScenarioConfig& c, const experiments::RunOptions& o) {
                     const auto kinds = o.policies.empty()
                                            ? std::vector(experiments::kAllPolicies.begin(),
                                                          experiments::kAllPolicies.end())
                                            : o.policies;
                     for (auto k : kinds) experiments::run_training(c, k, o);
                   });
}

sf_status sf_run_eval_cdf(const sf_config* config, const char* out_dir, const char* policies, const uint64_t* seeds,
                          size_t num_seeds, sf_log_fn log, void* user) {
  return run_suite(config, out_dir, policies, seeds, num_seeds, log, user,
                   [](const ScenarioConfig& c, const experiments::RunOptions& o) { experiments::run_delay_cdf(c, o); });
}

sf_status sf_run_eval_traces(const sf_config* config, const char* out_dir, const char* policies, const uint64_t* seeds,
                             size_t num_seeds, sf_log_fn log, void* user) {
  return run_suite(config, out_dir, policies, seeds, num_seeds, log, user,
                   [](const ScenarioConfig& c, const experiments::RunOptions& o) {
                     experiments::run_queue_traces(c, o);
                   });
}

sf_status sf_run_eval_sweep(const sf_config* config, const char* out_dir, const char* policies, const uint64_t* seeds,
                            size_t num_seeds, sf_log_fn log, void* user) {
  return run_suite(config, out_dir, policies, seeds, num_seeds, log, user,
                   [](const ScenarioConfig& c, const experiments::RunOptions& o) { experiments::run_load_sweep(c, o); });
}

sf_status sf_selftest(uint64_t seed, int include_training, sf_log_fn log, void* user) {
  return guarded([&] {
    auto results = selftest::run_core_checks(seed);
    if (include_training) results.push_back(selftest::smoke_training(seed));
    std::size_t failed = 0;
    for (const auto& r : results) {
      if (!r.passed) ++failed;
      if (log) log(user, selftest::format_result(r).c_str());
    }
    if (failed) {
      g_last_error = std::to_string(failed) + " self-test check(s) failed";
      return SF_ERR_SELFTEST;
    }
    return SF_OK;
  });
}

sf_status sf_env_create(const sf_config* config, uint64_t seed, sf_env** out) {
  if (!config || !out) return invalid("config and out are required");
  return guarded([&] {
    *out = new sf_env{env::Network(config->value.network, seed)};
    return SF_OK;
  });
}

void sf_env_free(sf_env* env) { delete env; }

size_t sf_env_num_gnbs(const sf_env* env) { return env ? env->network.num_gnbs() : 0; }

size_t sf_env_obs_dim(void) { return env::kObsDim; }

sf_status sf_env_reset(sf_env* env, uint64_t episode) {
  if (!env) return invalid("env is NULL");
  return guarded([&] {
    env->network.reset(episode);
    return SF_OK;
  });
}

sf_status sf_env_observe(const sf_env* env, double* observations) {
  if (!env || !observations) return invalid("env and observations are required");
  const auto obs = env->network.observations();
  for (std::size_t n = 0; n < obs.size(); ++n)
    std::memcpy(observations + n * env::kObsDim, obs[n].features.data(), env::kObsDim * sizeof(double));
  return SF_OK;
}

sf_status sf_env_step(sf_env* env, const double* actions, double* rewards, double* constraints) {
  if (!env || !actions) return invalid("env and actions are required");
  return guarded([&] {
    const std::size_t n = env->network.num_gnbs();
    std::vector<Action> acts(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t s = 0; s < kNumSlices; ++s) acts[i].fractions[s] = actions[i * kNumSlices + s];
    }
    const auto outcome = env->network.step(acts);
    for (std::size_t i = 0; i < n; ++i) {
      if (rewards) rewards[i] = outcome.gnbs[i].reward;
      if (constraints) {
        const auto g = outcome.gnbs[i].constraints.as_array();
        for (std::size_t c = 0; c < kNumConstraints; ++c) constraints[i * kNumConstraints + c] = g[c];
      }
    }
    return SF_OK;
  });
}

}  // extern "C"
