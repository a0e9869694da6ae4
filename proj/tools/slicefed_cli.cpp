// Command-line front end. Talks to the simulator only through the C API.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "slicefed/slicefed.h"

namespace {

constexpr const char* kOutDirEnv = "SLICEFED_OUT_DIR";

void log_line(void* user, const char* line) {
  std::fprintf(static_cast<std::FILE*>(user), "%s\n", line);
  std::fflush(static_cast<std::FILE*>(user));
}

struct Options {
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t seeds = 0;
  std::string policy = "all";
  std::string out = "results";
  bool smoke = false;
};

int fail(sf_status status) {
  std::fprintf(stderr, "error (%s): %s\n", sf_status_name(status), sf_last_error());
  // Status codes beyond the documented exit codes collapse onto config errors.
  return status <= SF_ERR_SELFTEST ? static_cast<int>(status) : 1;
}

using Suite = sf_status (*)(const sf_config*, const char*, const char*, const uint64_t*, size_t, sf_log_fn, void*);

int run(const Options& o, Suite suite) {
  sf_config* config = nullptr;
  sf_status st = o.config_path.empty() ? sf_config_default(&config) : sf_config_load(o.config_path.c_str(), &config);
  if (st != SF_OK) return fail(st);
  if (o.smoke) sf_config_apply_smoke(config);

  if (o.seed != 0 || o.seeds != 0) {
    // --seed picks the first seed, --seeds the count; absent ones keep config values.
    std::uint64_t base = 0;
    size_t count = 0;
    sf_config_get_seeds(config, &base, &count);
    if (o.seed != 0) base = o.seed;
    if (o.seeds != 0) count = o.seeds;
    st = sf_config_set_seeds(config, base, count);
    if (st != SF_OK) {
      sf_config_free(config);
      return fail(st);
    }
  }

  const char* env_out = std::getenv(kOutDirEnv);
  const std::string out = env_out && *env_out ? env_out : o.out;
  st = suite(config, out.c_str(), o.policy.c_str(), nullptr, 0, log_line, stderr);
  sf_config_free(config);
  if (st != SF_OK) return fail(st);
  std::fprintf(stderr, "outputs in %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated constrained RL for multi-cell network slicing"};
  app.set_version_flag("--version", std::string(sf_version()));
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config file (unknown keys are rejected)")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "First seed of the seed list")->check(CLI::PositiveNumber);
    sub->add_option("--seeds", o.seeds, "Number of seeds")->check(CLI::PositiveNumber);
    sub->add_option("--policy", o.policy, "slicefed, equal, queueprop, random, a comma list, or all");
    sub->add_option("--out", o.out, std::string("Output directory (") + kOutDirEnv + " takes precedence)");
    sub->add_flag("--smoke", o.smoke, "Reduced horizon: 20 rounds of 200 slots");
  };

  auto* train = app.add_subcommand("train", "Federated training (SliceFed) or baseline rollouts");
  auto* cdf = app.add_subcommand("eval-cdf", "URLLC delay CDF per policy");
  auto* traces = app.add_subcommand("eval-traces", "Per-slice queue and allocation traces");
  auto* sweep = app.add_subcommand("eval-sweep", "URLLC load sweep");
  for (auto* sub : {train, cdf, traces, sweep}) add_common(sub);

  auto* selftest = app.add_subcommand("selftest", "Numerical self-checks and a smoke training run");
  bool quick = false;
  selftest->add_option("--seed", o.seed, "Seed for the randomized checks");
  selftest->add_flag("--smoke", o.smoke, "Accepted for symmetry; the checks always use the smoke horizon");
  selftest->add_flag("--quick", quick, "Skip the smoke training check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (*train) return run(o, sf_run_train);
  if (*cdf) return run(o, sf_run_eval_cdf);
  if (*traces) return run(o, sf_run_eval_traces);
  if (*sweep) return run(o, sf_run_eval_sweep);

  const sf_status st = sf_selftest(o.seed != 0 ? o.seed : 20240607, quick ? 0 : 1, log_line, stdout);
  if (st != SF_OK) return fail(st);
  return 0;
}
