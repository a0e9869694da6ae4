#include "slicefed/selftest.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "slicefed/agent.hpp"
#include "slicefed/baselines.hpp"
#include "slicefed/channel.hpp"
#include "slicefed/dirichlet.hpp"
#include "slicefed/experiments.hpp"
#include "slicefed/federation.hpp"
#include "slicefed/traffic.hpp"

namespace slicefed::selftest {

namespace fs = std::filesystem;

namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

nn::ParamSet scalar_params(double v) {
  nn::DenseLayer l;
  l.weight = nn::Matrix::Constant(1, 1, v);
  l.bias = nn::Vector::Constant(1, v);
  return nn::ParamSet({l});
}

env::Observation random_observation(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  env::Observation o;
  for (double& f : o.features) f = u(rng);
  o.features[0] *= 8.0;
  o.features[1] *= 8.0;
  o.features[2] *= 8.0;
  return o;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

void run_smoke_pipeline(const ScenarioConfig& config, const fs::path& out) {
  experiments::RunOptions opts;
  opts.out_dir = out;
  for (auto k : experiments::kAllPolicies) experiments::run_training(config, k, opts);
  experiments::run_delay_cdf(config, opts);
  experiments::run_queue_traces(config, opts);
  experiments::run_load_sweep(config, opts);
}

fs::path scratch_dir(const std::string& tag) {
  std::random_device rd;
  const fs::path p = fs::temp_directory_path() / ("slicefed_" + tag + "_" + std::to_string(rd()));
  fs::create_directories(p);
  return p;
}

}  // namespace

CheckResult gradient_check(std::uint64_t seed) {
  Timer timer;
  CheckResult r{1, "gradient oracle", true, "", 0.0};
  Rng rng = make_stream(seed, stream::kInit, 1001);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t sizes[] = {12, 16, 16, 4};
  constexpr double h = 1e-5;
  constexpr double tol = 1e-4;
  double worst = 0.0;
  for (int net = 0; net < 100; ++net) {
    nn::ParamSet p = nn::ParamSet::create(sizes, rng);
    nn::Matrix x(12, 3);
    nn::Matrix c(4, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = normal(rng);
    const auto loss = [&](const nn::ParamSet& q) { return nn::forward(q, x).cwiseProduct(c).sum(); };

    nn::ForwardCache cache;
    nn::forward(p, x, &cache);
    const nn::GradientSet g = nn::backward(p, cache, c);
    std::vector<double> analytic;
    for (const auto& l : g.layers) {
      for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
        for (Eigen::Index j = 0; j < l.weight.cols(); ++j) analytic.push_back(l.weight(i, j));
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) analytic.push_back(l.bias(i));
    }

    std::vector<double> theta = p.flatten();
    nn::ParamSet probe = p;
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double saved = theta[k];
      theta[k] = saved + h;
      probe.assign_flat(theta);
      const double up = loss(probe);
      theta[k] = saved - h;
      probe.assign_flat(theta);
      const double down = loss(probe);
      theta[k] = saved;
      const double numeric = (up - down) / (2.0 * h);
      diff2 += (numeric - analytic[k]) * (numeric - analytic[k]);
      a2 += analytic[k] * analytic[k];
      n2 += numeric * numeric;
    }
    const double rel = std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
    worst = std::max(worst, rel);
  }
  r.seconds = timer.seconds();
  r.passed = worst <= tol && r.seconds < 10.0;
  r.detail = fmt("100 nets 12-16-16-4, worst relative error %.3g (tol 1e-4), %.2f s (limit 10 s)", worst, r.seconds);
  return r;
}

CheckResult fedavg_algebra(std::uint64_t seed) {
  Timer timer;
  CheckResult r{2, "fedavg algebra", true, "", 0.0};
  constexpr double tol = 1e-12;

  // Weighted example: counts [1000, 3000], scalar params [0, 4].
  std::vector<federation::ModelUpdate> ex(2);
  ex[0].gnb = 0;
  ex[0].samples = 1000;
  ex[0].params = scalar_params(0.0);
  ex[1].gnb = 1;
  ex[1].samples = 3000;
  ex[1].params = scalar_params(4.0);
  const double got = federation::fedavg(ex).layers()[0].weight(0, 0);
  const bool example_ok = std::abs(got - 3.0) <= tol;

  Rng rng = make_stream(seed, stream::kFederation, 2002);
  std::uniform_int_distribution<std::size_t> count(1, 5000);
  const std::size_t sizes[] = {12, 16, 16, 4};
  double perm_err = 0.0;
  double envelope_excess = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<federation::ModelUpdate> ups(7);
    for (std::size_t n = 0; n < ups.size(); ++n) {
      ups[n].gnb = n;
      ups[n].samples = count(rng);
      ups[n].params = nn::ParamSet::create(sizes, rng);
    }
    const auto base = federation::fedavg(ups).flatten();
    auto shuffled = ups;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto other = federation::fedavg(shuffled).flatten();
    for (std::size_t k = 0; k < base.size(); ++k) perm_err = std::max(perm_err, std::abs(base[k] - other[k]));
    std::vector<std::vector<double>> flat;
    for (const auto& u : ups) flat.push_back(u.params.flatten());
    for (std::size_t k = 0; k < base.size(); ++k) {
      double lo = flat[0][k], hi = flat[0][k];
      for (const auto& f : flat) {
        lo = std::min(lo, f[k]);
        hi = std::max(hi, f[k]);
      }
      envelope_excess = std::max({envelope_excess, lo - base[k], base[k] - hi});
    }
  }
  r.passed = example_ok && perm_err <= tol && envelope_excess <= tol;
  r.detail = fmt("[1000,3000]x[0,4] -> %.15g; permutation diff %.3g; envelope excess %.3g (tol 1e-12)", got, perm_err,
                 envelope_excess);
  r.seconds = timer.seconds();
  return r;
}

CheckResult dual_projection(std::uint64_t seed) {
  Timer timer;
  CheckResult r{3, "dual projection", true, "", 0.0};
  Rng rng = make_stream(seed, stream::kAgent, 3003);
  std::normal_distribution<double> g(0.0, 5.0);
  agent::DualVariables d;
  double min_lambda = 0.0;
  for (int i = 0; i < 100000; ++i) {
    d = agent::dual_update(d, {g(rng), g(rng), g(rng)});
    for (double l : d.lambda) min_lambda = std::min(min_lambda, l);
  }
  const bool nonneg = min_lambda >= 0.0;

  agent::DualVariables lin;
  const std::array<double, kNumConstraints> c{0.3, 1.7, 0.05};
  constexpr int steps = 1000;
  for (int i = 0; i < steps; ++i) lin = agent::dual_update(lin, c);
  double lin_err = 0.0;
  for (std::size_t i = 0; i < kNumConstraints; ++i)
    lin_err = std::max(lin_err, std::abs(lin.lambda[i] - steps * lin.learning_rate[i] * c[i]));
  r.passed = nonneg && lin_err <= 1e-9;
  r.detail = fmt("min lambda over 1e5 updates %.3g; linear growth error %.3g (tol 1e-9)", min_lambda, lin_err);
  r.seconds = timer.seconds();
  return r;
}

CheckResult simplex_feasibility(std::uint64_t seed) {
  Timer timer;
  CheckResult r{4, "simplex feasibility", true, "", 0.0};
  Rng rng = make_stream(seed, stream::kAgent, 4004);
  const auto sizes = agent::layer_sizes(env::kObsDim, {128, 128}, kNumSlices);
  const nn::ParamSet policy = nn::ParamSet::create(sizes, rng, 1.0);
  std::size_t nonzero = 0;
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const auto a = agent::act(policy, random_observation(rng), rng).action;
    const double g3 = env::constraint_g3(a);
    if (g3 != 0.0) ++nonzero;
    worst = std::max(worst, g3);
  }
  std::size_t baseline_nonzero = 0;
  std::uniform_real_distribution<double> q(0.0, 50.0);
  for (int i = 0; i < 100000; ++i) {
    PerSlice<double> queues{std::floor(q(rng)), std::floor(q(rng)), std::floor(q(rng))};
    if (i % 10 == 0) queues = {0.0, 0.0, 0.0};
    for (auto kind : {baselines::BaselineKind::EqualSlicing, baselines::BaselineKind::QueueProportional,
                      baselines::BaselineKind::RandomDirichlet}) {
      if (env::constraint_g3(baselines::decide(kind, queues, rng)) != 0.0) ++baseline_nonzero;
    }
  }
  r.passed = nonzero == 0 && baseline_nonzero == 0;
  r.detail = fmt("policy actions with g3 != 0: %.0f of 1e5 (max %.3g); baseline actions: %.0f of 3e5",
                 static_cast<double>(nonzero), worst, static_cast<double>(baseline_nonzero));
  r.seconds = timer.seconds();
  return r;
}

CheckResult smoke_determinism(std::uint64_t seed) {
  Timer timer;
  CheckResult r{5, "determinism", true, "", 0.0};
  ScenarioConfig config;
  config.apply_smoke();
  config.experiment.base_seed = seed % 1000 + 1;
  const fs::path a = scratch_dir("det_a");
  const fs::path b = scratch_dir("det_b");
  try {
    run_smoke_pipeline(config, a);
    run_smoke_pipeline(config, b);
    const auto fa = read_tree(a);
    const auto fb = read_tree(b);
    std::size_t differing = 0;
    for (const auto& [name, content] : fa) {
      const auto it = fb.find(name);
      if (it == fb.end() || it->second != content) ++differing;
    }
    if (fb.size() != fa.size()) ++differing;
    r.passed = differing == 0 && !fa.empty();
    r.detail = fmt("two smoke runs, %.0f files each, %.0f differing", static_cast<double>(fa.size()),
                   static_cast<double>(differing));
  } catch (...) {
    fs::remove_all(a);
    fs::remove_all(b);
    throw;
  }
  fs::remove_all(a);
  fs::remove_all(b);
  r.seconds = timer.seconds();
  return r;
}

CheckResult sampler_moments(std::uint64_t seed) {
  Timer timer;
  CheckResult r{6, "sampler moments", true, "", 0.0};
  Rng rng = make_stream(seed, stream::kFading, 6006);
  constexpr int kDraws = 1000000;
  double rayleigh = 0.0;
  for (int i = 0; i < kDraws; ++i) rayleigh += channel::sample_small_scale(rng);
  rayleigh /= kDraws;
  double poisson = 0.0;
  for (int i = 0; i < kDraws; ++i) poisson += static_cast<double>(traffic::sample_arrivals(4.0, rng));
  poisson /= kDraws;
  dirichlet::Vec3 dmean{};
  constexpr int kDirichlet = 100000;
  for (int i = 0; i < kDirichlet; ++i) {
    const auto a = dirichlet::sample({1.0, 1.0, 1.0}, rng);
    for (std::size_t s = 0; s < 3; ++s) dmean[s] += a[s] / kDirichlet;
  }
  double dir_err = 0.0;
  for (double m : dmean) dir_err = std::max(dir_err, std::abs(m - 1.0 / 3.0));
  r.seconds = timer.seconds();
  r.passed = std::abs(rayleigh - 1.0) <= 0.01 && std::abs(poisson - 4.0) <= 0.08 && dir_err <= 0.01 &&
             r.seconds < 30.0;
  r.detail = fmt("Rayleigh power mean %.5f (1 +/- 1%%); Poisson(4) mean %.5f (4 +/- 2%%); ", rayleigh, poisson) +
             fmt("Dirichlet max deviation %.5f (0.01); %.2f s", dir_err, r.seconds);
  return r;
}

CheckResult critic_fixed_point(std::uint64_t seed) {
  Timer timer;
  CheckResult r{7, "critic fixed point", true, "", 0.0};
  agent::AgentHyper hyper;
  Rng rng = make_stream(seed, stream::kInit, 7007);
  nn::ParamSet critic = nn::ParamSet::create(agent::layer_sizes(env::kObsDim, hyper.hidden, 1), rng);
  nn::OptimizerState opt = nn::OptimizerState::for_params(critic, hyper.learning_rate);
  agent::Transition t;
  t.state = random_observation(rng);
  t.next_state = t.state;
  t.adjusted_reward = 1.0;
  const std::vector<agent::Transition> batch(8, t);
  const double target = t.adjusted_reward / (1.0 - hyper.discount);
  for (int i = 0; i < 5000; ++i) agent::critic_update(critic, opt, batch, hyper);
  nn::Vector x(static_cast<Eigen::Index>(env::kObsDim));
  for (std::size_t i = 0; i < env::kObsDim; ++i) x(static_cast<Eigen::Index>(i)) = t.state[i];
  const double v = nn::forward(critic, x)(0);
  const double rel = std::abs(v - target) / target;
  r.passed = rel <= 0.01;
  r.detail = fmt("V = %.4f vs r/(1-gamma) = %.4f, relative error %.3g (tol 1%%)", v, target, rel);
  r.seconds = timer.seconds();
  return r;
}

CheckResult smoke_training(std::uint64_t seed) {
  Timer timer;
  CheckResult r{12, "smoke training", true, "", 0.0};
  ScenarioConfig config;
  config.apply_smoke();
  config.experiment.base_seed = seed % 1000 + 1;
  std::size_t settled = 0;
  bool finite = true;
  std::string per_seed;
  for (auto s : config.seed_list()) {
    const auto run = experiments::train_seed(config, experiments::PolicyKind::SliceFed, s);
    for (const auto& rec : run.rounds) {
      const auto& m = rec.network_mean;
      for (double v : {m.raw_reward, m.g1, m.g2, m.g3, m.actor_loss, m.critic_loss})
        if (!std::isfinite(v)) finite = false;
    }
    finite = finite && run.global.finite();
    const auto g2 = experiments::g2_series(run.rounds);
    const bool ok = experiments::tail_nonincreasing(g2, config.experiment.rolling_window, 10);
    settled += ok ? 1 : 0;
    per_seed += ok ? "Y" : "n";
  }
  r.seconds = timer.seconds();
  r.passed = finite && settled >= 3 && r.seconds < 120.0;
  r.detail = fmt("5 seeds x 20 rounds x 200 slots in %.1f s (limit 120); rolling-mean g2 nonincreasing over last 10 "
                 "rounds in %.0f/5 seeds (need 3); finite=%.0f",
                 r.seconds, static_cast<double>(settled), finite ? 1.0 : 0.0) +
             " [" + per_seed + "]";
  return r;
}

std::vector<CheckResult> run_core_checks(std::uint64_t seed) {
  return {gradient_check(seed),      fedavg_algebra(seed),    dual_projection(seed),     simplex_feasibility(seed),
          smoke_determinism(seed),   sampler_moments(seed),   critic_fixed_point(seed)};
}

std::string format_result(const CheckResult& r) {
  return std::string(r.passed ? "PASS" : "FAIL") + "  [" + std::to_string(r.id) + "] " + r.name + ": " + r.detail;
}

}  // namespace slicefed::selftest
