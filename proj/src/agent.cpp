#include "slicefed/agent.hpp"

#include <algorithm>
#include <numeric>

namespace slicefed::agent {

namespace {

nn::Matrix stack_states(std::span<const Transition> batch, bool next) {
  nn::Matrix m(env::kObsDim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& obs = next ? batch[j].next_state : batch[j].state;
    for (std::size_t i = 0; i < env::kObsDim; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = obs[i];
  }
  return m;
}

nn::Matrix stack_observations(std::span<const env::Observation> probes) {
  nn::Matrix m(env::kObsDim, static_cast<Eigen::Index>(probes.size()));
  for (std::size_t j = 0; j < probes.size(); ++j)
    for (std::size_t i = 0; i < env::kObsDim; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = probes[j][i];
  return m;
}

dirichlet::Vec3 column3(const nn::Matrix& m, Eigen::Index j) { return {m(0, j), m(1, j), m(2, j)}; }

void clip_gradient(nn::GradientSet& g, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = std::sqrt(g.squared_norm());
  if (norm > max_norm) g.scale(max_norm / norm);
}

}  // namespace

void AgentHyper::validate() const {
  if (!(discount > 0.0 && discount < 1.0)) throw ConfigError("discount must lie in (0,1)");
  if (!(clip_ratio > 0.0)) throw ConfigError("clip_ratio must be > 0");
  if (!(entropy_weight >= 0.0)) throw ConfigError("entropy_weight must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (epochs == 0 || minibatch == 0) throw ConfigError("epochs and minibatch must be >= 1");
  if (hidden.empty()) throw ConfigError("hidden must list at least one layer");
  for (double eta : dual_learning_rate)
    if (!(eta >= 0.0)) throw ConfigError("dual learning rates must be >= 0");
  if (!(dual_tolerance >= 0.0)) throw ConfigError("dual_tolerance must be >= 0");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("gae_lambda must lie in [0,1]");
}

std::vector<std::size_t> layer_sizes(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output) {
  std::vector<std::size_t> sizes{input};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output);
  return sizes;
}

DualVariables dual_update(const DualVariables& duals, const std::array<double, kNumConstraints>& g_hat) {
  DualVariables out = duals;
  for (std::size_t i = 0; i < kNumConstraints; ++i)
    out.lambda[i] = std::max(0.0, duals.lambda[i] + duals.learning_rate[i] * g_hat[i]);
  return out;
}

double adjusted_reward(double reward, const env::ConstraintSignals& g, const DualVariables& duals) {
  return reward - duals.lambda[0] * g.g1 - duals.lambda[1] * g.g2 - duals.lambda[2] * g.g3;
}

PolicyHead evaluate_policy(const nn::ParamSet& policy, const env::Observation& obs) {
  nn::Vector x(static_cast<Eigen::Index>(env::kObsDim));
  for (std::size_t i = 0; i < env::kObsDim; ++i) x(static_cast<Eigen::Index>(i)) = obs[i];
  const nn::Vector z = nn::forward(policy, x);
  PolicyHead head;
  head.logits = {z(0), z(1), z(2)};
  head.concentration = dirichlet::concentration_from_logits(head.logits);
  for (double c : head.concentration) {
    if (!std::isfinite(c)) throw NumericalFailure("policy fault: non-finite concentration from actor network");
  }
  return head;
}

ActResult act(const nn::ParamSet& policy, const env::Observation& obs, Rng& rng) {
  const PolicyHead head = evaluate_policy(policy, obs);
  ActResult out;
  out.action.fractions = dirichlet::sample(head.concentration, rng);
  out.log_prob = dirichlet::log_prob(head.concentration, out.action.fractions);
  if (!std::isfinite(out.log_prob)) throw NumericalFailure("policy fault: non-finite log-probability");
  return out;
}

Action mean_action(const nn::ParamSet& policy, const env::Observation& obs) {
  return Action{dirichlet::mean(evaluate_policy(policy, obs).concentration)};
}

std::vector<double> td_errors(const nn::ParamSet& critic, std::span<const Transition> batch, double discount) {
  const nn::Matrix v = nn::forward(critic, stack_states(batch, false));
  const nn::Matrix v_next = nn::forward(critic, stack_states(batch, true));
  std::vector<double> delta(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const double bootstrap = batch[j].done ? 0.0 : discount * v_next(0, col);
    delta[j] = batch[j].adjusted_reward + bootstrap - v(0, col);
  }
  return delta;
}

std::vector<double> gae_advantages(const nn::ParamSet& critic, std::span<const Transition> rollout, double discount,
                                   double lambda) {
  std::vector<double> delta = td_errors(critic, rollout, discount);
  double running = 0.0;
  for (std::size_t j = rollout.size(); j-- > 0;) {
    running = rollout[j].done ? delta[j] : delta[j] + discount * lambda * running;
    delta[j] = running;
  }
  return delta;
}

double critic_update(nn::ParamSet& critic, nn::OptimizerState& opt, std::span<const Transition> batch,
                     const AgentHyper& hyper) {
  if (batch.empty()) throw ContractViolation("critic_update: empty batch");
  nn::ForwardCache cache;
  const nn::Matrix v = nn::forward(critic, stack_states(batch, false), &cache);
  const nn::Matrix v_next = nn::forward(critic, stack_states(batch, true));
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  nn::Matrix grad_out(1, v.cols());
  double loss = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const auto& t = batch[static_cast<std::size_t>(j)];
    const double target = t.adjusted_reward + (t.done ? 0.0 : hyper.discount * v_next(0, j));
    const double delta = target - v(0, j);
    loss += delta * delta * inv_b;
    grad_out(0, j) = -2.0 * delta * inv_b;  // d loss / d V(s), target held fixed
  }
  if (!std::isfinite(loss)) throw NumericalFailure("critic_update: non-finite TD loss");
  nn::GradientSet g = nn::backward(critic, cache, grad_out);
  clip_gradient(g, hyper.max_grad_norm);
  nn::adam_step(critic, g, opt, nn::Direction::Descent);
  return loss;
}

PolicyUpdateStats policy_update(nn::ParamSet& policy, nn::OptimizerState& opt, std::span<const Transition> batch,
                                std::span<const double> advantages, const AgentHyper& hyper) {
  if (batch.empty() || advantages.size() != batch.size())
    throw ContractViolation("policy_update: batch and advantages must be nonempty and aligned");
  nn::ForwardCache cache;
  const nn::Matrix logits = nn::forward(policy, stack_states(batch, false), &cache);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  nn::Matrix grad_out(3, logits.cols());
  PolicyUpdateStats stats;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const auto& t = batch[static_cast<std::size_t>(j)];
    const double adv = advantages[static_cast<std::size_t>(j)];
    const auto z = column3(logits, j);
    const auto conc = dirichlet::concentration_from_logits(z);
    const auto slope = dirichlet::concentration_slope(z);
    const double lp = dirichlet::log_prob(conc, t.action.fractions);
    const double ratio = std::exp(lp - t.log_prob);
    const double clipped = std::clamp(ratio, 1.0 - hyper.clip_ratio, 1.0 + hyper.clip_ratio);
    const double unclipped_term = ratio * adv;
    const double clipped_term = clipped * adv;
    // Gradient flows only through the unclipped branch when it is the min.
    const bool active = unclipped_term <= clipped_term;
    if (!active) stats.clip_fraction += inv_b;
    const double h = dirichlet::entropy(conc);
    stats.surrogate += std::min(unclipped_term, clipped_term) * inv_b;
    stats.entropy += h * inv_b;

    const double coef = active ? ratio * adv : 0.0;
    const auto glp = dirichlet::grad_log_prob(conc, t.action.fractions);
    const auto gh = dirichlet::grad_entropy(conc);
    for (Eigen::Index i = 0; i < 3; ++i) {
      const auto k = static_cast<std::size_t>(i);
      grad_out(i, j) = inv_b * (coef * glp[k] + hyper.entropy_weight * gh[k]) * slope[k];
    }
  }
  stats.actor_loss = -(stats.surrogate + hyper.entropy_weight * stats.entropy);
  if (!std::isfinite(stats.actor_loss) || !grad_out.allFinite())
    throw NumericalFailure("policy_update: non-finite actor loss");
  nn::GradientSet g = nn::backward(policy, cache, grad_out);
  clip_gradient(g, hyper.max_grad_norm);
  nn::adam_step(policy, g, opt, nn::Direction::Ascent);
  return stats;
}

double mean_action_distance(const nn::ParamSet& local, const nn::ParamSet& global,
                            std::span<const env::Observation> probes) {
  if (probes.empty()) throw ContractViolation("mean_action_distance: empty probe batch");
  const nn::Matrix x = stack_observations(probes);
  const nn::Matrix zl = nn::forward(local, x);
  const nn::Matrix zg = nn::forward(global, x);
  double total = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto ml = dirichlet::mean(dirichlet::concentration_from_logits(column3(zl, j)));
    const auto mg = dirichlet::mean(dirichlet::concentration_from_logits(column3(zg, j)));
    for (std::size_t i = 0; i < 3; ++i) total += (ml[i] - mg[i]) * (ml[i] - mg[i]);
  }
  return total / static_cast<double>(probes.size());
}

double distill_step(nn::ParamSet& policy, nn::OptimizerState& opt, const nn::ParamSet& global,
                    std::span<const env::Observation> probes, double weight, double max_grad_norm) {
  if (probes.empty()) throw ContractViolation("distill_step: empty probe batch");
  const nn::Matrix x = stack_observations(probes);
  nn::ForwardCache cache;
  const nn::Matrix zl = nn::forward(policy, x, &cache);
  const nn::Matrix zg = nn::forward(global, x);
  const double inv_p = 1.0 / static_cast<double>(probes.size());
  nn::Matrix grad_out(3, x.cols());
  double loss = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto z = column3(zl, j);
    const auto conc = dirichlet::concentration_from_logits(z);
    const auto slope = dirichlet::concentration_slope(z);
    const double total = conc[0] + conc[1] + conc[2];
    const auto ml = dirichlet::mean(conc);
    const auto mg = dirichlet::mean(dirichlet::concentration_from_logits(column3(zg, j)));
    dirichlet::Vec3 d_mean{};
    double weighted = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      loss += weight * inv_p * (ml[i] - mg[i]) * (ml[i] - mg[i]);
      d_mean[i] = 2.0 * weight * inv_p * (ml[i] - mg[i]);
      weighted += d_mean[i] * ml[i];
    }
    // d mean_i / d conc_k = (delta_ik - mean_i) / total
    for (Eigen::Index k = 0; k < 3; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      grad_out(k, j) = (d_mean[kk] - weighted) / total * slope[kk];
    }
  }
  nn::GradientSet g = nn::backward(policy, cache, grad_out);
  clip_gradient(g, max_grad_norm);
  nn::adam_step(policy, g, opt, nn::Direction::Descent);
  return loss;
}

Agent::Agent(const AgentHyper& hyper, std::uint64_t seed, std::size_t gnb, const nn::ParamSet& initial_policy)
    : hyper_(hyper), gnb_(gnb), rng_(make_stream(seed, stream::kAgent, gnb)), policy_(initial_policy) {
  hyper_.validate();
  Rng init = make_stream(seed, stream::kInit, 1 + gnb);
  critic_ = nn::ParamSet::create(layer_sizes(env::kObsDim, hyper_.hidden, 1), init);
  policy_opt_ = nn::OptimizerState::for_params(policy_, hyper_.learning_rate);
  critic_opt_ = nn::OptimizerState::for_params(critic_, hyper_.learning_rate);
  duals_.learning_rate = hyper_.dual_learning_rate;
}

ActResult Agent::act(const env::Observation& obs) { return agent::act(policy_, obs, rng_); }

void Agent::record(const env::Observation& state, const ActResult& decision, double reward,
                   const env::ConstraintSignals& constraints, const env::Observation& next_state, bool done) {
  Transition t;
  t.state = state;
  t.action = decision.action;
  t.raw_reward = reward;
  t.adjusted_reward = adjusted_reward(reward, constraints, duals_);
  t.constraints = constraints;
  t.next_state = next_state;
  t.log_prob = decision.log_prob;
  t.done = done;
  buffer_.push_back(t);
  if (hyper_.dual_update_per_step) {
    auto g = constraints.as_array();
    for (double& v : g) v -= hyper_.dual_tolerance;
    duals_ = dual_update(duals_, g);
  }
}

TrainStats Agent::train() {
  TrainStats stats;
  const std::size_t n = buffer_.size();
  stats.samples = n;
  if (n == 0) return stats;

  std::vector<double> adv = hyper_.advantage == AdvantageEstimator::GAE
                                ? gae_advantages(critic_, buffer_, hyper_.discount, hyper_.gae_lambda)
                                : td_errors(critic_, buffer_, hyper_.discount);
  if (hyper_.normalize_advantage && n > 1) {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Transition> batch;
  std::vector<double> batch_adv;
  std::size_t critic_batches = 0;
  std::size_t actor_batches = 0;
  for (std::size_t epoch = 0; epoch < hyper_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng_);
    for (std::size_t start = 0; start < n; start += hyper_.minibatch) {
      const std::size_t end = std::min(n, start + hyper_.minibatch);
      batch.clear();
      batch_adv.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(buffer_[order[k]]);
        batch_adv.push_back(adv[order[k]]);
      }
      stats.critic_loss += critic_update(critic_, critic_opt_, batch, hyper_);
      ++critic_batches;
      const auto ps = policy_update(policy_, policy_opt_, batch, batch_adv, hyper_);
      // Report the final epoch's actor statistics.
      if (epoch + 1 == hyper_.epochs) {
        stats.actor_loss += ps.actor_loss;
        stats.entropy += ps.entropy;
        stats.clip_fraction += ps.clip_fraction;
        ++actor_batches;
      }
    }
  }
  stats.critic_loss /= static_cast<double>(critic_batches);
  stats.actor_loss /= static_cast<double>(actor_batches);
  stats.entropy /= static_cast<double>(actor_batches);
  stats.clip_fraction /= static_cast<double>(actor_batches);
  if (!policy_.finite() || !critic_.finite()) throw NumericalFailure("agent training produced non-finite parameters");
  return stats;
}

double Agent::distill(const nn::ParamSet& global, std::size_t probes, double weight) {
  if (buffer_.empty() || probes == 0 || weight <= 0.0) return 0.0;
  std::vector<env::Observation> states;
  states.reserve(probes);
  std::uniform_int_distribution<std::size_t> pick(0, buffer_.size() - 1);
  for (std::size_t i = 0; i < probes; ++i) states.push_back(buffer_[pick(rng_)].state);
  return distill_step(policy_, policy_opt_, global, states, weight, hyper_.max_grad_norm);
}

void Agent::update_duals() {
  if (hyper_.dual_update_per_step || buffer_.empty()) return;
  std::array<double, kNumConstraints> g_hat{};
  for (const auto& t : buffer_) {
    const auto g = t.constraints.as_array();
    for (std::size_t i = 0; i < kNumConstraints; ++i) g_hat[i] += g[i];
  }
  for (double& g : g_hat) g = g / static_cast<double>(buffer_.size()) - hyper_.dual_tolerance;
  duals_ = dual_update(duals_, g_hat);
}

}  // namespace slicefed::agent
