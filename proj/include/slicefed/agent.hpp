#pragma once

#include <span>
#include <vector>

#include "slicefed/dirichlet.hpp"
#include "slicefed/env.hpp"
#include "slicefed/nn.hpp"

namespace slicefed::agent {

enum class AdvantageEstimator { TD0, GAE };

struct AgentHyper {
  std::vector<std::size_t> hidden{128, 128};
  double learning_rate = 3e-3;
  double discount = 0.99;
  double clip_ratio = 0.2;
  double entropy_weight = 0.01;
  std::size_t epochs = 4;
  std::size_t minibatch = 64;
  std::array<double, kNumConstraints> dual_learning_rate{0.01, 0.01, 0.01};
  double dual_tolerance = 1e-3;
  bool dual_update_per_step = true;
  bool normalize_advantage = false;
  double max_grad_norm = 0.0;  // <= 0 disables clipping
  AdvantageEstimator advantage = AdvantageEstimator::TD0;
  double gae_lambda = 0.95;

  void validate() const;
};

/// Lagrange multipliers, kept nonnegative by projection.
struct DualVariables {
  std::array<double, kNumConstraints> lambda{0.0, 0.0, 0.0};
  std::array<double, kNumConstraints> learning_rate{0.01, 0.01, 0.01};
};

/// lambda_i <- max(0, lambda_i + eta_i * g_hat_i)
DualVariables dual_update(const DualVariables& duals, const std::array<double, kNumConstraints>& g_hat);

/// r - sum_i lambda_i g_i
double adjusted_reward(double reward, const env::ConstraintSignals& g, const DualVariables& duals);

struct Transition {
  env::Observation state;
  Action action;
  double adjusted_reward = 0.0;
  double raw_reward = 0.0;
  env::ConstraintSignals constraints;
  env::Observation next_state;
  double log_prob = 0.0;
  bool done = false;
};

struct PolicyHead {
  dirichlet::Vec3 logits{};
  dirichlet::Vec3 concentration{};
};

PolicyHead evaluate_policy(const nn::ParamSet& policy, const env::Observation& obs);

struct ActResult {
  Action action;
  double log_prob = 0.0;
};

/// Samples a ~ Dir(softplus(f(s)) + 1). Throws NumericalFailure on a
/// non-finite network output.
ActResult act(const nn::ParamSet& policy, const env::Observation& obs, Rng& rng);
Action mean_action(const nn::ParamSet& policy, const env::Observation& obs);

/// One-step TD errors r~ + gamma V(s') - V(s) (no bootstrap on done).
std::vector<double> td_errors(const nn::ParamSet& critic, std::span<const Transition> batch, double discount);
/// GAE(lambda) over a rollout stored in time order.
std::vector<double> gae_advantages(const nn::ParamSet& critic, std::span<const Transition> rollout, double discount,
                                   double lambda);

/// Squared-TD descent step; returns the pre-update mean squared TD error.
double critic_update(nn::ParamSet& critic, nn::OptimizerState& opt, std::span<const Transition> batch,
                     const AgentHyper& hyper);

struct PolicyUpdateStats {
  double actor_loss = 0.0;  // -(surrogate + entropy bonus), before the step
  double surrogate = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

/// Clipped-surrogate ascent step with entropy bonus on one minibatch.
PolicyUpdateStats policy_update(nn::ParamSet& policy, nn::OptimizerState& opt, std::span<const Transition> batch,
                                std::span<const double> advantages, const AgentHyper& hyper);

/// Mean squared distance between the two policies' mean actions over probes.
double mean_action_distance(const nn::ParamSet& local, const nn::ParamSet& global,
                            std::span<const env::Observation> probes);

/// Descent step on weight * mean_action_distance; returns the pre-step loss.
double distill_step(nn::ParamSet& policy, nn::OptimizerState& opt, const nn::ParamSet& global,
                    std::span<const env::Observation> probes, double weight, double max_grad_norm);

struct TrainStats {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  std::size_t samples = 0;
};

/// Local constrained actor-critic learner owned by one gNB.
class Agent {
 public:
  Agent(const AgentHyper& hyper, std::uint64_t seed, std::size_t gnb, const nn::ParamSet& initial_policy);

  ActResult act(const env::Observation& obs);
  Action mean_action(const env::Observation& obs) const { return agent::mean_action(policy_, obs); }

  /// Stores the transition with its Lagrangian-adjusted reward.
  void record(const env::Observation& state, const ActResult& decision, double reward,
              const env::ConstraintSignals& constraints, const env::Observation& next_state, bool done);

  /// Critic and actor epochs over the rollout buffer.
  TrainStats train();
  double distill(const nn::ParamSet& global, std::size_t probes, double weight);
  /// Per-rollout dual ascent on the buffer's mean constraint signals.
  void update_duals();
  void clear_buffer() { buffer_.clear(); }

  const nn::ParamSet& policy() const { return policy_; }
  void set_policy(const nn::ParamSet& params) { policy_ = params; }
  const nn::ParamSet& critic() const { return critic_; }
  const DualVariables& duals() const { return duals_; }
  void set_duals(const DualVariables& d) { duals_ = d; }
  const std::vector<Transition>& buffer() const { return buffer_; }
  std::size_t gnb() const { return gnb_; }
  const AgentHyper& hyper() const { return hyper_; }

 private:
  AgentHyper hyper_;
  std::size_t gnb_;
  Rng rng_;
  nn::ParamSet policy_;
  nn::ParamSet critic_;
  nn::OptimizerState policy_opt_;
  nn::OptimizerState critic_opt_;
  DualVariables duals_;
  std::vector<Transition> buffer_;
};

std::vector<std::size_t> layer_sizes(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output);

}  // namespace slicefed::agent
