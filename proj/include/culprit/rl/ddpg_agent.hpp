#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "culprit/nn/adam.hpp"
#include "culprit/nn/mlp.hpp"
#include "culprit/rl/replay_buffer.hpp"

namespace culprit::rl {

/// Hyperparameters. gamma, noise_sigma and tau default to the values the
/// method was published with; the remaining defaults are conventional DDPG
/// settings.
struct AgentConfig {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  double gamma = 0.95;
  double tau = 0.001;
  double noise_sigma = 0.1;
  std::size_t batch_size = 64;
  std::size_t buffer_capacity = 100'000;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::vector<std::size_t> hidden = {64, 64};
  /// Actor output-layer weights start uniform in +-head_init_scale so the
  /// tanh head begins unsaturated. Zero keeps the fan-in initialization.
  double head_init_scale = 3e-3;
  std::uint64_t seed = 0;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;

  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

/// Read-only copy of a policy, safe to share across evaluation threads.
struct PolicySnapshot {
  nn::Mlp actor;

  Vector act(std::span<const double> state) const;
};

struct StepReport {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
  bool updated = false;
};

struct ScalarAndGradients {
  double value = 0.0;
  nn::Gradients grads;
};

/// Blend every target parameter towards its online counterpart:
/// target <- tau * online + (1 - tau) * target.
void soft_update(nn::Mlp& target, const nn::Mlp& online, double tau);

/// Deep deterministic policy gradient learner: tanh-headed actor, linear-
/// headed critic over (state ++ action), slowly tracking target copies of
/// both, and a uniform replay buffer.
class DdpgAgent {
public:
  explicit DdpgAgent(AgentConfig config);

  /// Restores networks and counters, e.g. from a checkpoint. The replay
  /// buffer starts empty and optimizer moments start fresh.
  DdpgAgent(AgentConfig config, nn::Mlp actor, nn::Mlp critic, nn::Mlp target_actor,
            nn::Mlp target_critic);

  const AgentConfig& config() const noexcept { return config_; }

  Vector select_action(std::span<const double> state, bool explore);

  void store_transition(Transition t);
  /// Throws NotReadyError while the buffer holds fewer than `batch_size`
  /// transitions.
  std::vector<Transition> sample_batch(std::size_t batch_size);

  /// y_i = r_i + gamma * Q'(s'_i, mu'(s'_i)), bootstrap dropped when done_i.
  Vector compute_td_targets(std::span<const Transition> batch) const;

  /// Mean squared TD error and its gradient with respect to the critic.
  ScalarAndGradients critic_loss_gradient(std::span<const Transition> batch,
                                          std::span<const double> targets) const;

  /// mean_i Q(s_i, mu(s_i)) and its gradient with respect to the actor,
  /// critic parameters held fixed.
  ScalarAndGradients actor_objective_gradient(std::span<const Transition> batch) const;

  /// One Adam step on the critic; returns the pre-step loss.
  double critic_update(std::span<const Transition> batch, std::span<const double> targets);

  /// One Adam step ascending the policy objective; returns the pre-step mean Q.
  double actor_update(std::span<const Transition> batch);

  StepReport train_step(Transition t);

  double q_value(std::span<const double> state, std::span<const double> action) const;

  PolicySnapshot snapshot() const { return {actor_}; }

  const nn::Mlp& actor() const noexcept { return actor_; }
  const nn::Mlp& critic() const noexcept { return critic_; }
  const nn::Mlp& target_actor() const noexcept { return target_actor_; }
  const nn::Mlp& target_critic() const noexcept { return target_critic_; }
  nn::Mlp& actor() noexcept { return actor_; }
  nn::Mlp& critic() noexcept { return critic_; }
  nn::Mlp& target_actor() noexcept { return target_actor_; }
  nn::Mlp& target_critic() noexcept { return target_critic_; }

  const ReplayBuffer& buffer() const noexcept { return buffer_; }
  std::uint64_t env_steps() const noexcept { return env_steps_; }
  std::uint64_t updates() const noexcept { return updates_; }

  bool parameters_finite() const;

  /// Text checkpoint: header with config and counters, then the four
  /// networks in nn::write_mlp format.
  void save(std::ostream& os) const;
  void save(const std::string& path) const;
  static DdpgAgent load(std::istream& is);
  static DdpgAgent load(const std::string& path);

private:
  Vector critic_input(std::span<const double> state, std::span<const double> action) const;
  void check_transition(const Transition& t) const;

  AgentConfig config_;
  nn::Mlp actor_;
  nn::Mlp critic_;
  nn::Mlp target_actor_;
  nn::Mlp target_critic_;
  nn::AdamState actor_opt_;
  nn::AdamState critic_opt_;
  ReplayBuffer buffer_;
  std::mt19937_64 rng_;
  std::uint64_t env_steps_ = 0;
  std::uint64_t updates_ = 0;
};

}  // namespace culprit::rl
