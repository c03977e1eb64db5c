#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "culprit/env/environment.hpp"
#include "culprit/eval/early_stop.hpp"
#include "culprit/rl/ddpg_agent.hpp"

namespace culprit::rl {

struct EpisodeRecord {
  std::size_t episode = 0;
  double episode_return = 0.0;
  std::optional<double> critic_loss;      // mean over the episode's updates
  std::optional<double> actor_objective;  // mean over the episode's updates
  std::optional<double> eval_accuracy;    // set on evaluation episodes
  double wall_ms = 0.0;

  // Every field except the wall clock.
  bool same_numbers(const EpisodeRecord& o) const noexcept {
    return episode == o.episode && episode_return == o.episode_return &&
           critic_loss == o.critic_loss && actor_objective == o.actor_objective &&
           eval_accuracy == o.eval_accuracy;
  }
};

struct PhaseTiming {
  double train_step_ms = 0.0;
  std::size_t train_steps = 0;
  double episode_ms = 0.0;  // includes train_step time
  std::size_t episodes = 0;
  double evaluation_ms = 0.0;
  std::size_t evaluations = 0;
  double total_ms = 0.0;  // whole run_training call
};

struct TrainingHistory {
  std::vector<EpisodeRecord> episodes;
  std::vector<double> validation_scores;
  bool stopped_early = false;
  std::optional<std::size_t> best_episode;
  double best_score = 0.0;
  PhaseTiming timing;

  bool same_numbers(const TrainingHistory& o) const;
};

using Validator = std::function<double(const PolicySnapshot&)>;

struct TrainingOptions {
  std::size_t episodes = 0;
  std::size_t max_steps = 1;
  /// Validation cadence in episodes; 0 disables validation and early stopping.
  std::size_t eval_every = 50;
  eval::EarlyStopSpec early_stop;
  Validator validate;
  /// Reload the networks that produced the best validation score at the end.
  bool restore_best = true;
};

TrainingHistory run_training(DdpgAgent& agent, env::Environment& environment,
                             const TrainingOptions& options);

/// Columns: episode, return, critic_loss, actor_objective, eval_accuracy and,
/// when `include_wall_ms`, wall_ms. Missing values are empty cells.
void write_history_csv(const std::string& path, const TrainingHistory& history,
                       bool include_wall_ms = true);

}  // namespace culprit::rl
