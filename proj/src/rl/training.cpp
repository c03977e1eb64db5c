#include "culprit/rl/training.hpp"

#include <chrono>
#include <fstream>

#include <fmt/format.h>

#include "culprit/errors.hpp"
#include "culprit/nn/serialize.hpp"

namespace culprit::rl {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct NetworkSet {
  nn::Mlp actor, critic, target_actor, target_critic;
};

NetworkSet capture(const DdpgAgent& a) {
  return {a.actor(), a.critic(), a.target_actor(), a.target_critic()};
}

void restore(DdpgAgent& a, const NetworkSet& s) {
  a.actor() = s.actor;
  a.critic() = s.critic;
  a.target_actor() = s.target_actor;
  a.target_critic() = s.target_critic;
}

std::string cell(const std::optional<double>& v) { return v ? nn::format_real(*v) : std::string(); }

}  // namespace

bool TrainingHistory::same_numbers(const TrainingHistory& o) const {
  if (episodes.size() != o.episodes.size()) return false;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    if (!episodes[i].same_numbers(o.episodes[i])) return false;
  }
  return validation_scores == o.validation_scores && stopped_early == o.stopped_early &&
         best_episode == o.best_episode && best_score == o.best_score;
}

TrainingHistory run_training(DdpgAgent& agent, env::Environment& environment,
                             const TrainingOptions& options) {
  const auto run_start = Clock::now();
  const AgentConfig& cfg = agent.config();
  if (environment.state_dim() != cfg.state_dim || environment.action_dim() != cfg.action_dim) {
    throw ConfigError(fmt::format("environment dims {}x{} do not match agent {}x{}",
                                  environment.state_dim(), environment.action_dim(),
                                  cfg.state_dim, cfg.action_dim));
  }
  if (options.max_steps == 0) throw ConfigError("max_steps must be positive");

  TrainingHistory history;
  std::optional<NetworkSet> best;
  const bool validating = options.eval_every > 0 && options.validate;

  for (std::size_t ep = 0; ep < options.episodes; ++ep) {
    const auto ep_start = Clock::now();
    EpisodeRecord rec;
    rec.episode = ep;
    double loss_sum = 0.0, objective_sum = 0.0;
    std::size_t n_updates = 0;

    Vector state = environment.reset();
    for (std::size_t t = 0; t < options.max_steps; ++t) {
      Vector action = agent.select_action(state, true);
      env::StepResult r = environment.step(action);
      rec.episode_return += r.reward;

      const auto step_start = Clock::now();
      const StepReport report =
          agent.train_step({std::move(state), std::move(action), r.reward, r.next_state, r.done});
      history.timing.train_step_ms += ms_since(step_start);
      ++history.timing.train_steps;

      if (report.updated) {
        loss_sum += report.critic_loss;
        objective_sum += report.actor_objective;
        ++n_updates;
      }
      if (r.done) break;
      state = std::move(r.next_state);
    }
    if (n_updates > 0) {
      rec.critic_loss = loss_sum / static_cast<double>(n_updates);
      rec.actor_objective = objective_sum / static_cast<double>(n_updates);
    }
    if (!agent.parameters_finite()) {
      throw NumericError(fmt::format("non-finite network parameters after episode {}", ep));
    }
    rec.wall_ms = ms_since(ep_start);
    history.timing.episode_ms += rec.wall_ms;
    ++history.timing.episodes;

    bool stop = false;
    if (validating && (ep + 1) % options.eval_every == 0) {
      const auto eval_start = Clock::now();
      const double score = options.validate(agent.snapshot());
      history.timing.evaluation_ms += ms_since(eval_start);
      ++history.timing.evaluations;
      rec.eval_accuracy = score;
      history.validation_scores.push_back(score);
      if (!history.best_episode || score > history.best_score) {
        history.best_score = score;
        history.best_episode = ep;
        if (options.restore_best) best = capture(agent);
      }
      stop = eval::early_stop_check(history.validation_scores, options.early_stop) ==
             eval::StopDecision::Stop;
    }
    history.episodes.push_back(rec);
    if (stop) {
      history.stopped_early = true;
      break;
    }
  }
  if (best) restore(agent, *best);
  history.timing.total_ms = ms_since(run_start);
  return history;
}

void write_history_csv(const std::string& path, const TrainingHistory& history,
                       bool include_wall_ms) {
  std::ofstream os(path);
  if (!os) throw IoError(fmt::format("cannot open '{}' for writing", path));
  os << "episode,return,critic_loss,actor_objective,eval_accuracy";
  if (include_wall_ms) os << ",wall_ms";
  os << '\n';
  for (const auto& e : history.episodes) {
    os << e.episode << ',' << nn::format_real(e.episode_return) << ',' << cell(e.critic_loss) << ','
       << cell(e.actor_objective) << ',' << cell(e.eval_accuracy);
    if (include_wall_ms) os << ',' << nn::format_real(e.wall_ms);
    os << '\n';
  }
}

}  // namespace culprit::rl
