#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "culprit/vision/feature_vector.hpp"

namespace culprit::env {

using Vector = std::vector<double>;

/// One preprocessed case: evidence/profile features plus the true culprit.
struct CaseRecord {
  std::string case_id;
  vision::FeatureVector features;
  std::size_t n_suspects = 0;
  std::size_t culprit_index = 0;

  friend bool operator==(const CaseRecord&, const CaseRecord&) = default;
};

struct StepResult {
  Vector next_state;
  double reward = 0.0;
  bool done = true;
  std::size_t decoded = 0;  // suspect index chosen by the action
};

/// Gym-style episodic interface.
class Environment {
public:
  virtual ~Environment() = default;

  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;

  virtual Vector reset() = 0;
  virtual StepResult step(std::span<const double> action) = 0;
};

inline constexpr double kCorrectReward = 1.0;
inline constexpr double kWrongReward = -1.0;

/// argmax with ties resolved towards the lowest index.
std::size_t decode_action(std::span<const double> action);

/// One-shot identification episodes over a fixed list of cases. Cases are
/// visited in a freshly shuffled order every epoch.
class CaseEnvironment final : public Environment {
public:
  CaseEnvironment(std::vector<CaseRecord> cases, std::uint64_t seed);

  std::size_t state_dim() const override { return state_dim_; }
  std::size_t action_dim() const override { return n_suspects_; }
  std::size_t n_suspects() const noexcept { return n_suspects_; }

  Vector reset() override;
  StepResult step(std::span<const double> action) override;

  const std::vector<CaseRecord>& cases() const noexcept { return cases_; }
  /// Index into cases() of the episode in progress, if any.
  std::optional<std::size_t> active_case() const noexcept { return active_; }

private:
  void reshuffle();

  std::vector<CaseRecord> cases_;
  std::size_t state_dim_ = 0;
  std::size_t n_suspects_ = 0;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::optional<std::size_t> active_;
};

/// Validates shape consistency and builds an environment over the records.
CaseEnvironment from_records(std::vector<CaseRecord> records, std::uint64_t seed = 0);

struct SyntheticSpec {
  std::size_t n_cases = 500;
  std::size_t n_features = 16;
  std::size_t n_suspects = 4;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

/// Cases whose features carry a culprit signal: feature j is 1 when
/// j % n_suspects == culprit and 0 otherwise, plus N(0, noise^2) on every
/// entry. Culprits are drawn uniformly.
std::vector<CaseRecord> make_synthetic_cases(const SyntheticSpec& spec);

CaseEnvironment make_synthetic(const SyntheticSpec& spec);

}  // namespace culprit::env
