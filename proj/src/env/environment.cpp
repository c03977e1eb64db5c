#include "culprit/env/environment.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "culprit/detail/shuffle.hpp"
#include "culprit/errors.hpp"

namespace culprit::env {

std::size_t decode_action(std::span<const double> action) {
  if (action.empty()) throw ShapeError("decode_action: empty action");
  std::size_t best = 0;
  for (std::size_t i = 1; i < action.size(); ++i) {
    if (action[i] > action[best]) best = i;
  }
  return best;
}

CaseEnvironment::CaseEnvironment(std::vector<CaseRecord> cases, std::uint64_t seed)
    : cases_(std::move(cases)), rng_(seed) {
  if (cases_.empty()) throw ConfigError("environment needs at least one case");
  state_dim_ = cases_.front().features.size();
  n_suspects_ = cases_.front().n_suspects;
  if (state_dim_ == 0) throw ConfigError("case features are empty");
  if (n_suspects_ < 2) throw ConfigError("a case needs at least two suspects");
  for (const auto& c : cases_) {
    if (c.features.size() != state_dim_) {
      throw ConfigError(fmt::format("case '{}' has {} features, expected {}", c.case_id,
                                    c.features.size(), state_dim_));
    }
    if (c.n_suspects != n_suspects_) {
      throw ConfigError(fmt::format("case '{}' has {} suspects, expected {}", c.case_id,
                                    c.n_suspects, n_suspects_));
    }
    if (c.culprit_index >= c.n_suspects) {
      throw ConfigError(fmt::format("case '{}' culprit index {} is not below {}", c.case_id,
                                    c.culprit_index, c.n_suspects));
    }
    for (double v : c.features.values) {
      if (!std::isfinite(v)) throw ConfigError(fmt::format("case '{}' has a non-finite feature", c.case_id));
    }
  }
  order_.resize(cases_.size());
  cursor_ = order_.size();
}

void CaseEnvironment::reshuffle() {
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  detail::shuffle(order_, rng_);
  cursor_ = 0;
}

Vector CaseEnvironment::reset() {
  if (cursor_ >= order_.size()) reshuffle();
  active_ = order_[cursor_++];
  return cases_[*active_].features.values;
}

StepResult CaseEnvironment::step(std::span<const double> action) {
  if (!active_) throw ProtocolError("step() called without a preceding reset()");
  if (action.size() != n_suspects_) {
    throw ShapeError(fmt::format("action has {} entries, environment has {} suspects",
                                 action.size(), n_suspects_));
  }
  const CaseRecord& c = cases_[*active_];
  active_.reset();
  StepResult r;
  r.decoded = decode_action(action);
  r.reward = r.decoded == c.culprit_index ? kCorrectReward : kWrongReward;
  r.done = true;
  r.next_state.assign(state_dim_, 0.0);
  return r;
}

CaseEnvironment from_records(std::vector<CaseRecord> records, std::uint64_t seed) {
  return CaseEnvironment(std::move(records), seed);
}

std::vector<CaseRecord> make_synthetic_cases(const SyntheticSpec& spec) {
  if (spec.n_suspects < 2) throw ConfigError("synthetic: need at least two suspects");
  if (spec.n_features < spec.n_suspects) {
    throw ConfigError(fmt::format("synthetic: {} features cannot encode {} suspects",
                                  spec.n_features, spec.n_suspects));
  }
  if (spec.n_cases == 0) throw ConfigError("synthetic: need at least one case");
  if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) {
    throw ConfigError("synthetic: noise must be a finite non-negative number");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> culprit(0, spec.n_suspects - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<CaseRecord> cases;
  cases.reserve(spec.n_cases);
  for (std::size_t i = 0; i < spec.n_cases; ++i) {
    CaseRecord c;
    c.case_id = fmt::format("synth-{:05d}", i);
    c.n_suspects = spec.n_suspects;
    c.culprit_index = culprit(rng);
    c.features.kind = vision::DescriptorKind::Tabular;
    c.features.values.resize(spec.n_features);
    for (std::size_t j = 0; j < spec.n_features; ++j) {
      const double signal = (j % spec.n_suspects == c.culprit_index) ? 1.0 : 0.0;
      c.features.values[j] = signal + spec.noise * gauss(rng);
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

CaseEnvironment make_synthetic(const SyntheticSpec& spec) {
  return CaseEnvironment(make_synthetic_cases(spec), spec.seed);
}

}  // namespace culprit::env
