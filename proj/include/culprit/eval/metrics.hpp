#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "culprit/env/environment.hpp"
#include "culprit/rl/ddpg_agent.hpp"

namespace culprit::eval {

/// One-vs-rest counts for each suspect class.
struct ConfusionCounts {
  struct Class {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    friend bool operator==(const Class&, const Class&) = default;
  };

  std::vector<Class> classes;
  std::size_t n_cases = 0;
  std::size_t correct = 0;

  explicit ConfusionCounts(std::size_t n_classes = 0) : classes(n_classes) {}

  void add(std::size_t truth, std::size_t predicted);
  std::size_t n_classes() const noexcept { return classes.size(); }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts tally(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                      std::size_t n_classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // tp + fn

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

/// Macro averages are unweighted means over all classes, including classes
/// that never occur. Every 0/0 ratio is taken as 0.
struct MetricsReport {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  std::size_t n_cases = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Throws DataError when no cases were counted.
MetricsReport compute_metrics(const ConfusionCounts& counts);

/// Greedy identification over `cases`: act without noise, decode by argmax,
/// compare with the culprit. Throws DataError on an empty list and
/// ConfigError when the policy's dimensions do not fit the cases.
ConfusionCounts evaluate(const rl::PolicySnapshot& policy, std::span<const env::CaseRecord> cases);

/// Same protocol for any scorer mapping features to one score per suspect.
using Scorer = std::function<nn::Vector(std::span<const double>)>;
ConfusionCounts evaluate_scorer(const Scorer& scorer, std::size_t input_dim,
                                std::span<const env::CaseRecord> cases);

/// `prefix.key = value` lines: accuracy, macro_*, n_cases, averaging and a
/// per_class.k.* block. Reals use 17 significant digits.
void write_metrics(std::ostream& os, const MetricsReport& report, const std::string& prefix = "");

}  // namespace culprit::eval
