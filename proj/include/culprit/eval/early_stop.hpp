#pragma once

#include <cstddef>
#include <span>

namespace culprit::eval {

struct EarlyStopSpec {
  std::size_t patience = 10;  // evaluations without strict improvement
};

enum class StopDecision { Continue, Stop };

/// Stop iff the last `patience` scores hold no strict improvement over the
/// best score recorded before them. Higher is better.
StopDecision early_stop_check(std::span<const double> history, const EarlyStopSpec& spec);

}  // namespace culprit::eval
