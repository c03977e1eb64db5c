#include "culprit/eval/early_stop.hpp"

#include <algorithm>

namespace culprit::eval {

StopDecision early_stop_check(std::span<const double> history, const EarlyStopSpec& spec) {
  if (spec.patience == 0) return history.empty() ? StopDecision::Continue : StopDecision::Stop;
  if (history.size() <= spec.patience) return StopDecision::Continue;
  const std::size_t split = history.size() - spec.patience;
  const double best_before = *std::max_element(history.begin(), history.begin() + split);
  const bool improved = std::any_of(history.begin() + split, history.end(),
                                    [best_before](double s) { return s > best_before; });
  return improved ? StopDecision::Continue : StopDecision::Stop;
}

}  // namespace culprit::eval
