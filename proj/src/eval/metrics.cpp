#include "culprit/eval/metrics.hpp"

#include <ostream>

#include <fmt/format.h>

#include "culprit/errors.hpp"
#include "culprit/nn/serialize.hpp"

namespace culprit::eval {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

void ConfusionCounts::add(std::size_t truth, std::size_t predicted) {
  if (truth >= classes.size() || predicted >= classes.size()) {
    throw OutOfBoundsError(fmt::format("class index {}/{} outside {} classes", truth, predicted,
                                       classes.size()));
  }
  ++n_cases;
  if (truth == predicted) ++correct;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const bool is_truth = k == truth;
    const bool is_pred = k == predicted;
    Class& c = classes[k];
    if (is_truth && is_pred) {
      ++c.tp;
    } else if (is_pred) {
      ++c.fp;
    } else if (is_truth) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
}

ConfusionCounts tally(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                      std::size_t n_classes) {
  if (truth.size() != predicted.size()) throw ShapeError("tally: truth and prediction lengths differ");
  ConfusionCounts counts(n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) counts.add(truth[i], predicted[i]);
  return counts;
}

MetricsReport compute_metrics(const ConfusionCounts& counts) {
  if (counts.n_cases == 0) throw DataError("metrics: no cases were evaluated");
  MetricsReport r;
  r.n_cases = counts.n_cases;
  r.accuracy = ratio(counts.correct, counts.n_cases);
  for (const auto& c : counts.classes) {
    ClassMetrics m;
    m.precision = ratio(c.tp, c.tp + c.fp);
    m.recall = ratio(c.tp, c.tp + c.fn);
    const double pr = m.precision + m.recall;
    m.f1 = pr == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / pr;
    m.support = c.tp + c.fn;
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
    r.per_class.push_back(m);
  }
  if (!r.per_class.empty()) {
    const double k = static_cast<double>(r.per_class.size());
    r.macro_precision /= k;
    r.macro_recall /= k;
    r.macro_f1 /= k;
  }
  return r;
}

ConfusionCounts evaluate_scorer(const Scorer& scorer, std::size_t input_dim,
                                std::span<const env::CaseRecord> cases) {
  if (cases.empty()) throw DataError("evaluate: empty case list");
  const std::size_t n_classes = cases.front().n_suspects;
  ConfusionCounts counts(n_classes);
  for (const auto& c : cases) {
    if (c.features.size() != input_dim) {
      throw ConfigError(fmt::format("evaluate: case '{}' has {} features, model expects {}",
                                    c.case_id, c.features.size(), input_dim));
    }
    if (c.n_suspects != n_classes) {
      throw ConfigError(fmt::format("evaluate: case '{}' has {} suspects, expected {}", c.case_id,
                                    c.n_suspects, n_classes));
    }
    const nn::Vector scores = scorer(c.features.values);
    if (scores.size() != n_classes) {
      throw ConfigError(fmt::format("evaluate: model emits {} scores for {} suspects", scores.size(),
                                    n_classes));
    }
    counts.add(c.culprit_index, env::decode_action(scores));
  }
  return counts;
}

ConfusionCounts evaluate(const rl::PolicySnapshot& policy, std::span<const env::CaseRecord> cases) {
  return evaluate_scorer([&](std::span<const double> x) { return policy.act(x); },
                         policy.actor.input_dim(), cases);
}

void write_metrics(std::ostream& os, const MetricsReport& report, const std::string& prefix) {
  const std::string p = prefix.empty() ? "" : prefix + ".";
  os << p << "averaging = macro_one_vs_rest\n";
  os << p << "n_cases = " << report.n_cases << '\n';
  os << p << "accuracy = " << nn::format_real(report.accuracy) << '\n';
  os << p << "macro_precision = " << nn::format_real(report.macro_precision) << '\n';
  os << p << "macro_recall = " << nn::format_real(report.macro_recall) << '\n';
  os << p << "macro_f1 = " << nn::format_real(report.macro_f1) << '\n';
  for (std::size_t k = 0; k < report.per_class.size(); ++k) {
    const ClassMetrics& m = report.per_class[k];
    os << p << "per_class." << k << ".support = " << m.support << '\n';
    os << p << "per_class." << k << ".precision = " << nn::format_real(m.precision) << '\n';
    os << p << "per_class." << k << ".recall = " << nn::format_real(m.recall) << '\n';
    os << p << "per_class." << k << ".f1 = " << nn::format_real(m.f1) << '\n';
  }
}

}  // namespace culprit::eval
