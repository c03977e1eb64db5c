#include "culprit/eval/baseline.hpp"

#include <numeric>
#include <random>

#include <fmt/format.h>

#include "culprit/detail/shuffle.hpp"
#include "culprit/errors.hpp"
#include "culprit/eval/metrics.hpp"
#include "culprit/nn/adam.hpp"

namespace culprit::eval {

nn::Vector AnnModel::scores(std::span<const double> features) const { return nn::forward(net, features); }

std::size_t AnnModel::predict(std::span<const double> features) const {
  return env::decode_action(scores(features));
}

AnnResult train_ann(std::span<const env::CaseRecord> train,
                    std::span<const env::CaseRecord> validation, const AnnOptions& options) {
  if (train.empty()) throw DataError("ann baseline: empty training set");
  if (options.batch_size == 0 || options.learning_rate <= 0.0) {
    throw ConfigError("ann baseline: batch size and learning rate must be positive");
  }
  const std::size_t in = train.front().features.size();
  const std::size_t out = train.front().n_suspects;

  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), options.hidden.begin(), options.hidden.end());
  sizes.push_back(out);
  std::vector<nn::Activation> acts(options.hidden.size(), nn::Activation::ReLU);
  acts.push_back(nn::Activation::Identity);

  AnnResult result{{nn::init_mlp(sizes, acts, options.seed)}, {}};
  nn::Mlp& net = result.model.net;
  nn::AdamState adam(net, {options.learning_rate});
  std::mt19937_64 rng(options.seed ^ 0xA5A5A5A5ULL);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  nn::Vector target(out);
  double best_score = -1.0;
  nn::Mlp best = net;

  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    detail::shuffle(order, rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t stop = std::min(order.size(), start + options.batch_size);
      nn::Gradients grads = nn::Gradients::zeros_like(net);
      for (std::size_t i = start; i < stop; ++i) {
        const env::CaseRecord& c = train[order[i]];
        if (c.features.size() != in || c.n_suspects != out) {
          throw DataError(fmt::format("ann baseline: case '{}' has inconsistent shape", c.case_id));
        }
        std::fill(target.begin(), target.end(), 0.0);
        target[c.culprit_index] = 1.0;
        const nn::ForwardTrace trace = nn::forward_trace(net, c.features.values);
        const nn::LossResult l = nn::mse_loss(trace.output(), target);
        loss_sum += l.loss;
        nn::backward_accumulate(net, trace, l.grad, grads);
      }
      grads *= 1.0 / static_cast<double>(stop - start);
      adam.step(net, grads);
    }
    result.history.train_loss.push_back(loss_sum / static_cast<double>(train.size()));
    if (!nn::all_finite(net.flatten())) {
      throw NumericError(fmt::format("ann baseline: non-finite weights after epoch {}", epoch));
    }

    if (validation.empty()) {
      result.history.best_epoch = epoch;
      continue;
    }
    const double score =
        compute_metrics(evaluate_scorer([&](std::span<const double> x) { return nn::forward(net, x); },
                                        in, validation))
            .accuracy;
    result.history.validation_accuracy.push_back(score);
    if (score > best_score) {
      best_score = score;
      best = net;
      result.history.best_epoch = epoch;
    }
    if (early_stop_check(result.history.validation_accuracy, options.early_stop) == StopDecision::Stop) {
      result.history.stopped_early = true;
      break;
    }
  }
  if (!validation.empty()) net = best;
  return result;
}

}  // namespace culprit::eval
