#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "culprit/env/environment.hpp"
#include "culprit/eval/early_stop.hpp"
#include "culprit/nn/mlp.hpp"

namespace culprit::eval {

/// Supervised comparison model: an MLP with the actor's hidden layout and a
/// linear head, fit by MSE against one-hot culprit targets.
struct AnnOptions {
  std::vector<std::size_t> hidden = {64, 64};
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 200;
  EarlyStopSpec early_stop;  // on validation accuracy, checked every epoch
  std::uint64_t seed = 0;
};

struct AnnModel {
  nn::Mlp net;

  nn::Vector scores(std::span<const double> features) const;
  std::size_t predict(std::span<const double> features) const;
};

struct AnnHistory {
  std::vector<double> train_loss;           // mean MSE per epoch
  std::vector<double> validation_accuracy;  // per epoch, empty without a validation set
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

struct AnnResult {
  AnnModel model;
  AnnHistory history;
};

/// Mini-batch Adam over shuffled training cases. With a non-empty
/// validation set the best-scoring epoch's weights are returned.
AnnResult train_ann(std::span<const env::CaseRecord> train,
                    std::span<const env::CaseRecord> validation, const AnnOptions& options);

}  // namespace culprit::eval
