#include "culprit/nn/adam.hpp"

#include <cmath>

#include <fmt/format.h>

#include "culprit/errors.hpp"

namespace culprit::nn {

AdamState::AdamState(const Mlp& mlp, AdamOptions options)
    : options_(options), m_(mlp.parameter_count(), 0.0), v_(mlp.parameter_count(), 0.0) {
  if (!(options.learning_rate > 0.0) || !(options.beta1 >= 0.0 && options.beta1 < 1.0) ||
      !(options.beta2 >= 0.0 && options.beta2 < 1.0) || !(options.epsilon > 0.0)) {
    throw ConfigError("invalid Adam options");
  }
}

void AdamState::step(Mlp& params, const Gradients& grads) {
  if (!grads.congruent_with(params) || params.parameter_count() != m_.size()) {
    throw ShapeError(fmt::format("adam: state tracks {} parameters, network has {}", m_.size(),
                                 params.parameter_count()));
  }
  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));

  std::size_t k = 0;
  auto update = [&](double& p, double g) {
    m_[k] = b1 * m_[k] + (1.0 - b1) * g;
    v_[k] = b2 * v_[k] + (1.0 - b2) * g * g;
    const double m_hat = m_[k] / c1;
    const double v_hat = v_[k] / c2;
    p -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    ++k;
  };
  auto layers = params.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto w = layers[i].weights.data();
    auto gw = grads.layers[i].weights.data();
    for (std::size_t j = 0; j < w.size(); ++j) update(w[j], gw[j]);
    for (std::size_t j = 0; j < layers[i].biases.size(); ++j) {
      update(layers[i].biases[j], grads.layers[i].biases[j]);
    }
  }
}

}  // namespace culprit::nn
