#pragma once

#include <cstdint>

#include "culprit/nn/mlp.hpp"

namespace culprit::nn {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam moments for one Mlp. Moments are stored flat in the same order as
/// Mlp::flatten().
class AdamState {
public:
  AdamState() = default;
  AdamState(const Mlp& mlp, AdamOptions options);

  /// One bias-corrected Adam step; mutates `params` in place.
  void step(Mlp& params, const Gradients& grads);

  std::uint64_t t() const noexcept { return t_; }
  const AdamOptions& options() const noexcept { return options_; }
  const Vector& first_moment() const noexcept { return m_; }
  const Vector& second_moment() const noexcept { return v_; }

private:
  AdamOptions options_;
  Vector m_;
  Vector v_;
  std::uint64_t t_ = 0;
};

}  // namespace culprit::nn
