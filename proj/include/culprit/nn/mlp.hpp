#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "culprit/nn/matrix.hpp"

namespace culprit::nn {

enum class Activation { ReLU, Tanh, Identity };

std::string_view to_string(Activation a) noexcept;
Activation parse_activation(std::string_view name);

struct DenseLayer {
  Matrix weights;  // out x in
  Vector biases;   // out
  Activation activation = Activation::Identity;

  std::size_t in_dim() const noexcept { return weights.cols(); }
  std::size_t out_dim() const noexcept { return weights.rows(); }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Fully connected feed-forward network. Layers are validated for
/// dimensional compatibility on construction.
class Mlp {
public:
  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers);

  std::size_t input_dim() const noexcept { return layers_.front().in_dim(); }
  std::size_t output_dim() const noexcept { return layers_.back().out_dim(); }
  std::size_t parameter_count() const noexcept;

  std::span<const DenseLayer> layers() const noexcept { return layers_; }
  std::span<DenseLayer> layers() noexcept { return layers_; }

  /// Parameters flattened layer by layer: weights (row-major) then biases.
  Vector flatten() const;
  void assign(std::span<const double> flat);

  bool same_shape(const Mlp& other) const noexcept;

  friend bool operator==(const Mlp&, const Mlp&) = default;

private:
  std::vector<DenseLayer> layers_;
};

struct LayerGradients {
  Matrix weights;
  Vector biases;
};

/// Per-layer gradients, shape-congruent with the Mlp they were taken from.
struct Gradients {
  std::vector<LayerGradients> layers;

  static Gradients zeros_like(const Mlp& mlp);

  Gradients& operator+=(const Gradients& other);
  Gradients& operator*=(double s);

  Vector flatten() const;
  bool congruent_with(const Mlp& mlp) const noexcept;
};

/// Uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)) weights, zero biases.
Mlp init_mlp(std::span<const std::size_t> layer_sizes, std::span<const Activation> activations,
             std::uint64_t seed);

Vector forward(const Mlp& mlp, std::span<const double> input);

/// Layer inputs and outputs recorded during a forward pass.
struct ForwardTrace {
  std::vector<Vector> activations;  // activations[0] = input, activations[i+1] = layer i output

  const Vector& output() const noexcept { return activations.back(); }
};

ForwardTrace forward_trace(const Mlp& mlp, std::span<const double> input);

struct BackwardResult {
  Gradients grads;
  Vector input_grad;
};

BackwardResult backward(const Mlp& mlp, std::span<const double> input,
                        std::span<const double> output_grad);

/// Backward pass reusing a trace from `forward_trace`. Gradients are added
/// into `accum`; the input gradient is returned.
Vector backward_accumulate(const Mlp& mlp, const ForwardTrace& trace,
                           std::span<const double> output_grad, Gradients& accum);

struct LossResult {
  double loss = 0.0;
  Vector grad;
};

LossResult mse_loss(std::span<const double> pred, std::span<const double> target);

}  // namespace culprit::nn
