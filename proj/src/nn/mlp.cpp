#include "culprit/nn/mlp.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "culprit/errors.hpp"

namespace culprit::nn {

namespace {

double activate(Activation a, double z) noexcept {
  switch (a) {
    case Activation::ReLU: return z > 0.0 ? z : 0.0;
    case Activation::Tanh: return std::tanh(z);
    case Activation::Identity: return z;
  }
  return z;
}

// Derivative expressed through the activation output y.
double activate_grad(Activation a, double y) noexcept {
  switch (a) {
    case Activation::ReLU: return y > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: return 1.0 - y * y;
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

}  // namespace

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  throw ConfigError(fmt::format("unknown activation '{}'", name));
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("an Mlp needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.biases.size() != l.out_dim()) {
      throw ShapeError(fmt::format("layer {}: {} biases for {} outputs", i, l.biases.size(),
                                   l.out_dim()));
    }
    if (l.in_dim() == 0 || l.out_dim() == 0) {
      throw ShapeError(fmt::format("layer {} has a zero dimension", i));
    }
    if (i > 0 && l.in_dim() != layers_[i - 1].out_dim()) {
      throw ShapeError(fmt::format("layer {} expects {} inputs but layer {} emits {}", i,
                                   l.in_dim(), i - 1, layers_[i - 1].out_dim()));
    }
  }
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.biases.size();
  return n;
}

Vector Mlp::flatten() const {
  Vector flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.weights.data().begin(), l.weights.data().end());
    flat.insert(flat.end(), l.biases.begin(), l.biases.end());
  }
  return flat;
}

void Mlp::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw ShapeError(fmt::format("assign: {} values for {} parameters", flat.size(),
                                 parameter_count()));
  }
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (double& w : l.weights.data()) w = flat[k++];
    for (double& b : l.biases) b = flat[k++];
  }
}

bool Mlp::same_shape(const Mlp& other) const noexcept {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (!layers_[i].weights.same_shape(other.layers_[i].weights)) return false;
  }
  return true;
}

Gradients Gradients::zeros_like(const Mlp& mlp) {
  Gradients g;
  g.layers.reserve(mlp.layers().size());
  for (const auto& l : mlp.layers()) {
    g.layers.push_back({Matrix(l.out_dim(), l.in_dim()), Vector(l.out_dim(), 0.0)});
  }
  return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  if (other.layers.size() != layers.size()) throw ShapeError("gradient layer count mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto dst = layers[i].weights.data();
    auto src = other.layers[i].weights.data();
    if (dst.size() != src.size() || layers[i].biases.size() != other.layers[i].biases.size()) {
      throw ShapeError("gradient shape mismatch");
    }
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    for (std::size_t k = 0; k < layers[i].biases.size(); ++k) {
      layers[i].biases[k] += other.layers[i].biases[k];
    }
  }
  return *this;
}

Gradients& Gradients::operator*=(double s) {
  for (auto& l : layers) {
    for (double& w : l.weights.data()) w *= s;
    for (double& b : l.biases) b *= s;
  }
  return *this;
}

Vector Gradients::flatten() const {
  Vector flat;
  for (const auto& l : layers) {
    flat.insert(flat.end(), l.weights.data().begin(), l.weights.data().end());
    flat.insert(flat.end(), l.biases.begin(), l.biases.end());
  }
  return flat;
}

bool Gradients::congruent_with(const Mlp& mlp) const noexcept {
  if (layers.size() != mlp.layers().size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!layers[i].weights.same_shape(mlp.layers()[i].weights)) return false;
    if (layers[i].biases.size() != mlp.layers()[i].biases.size()) return false;
  }
  return true;
}

Mlp init_mlp(std::span<const std::size_t> layer_sizes, std::span<const Activation> activations,
             std::uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw ConfigError(fmt::format("init_mlp needs at least 2 layer sizes, got {}",
                                  layer_sizes.size()));
  }
  if (activations.size() != layer_sizes.size() - 1) {
    throw ConfigError(fmt::format("init_mlp: {} activations for {} layer transitions",
                                  activations.size(), layer_sizes.size() - 1));
  }
  std::mt19937_64 rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    const std::size_t in = layer_sizes[i];
    const std::size_t out = layer_sizes[i + 1];
    if (in == 0 || out == 0) throw ConfigError("layer sizes must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(out, in);
    for (double& v : w.data()) v = dist(rng);
    layers.push_back({std::move(w), Vector(out, 0.0), activations[i]});
  }
  return Mlp(std::move(layers));
}

ForwardTrace forward_trace(const Mlp& mlp, std::span<const double> input) {
  if (input.size() != mlp.input_dim()) {
    throw ShapeError(fmt::format("forward: input has {} entries, network expects {}",
                                 input.size(), mlp.input_dim()));
  }
  ForwardTrace trace;
  trace.activations.reserve(mlp.layers().size() + 1);
  trace.activations.emplace_back(input.begin(), input.end());
  for (const auto& layer : mlp.layers()) {
    Vector z = affine(layer.weights, trace.activations.back(), layer.biases);
    for (double& v : z) v = activate(layer.activation, v);
    trace.activations.push_back(std::move(z));
  }
  return trace;
}

Vector forward(const Mlp& mlp, std::span<const double> input) {
  return std::move(forward_trace(mlp, input).activations.back());
}

Vector backward_accumulate(const Mlp& mlp, const ForwardTrace& trace,
                           std::span<const double> output_grad, Gradients& accum) {
  const auto layers = mlp.layers();
  if (output_grad.size() != mlp.output_dim()) {
    throw ShapeError(fmt::format("backward: output gradient has {} entries, network emits {}",
                                 output_grad.size(), mlp.output_dim()));
  }
  if (trace.activations.size() != layers.size() + 1) {
    throw ShapeError("backward: trace does not match network depth");
  }
  if (!accum.congruent_with(mlp)) throw ShapeError("backward: gradient accumulator shape");

  Vector upstream(output_grad.begin(), output_grad.end());
  for (std::size_t i = layers.size(); i-- > 0;) {
    const auto& layer = layers[i];
    const Vector& out = trace.activations[i + 1];
    const Vector& in = trace.activations[i];
    Vector delta(upstream.size());
    for (std::size_t r = 0; r < delta.size(); ++r) {
      delta[r] = upstream[r] * activate_grad(layer.activation, out[r]);
    }
    auto& g = accum.layers[i];
    for (std::size_t r = 0; r < delta.size(); ++r) {
      const double d = delta[r];
      g.biases[r] += d;
      if (d == 0.0) continue;
      auto gw = g.weights.row(r);
      for (std::size_t c = 0; c < in.size(); ++c) gw[c] += d * in[c];
    }
    upstream = transpose_times(layer.weights, delta);
  }
  return upstream;
}

BackwardResult backward(const Mlp& mlp, std::span<const double> input,
                        std::span<const double> output_grad) {
  const ForwardTrace trace = forward_trace(mlp, input);
  BackwardResult result{Gradients::zeros_like(mlp), {}};
  result.input_grad = backward_accumulate(mlp, trace, output_grad, result.grads);
  return result;
}

LossResult mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw ShapeError(fmt::format("mse_loss: prediction has {} entries, target {}", pred.size(),
                                 target.size()));
  }
  if (pred.empty()) throw ShapeError("mse_loss: empty input");
  const double n = static_cast<double>(pred.size());
  LossResult out{0.0, Vector(pred.size())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    out.loss += d * d;
    out.grad[i] = 2.0 * d / n;
  }
  out.loss /= n;
  return out;
}

}  // namespace culprit::nn
