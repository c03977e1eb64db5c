#include "culprit/nn/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "culprit/errors.hpp"

namespace culprit::nn {

double relative_error(double analytic, double numeric) noexcept {
  const double diff = std::abs(analytic - numeric);
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale < 1e-8) return diff;
  return diff / scale;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) throw ShapeError("gradient vectors differ in length");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, relative_error(analytic[i], numeric[i]));
  }
  return worst;
}

Vector numeric_gradient(const std::function<double(std::span<const double>)>& f, Vector point,
                        double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("finite-difference epsilon must be positive");
  Vector grad(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + epsilon;
    const double up = f(point);
    point[i] = saved - epsilon;
    const double down = f(point);
    point[i] = saved;
    grad[i] = (up - down) / (2.0 * epsilon);
  }
  return grad;
}

double finite_diff_check(const Mlp& mlp, std::span<const double> input, double epsilon,
                         std::span<const double> output_weights, const BackwardFn& backward_fn) {
  if (!(epsilon > 0.0)) throw ConfigError("finite-difference epsilon must be positive");
  Vector weights = output_weights.empty() ? Vector(mlp.output_dim(), 1.0)
                                          : Vector(output_weights.begin(), output_weights.end());
  if (weights.size() != mlp.output_dim()) throw ShapeError("output weights length mismatch");

  auto scalar = [&weights](const Vector& out) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += weights[i] * out[i];
    return s;
  };

  const BackwardResult analytic =
      backward_fn ? backward_fn(mlp, input, weights) : backward(mlp, input, weights);

  Mlp probe = mlp;
  const Vector params_numeric = numeric_gradient(
      [&](std::span<const double> flat) {
        probe.assign(flat);
        return scalar(forward(probe, input));
      },
      mlp.flatten(), epsilon);
  const Vector input_numeric = numeric_gradient(
      [&](std::span<const double> x) { return scalar(forward(mlp, x)); },
      Vector(input.begin(), input.end()), epsilon);

  return std::max(max_relative_error(analytic.grads.flatten(), params_numeric),
                  max_relative_error(analytic.input_grad, input_numeric));
}

}  // namespace culprit::nn
