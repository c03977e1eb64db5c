#include "culprit/nn/matrix.hpp"

#include <cmath>

#include <fmt/format.h>

#include "culprit/errors.hpp"

namespace culprit::nn {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError(fmt::format("matrix data has {} entries, expected {}x{}", data_.size(),
                                 rows, cols));
  }
}

Vector affine(const Matrix& weights, std::span<const double> x, std::span<const double> bias) {
  if (x.size() != weights.cols() || bias.size() != weights.rows()) {
    throw ShapeError(fmt::format("affine: weights {}x{}, input {}, bias {}", weights.rows(),
                                 weights.cols(), x.size(), bias.size()));
  }
  Vector y(bias.begin(), bias.end());
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    auto w = weights.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) acc += w[c] * x[c];
    y[r] += acc;
  }
  return y;
}

Vector transpose_times(const Matrix& weights, std::span<const double> g) {
  if (g.size() != weights.rows()) {
    throw ShapeError(fmt::format("transpose_times: weights {}x{}, vector {}", weights.rows(),
                                 weights.cols(), g.size()));
  }
  Vector out(weights.cols(), 0.0);
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    auto w = weights.row(r);
    for (std::size_t c = 0; c < w.size(); ++c) out[c] += w[c] * gr;
  }
  return out;
}

bool all_finite(std::span<const double> values) noexcept {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace culprit::nn
