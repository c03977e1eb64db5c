#pragma once

#include <functional>
#include <span>

#include "culprit/nn/mlp.hpp"

namespace culprit::nn {

/// Relative error |a - b| / max(|a|, |b|), falling back to the absolute
/// error when both magnitudes are below 1e-8.
double relative_error(double analytic, double numeric) noexcept;

/// Worst relative error over a pair of equally sized gradient vectors.
double max_relative_error(std::span<const double> analytic, std::span<const double> numeric);

/// Central differences of a scalar function with respect to every entry of
/// `point`. `point` is restored before returning.
Vector numeric_gradient(const std::function<double(std::span<const double>)>& f, Vector point,
                        double epsilon);

using BackwardFn = std::function<BackwardResult(const Mlp&, std::span<const double>,
                                                std::span<const double>)>;

/// Compares `backward_fn` against central finite differences of the scalar
/// loss L(x) = <output_weights, mlp(x)> for every parameter and every input
/// entry. Empty `output_weights` means all ones.
double finite_diff_check(const Mlp& mlp, std::span<const double> input, double epsilon,
                         std::span<const double> output_weights = {},
                         const BackwardFn& backward_fn = {});

}  // namespace culprit::nn
