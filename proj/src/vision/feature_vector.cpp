#include "culprit/vision/feature_vector.hpp"

#include <algorithm>
#include <cmath>

#include "culprit/errors.hpp"

namespace culprit::vision {

std::string_view to_string(DescriptorKind kind) noexcept {
  switch (kind) {
    case DescriptorKind::Lbp: return "LBP";
    case DescriptorKind::Hog: return "HOG";
    case DescriptorKind::Tabular: return "TABULAR";
    case DescriptorKind::Concat: return "CONCAT";
  }
  return "TABULAR";
}

FeatureVector normalize_feature(std::span<const double> values, NormMode mode,
                                DescriptorKind kind) {
  if (values.empty()) throw ShapeError("normalize_feature: empty vector");
  FeatureVector out{std::vector<double>(values.size(), 0.0), kind};
  if (mode == NormMode::L2) {
    double sq = 0.0;
    for (double v : values) sq += v * v;
    if (sq == 0.0) return out;
    const double norm = std::sqrt(sq);
    for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = values[i] / norm;
    return out;
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range == 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = (values[i] - *lo) / range;
  return out;
}

FeatureVector concat_features(std::span<const FeatureVector> parts) {
  FeatureVector out{{}, DescriptorKind::Concat};
  for (const auto& p : parts) out.values.insert(out.values.end(), p.values.begin(), p.values.end());
  return out;
}

}  // namespace culprit::vision
