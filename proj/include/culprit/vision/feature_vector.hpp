#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace culprit::vision {

enum class DescriptorKind { Lbp, Hog, Tabular, Concat };

std::string_view to_string(DescriptorKind kind) noexcept;

struct FeatureVector {
  std::vector<double> values;
  DescriptorKind kind = DescriptorKind::Tabular;

  std::size_t size() const noexcept { return values.size(); }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

enum class NormMode { L2, MinMax };

/// L2: unit Euclidean norm. MinMax: rescale to [0, 1]. All-zero and
/// constant inputs map to all zeros.
FeatureVector normalize_feature(std::span<const double> values, NormMode mode,
                                DescriptorKind kind = DescriptorKind::Tabular);

/// Fuses image descriptors with tabular case features by concatenation.
FeatureVector concat_features(std::span<const FeatureVector> parts);

}  // namespace culprit::vision
