#pragma once

#include <cstddef>
#include <vector>

#include "culprit/vision/feature_vector.hpp"
#include "culprit/vision/image.hpp"

namespace culprit::vision {

// Local binary patterns over the 3x3 ring (P = 8, R = 1). Neighbour p = 0 is
// the top-left pixel and the ring is walked clockwise:
//
//   0 1 2
//   7 c 3
//   6 5 4
//
// Bit p is set when g_p >= g_c.

inline constexpr int kLbpNeighbors = 8;
inline constexpr int kLbpRadius = 1;
inline constexpr std::size_t kLbpBins = 256;

int lbp_code(const GrayImage& image, std::size_t xc, std::size_t yc, int neighbors = kLbpNeighbors,
             int radius = kLbpRadius);

struct LbpHistogram {
  int neighbors = kLbpNeighbors;
  std::vector<double> bins;  // normalized frequencies, 2^P entries
};

LbpHistogram lbp_histogram(const GrayImage& image, int neighbors = kLbpNeighbors);

struct GradientField {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> gx;
  std::vector<double> gy;

  double gx_at(std::size_t x, std::size_t y) const noexcept { return gx[y * width + x]; }
  double gy_at(std::size_t x, std::size_t y) const noexcept { return gy[y * width + x]; }
  /// Gx^2 + Gy^2, unrooted.
  double magnitude_sq(std::size_t x, std::size_t y) const noexcept;
  double magnitude(std::size_t x, std::size_t y) const noexcept;
};

/// Central differences in the interior, one-sided differences on the border.
GradientField gradients(const GrayImage& image);

struct HogDescriptor {
  std::size_t cell_size = 8;
  std::size_t n_bins = 9;
  std::size_t cells_x = 0;
  std::size_t cells_y = 0;
  std::vector<double> raw;     // magnitude-weighted votes per cell, concatenated
  std::vector<double> values;  // per-cell L2-normalized copy of raw
};

inline constexpr double kHogNormGuard = 1e-12;

/// Unsigned orientation in degrees, [0, 180).
double unsigned_orientation_deg(double gx, double gy) noexcept;

/// Histogram bin for an unsigned orientation, hard assignment.
std::size_t orientation_bin(double angle_deg, std::size_t n_bins) noexcept;

HogDescriptor hog_descriptor(const GrayImage& image, std::size_t cell_size = 8,
                             std::size_t n_bins = 9);

FeatureVector to_feature(const LbpHistogram& h);
FeatureVector to_feature(const HogDescriptor& h);

}  // namespace culprit::vision
