#pragma once

// Naive reference implementations used only by tests. They share no code
// with the library paths they check.

#include <cmath>
#include <cstdint>
#include <vector>

#include "culprit/vision/image.hpp"

namespace culprit::oracle {

/// LBP histogram by explicit 3x3 patch reads. Weights follow the clockwise
/// ring starting at the top-left neighbour.
inline std::vector<double> naive_lbp_histogram(const vision::GrayImage& img) {
  // weight[row][col] of the 3x3 patch; the centre has no weight.
  const int weight[3][3] = {{1, 2, 4}, {128, 0, 8}, {64, 32, 16}};
  std::vector<long> counts(256, 0);
  long total = 0;
  for (std::size_t y = 1; y + 1 < img.height(); ++y) {
    for (std::size_t x = 1; x + 1 < img.width(); ++x) {
      int code = 0;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          if (r == 1 && c == 1) continue;
          if (img.at(x + c - 1, y + r - 1) >= img.at(x, y)) code += weight[r][c];
        }
      }
      ++counts[code];
      ++total;
    }
  }
  std::vector<double> h(256);
  for (int b = 0; b < 256; ++b) h[b] = static_cast<double>(counts[b]) / static_cast<double>(total);
  return h;
}

/// HOG reference: gradients with clamped neighbour indices (which reproduces
/// one-sided differences at the border), orientation from atan2 folded into
/// [0, 180), bin found by linear scan over bin edges.
inline std::vector<double> naive_hog(const vision::GrayImage& img, std::size_t cell,
                                     std::size_t bins, std::vector<double>* raw_out = nullptr) {
  const long w = static_cast<long>(img.width());
  const long h = static_cast<long>(img.height());
  auto I = [&](long x, long y) { return static_cast<double>(img.at(x, y)); };
  auto gradient = [&](long x, long y, double& gx, double& gy) {
    const long xl = x > 0 ? x - 1 : 0, xr = x < w - 1 ? x + 1 : w - 1;
    const long yu = y > 0 ? y - 1 : 0, yd = y < h - 1 ? y + 1 : h - 1;
    gx = I(xr, y) - I(xl, y);
    gy = I(x, yd) - I(x, yu);
  };
  const std::size_t ncx = img.width() / cell, ncy = img.height() / cell;
  std::vector<double> raw(ncx * ncy * bins, 0.0);
  const double pi = std::acos(-1.0);
  for (std::size_t cy = 0; cy < ncy; ++cy) {
    for (std::size_t cx = 0; cx < ncx; ++cx) {
      for (std::size_t dy = 0; dy < cell; ++dy) {
        for (std::size_t dx = 0; dx < cell; ++dx) {
          double gx, gy;
          gradient(static_cast<long>(cx * cell + dx), static_cast<long>(cy * cell + dy), gx, gy);
          const double mag = std::sqrt(gx * gx + gy * gy);
          if (mag == 0.0) continue;
          double angle = std::atan2(gy, gx) * 180.0 / pi;
          while (angle < 0.0) angle += 180.0;
          while (angle >= 180.0) angle -= 180.0;
          std::size_t b = bins - 1;
          for (std::size_t k = 0; k < bins; ++k) {
            const double upper = 180.0 * static_cast<double>(k + 1) / static_cast<double>(bins);
            if (angle < upper) {
              b = k;
              break;
            }
          }
          raw[(cy * ncx + cx) * bins + b] += mag;
        }
      }
    }
  }
  if (raw_out) *raw_out = raw;
  std::vector<double> out = raw;
  for (std::size_t c = 0; c < ncx * ncy; ++c) {
    double s = 0.0;
    for (std::size_t k = 0; k < bins; ++k) s += out[c * bins + k] * out[c * bins + k];
    const double n = std::sqrt(s) + 1e-12;
    for (std::size_t k = 0; k < bins; ++k) out[c * bins + k] /= n;
  }
  return out;
}

}  // namespace culprit::oracle

#include "culprit/env/environment.hpp"

namespace culprit::oracle {

/// Nearest-centroid classifier: centroids fitted on `train`, accuracy
/// measured on `test`. Squared Euclidean distance, ties to the lower class.
inline double nearest_centroid_accuracy(const std::vector<env::CaseRecord>& train,
                                        const std::vector<env::CaseRecord>& test) {
  const std::size_t k = train.front().n_suspects;
  const std::size_t d = train.front().features.size();
  std::vector<std::vector<double>> centroid(k, std::vector<double>(d, 0.0));
  std::vector<double> count(k, 0.0);
  for (const auto& c : train) {
    for (std::size_t j = 0; j < d; ++j) centroid[c.culprit_index][j] += c.features.values[j];
    count[c.culprit_index] += 1.0;
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (double& v : centroid[i]) v = count[i] > 0 ? v / count[i] : 0.0;
  }
  std::size_t correct = 0;
  for (const auto& c : test) {
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t i = 0; i < k; ++i) {
      if (count[i] == 0) continue;
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = c.features.values[j] - centroid[i][j];
        s += diff * diff;
      }
      if (s < best_d) {
        best_d = s;
        best = i;
      }
    }
    if (best == c.culprit_index) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace culprit::oracle
