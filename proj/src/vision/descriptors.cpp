#include "culprit/vision/descriptors.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "culprit/errors.hpp"

namespace culprit::vision {

namespace {

// Clockwise from the top-left neighbour.
constexpr std::array<std::array<int, 2>, 8> kRing{{
    {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0},
}};

void require_min_size(const GrayImage& image, const char* op) {
  if (image.width() < 3 || image.height() < 3) {
    throw ShapeError(fmt::format("{}: image {}x{} is smaller than 3x3", op, image.width(),
                                 image.height()));
  }
}

// Unchecked ring code for interior pixels.
int ring_code(const GrayImage& image, std::size_t xc, std::size_t yc) noexcept {
  const int center = image.at(xc, yc);
  int code = 0;
  for (std::size_t p = 0; p < kRing.size(); ++p) {
    const auto x = static_cast<std::size_t>(static_cast<long>(xc) + kRing[p][0]);
    const auto y = static_cast<std::size_t>(static_cast<long>(yc) + kRing[p][1]);
    if (image.at(x, y) >= center) code |= 1 << p;
  }
  return code;
}

}  // namespace

int lbp_code(const GrayImage& image, std::size_t xc, std::size_t yc, int neighbors, int radius) {
  if (neighbors != kLbpNeighbors || radius != kLbpRadius) {
    throw ConfigError(fmt::format("lbp: only P=8, R=1 is supported (got P={}, R={})", neighbors,
                                  radius));
  }
  if (xc < 1 || yc < 1 || xc + 1 >= image.width() || yc + 1 >= image.height()) {
    throw OutOfBoundsError(fmt::format("lbp: pixel ({}, {}) has no full 3x3 ring in a {}x{} image",
                                       xc, yc, image.width(), image.height()));
  }
  return ring_code(image, xc, yc);
}

LbpHistogram lbp_histogram(const GrayImage& image, int neighbors) {
  if (neighbors != kLbpNeighbors) {
    throw ConfigError(fmt::format("lbp: only P=8 is supported (got {})", neighbors));
  }
  require_min_size(image, "lbp_histogram");
  LbpHistogram h;
  h.neighbors = neighbors;
  h.bins.assign(kLbpBins, 0.0);
  std::vector<std::size_t> counts(kLbpBins, 0);
  for (std::size_t y = 1; y + 1 < image.height(); ++y) {
    for (std::size_t x = 1; x + 1 < image.width(); ++x) ++counts[ring_code(image, x, y)];
  }
  const double total = static_cast<double>((image.width() - 2) * (image.height() - 2));
  for (std::size_t b = 0; b < kLbpBins; ++b) h.bins[b] = static_cast<double>(counts[b]) / total;
  return h;
}

double GradientField::magnitude_sq(std::size_t x, std::size_t y) const noexcept {
  const double a = gx_at(x, y);
  const double b = gy_at(x, y);
  return a * a + b * b;
}

double GradientField::magnitude(std::size_t x, std::size_t y) const noexcept {
  return std::sqrt(magnitude_sq(x, y));
}

GradientField gradients(const GrayImage& image) {
  require_min_size(image, "gradients");
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  GradientField f{w, h, std::vector<double>(w * h), std::vector<double>(w * h)};
  auto px = [&](std::size_t x, std::size_t y) { return static_cast<double>(image.at(x, y)); };
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double gx;
      if (x == 0) {
        gx = px(1, y) - px(0, y);
      } else if (x == w - 1) {
        gx = px(w - 1, y) - px(w - 2, y);
      } else {
        gx = px(x + 1, y) - px(x - 1, y);
      }
      double gy;
      if (y == 0) {
        gy = px(x, 1) - px(x, 0);
      } else if (y == h - 1) {
        gy = px(x, h - 1) - px(x, h - 2);
      } else {
        gy = px(x, y + 1) - px(x, y - 1);
      }
      f.gx[y * w + x] = gx;
      f.gy[y * w + x] = gy;
    }
  }
  return f;
}

double unsigned_orientation_deg(double gx, double gy) noexcept {
  double deg = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 180.0;
  if (deg >= 180.0) deg -= 180.0;
  return deg;
}

std::size_t orientation_bin(double angle_deg, std::size_t n_bins) noexcept {
  const double width = 180.0 / static_cast<double>(n_bins);
  auto bin = static_cast<std::size_t>(angle_deg / width);
  return bin < n_bins ? bin : n_bins - 1;
}

HogDescriptor hog_descriptor(const GrayImage& image, std::size_t cell_size, std::size_t n_bins) {
  if (cell_size == 0 || n_bins == 0) throw ConfigError("hog: cell size and bin count must be positive");
  if (image.width() < cell_size || image.height() < cell_size) {
    throw ShapeError(fmt::format("hog: image {}x{} is smaller than one {}x{} cell", image.width(),
                                 image.height(), cell_size, cell_size));
  }
  const GradientField field = gradients(image);

  HogDescriptor d;
  d.cell_size = cell_size;
  d.n_bins = n_bins;
  d.cells_x = image.width() / cell_size;
  d.cells_y = image.height() / cell_size;
  d.raw.assign(d.cells_x * d.cells_y * n_bins, 0.0);

  for (std::size_t cy = 0; cy < d.cells_y; ++cy) {
    for (std::size_t cx = 0; cx < d.cells_x; ++cx) {
      double* hist = d.raw.data() + (cy * d.cells_x + cx) * n_bins;
      for (std::size_t y = cy * cell_size; y < (cy + 1) * cell_size; ++y) {
        for (std::size_t x = cx * cell_size; x < (cx + 1) * cell_size; ++x) {
          const double mag = field.magnitude(x, y);
          if (mag == 0.0) continue;
          hist[orientation_bin(unsigned_orientation_deg(field.gx_at(x, y), field.gy_at(x, y)),
                               n_bins)] += mag;
        }
      }
    }
  }

  d.values = d.raw;
  for (std::size_t c = 0; c < d.cells_x * d.cells_y; ++c) {
    double* hist = d.values.data() + c * n_bins;
    double sq = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) sq += hist[b] * hist[b];
    const double norm = std::sqrt(sq) + kHogNormGuard;
    for (std::size_t b = 0; b < n_bins; ++b) hist[b] /= norm;
  }
  return d;
}

FeatureVector to_feature(const LbpHistogram& h) { return {h.bins, DescriptorKind::Lbp}; }

FeatureVector to_feature(const HogDescriptor& h) { return {h.values, DescriptorKind::Hog}; }

}  // namespace culprit::vision
