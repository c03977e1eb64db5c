#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace culprit::vision {

/// 8-bit grayscale image, row-major, (x, y) = (column, row).
class GrayImage {
public:
  GrayImage() = default;
  GrayImage(std::size_t width, std::size_t height, std::uint8_t fill = 0);
  GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }

  std::uint8_t at(std::size_t x, std::size_t y) const noexcept { return pixels_[y * width_ + x]; }
  std::uint8_t& at(std::size_t x, std::size_t y) noexcept { return pixels_[y * width_ + x]; }

  const std::vector<std::uint8_t>& pixels() const noexcept { return pixels_; }

  GrayImage transposed() const;
  /// Quarter turn counter-clockwise.
  GrayImage rotated90() const;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Binary PGM (P5) with maxval <= 255.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

}  // namespace culprit::vision
