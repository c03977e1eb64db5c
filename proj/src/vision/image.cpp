#include "culprit/vision/image.hpp"

#include <cctype>
#include <fstream>
#include <string>

#include <fmt/format.h>

#include "culprit/errors.hpp"

namespace culprit::vision {

GrayImage::GrayImage(std::size_t width, std::size_t height, std::uint8_t fill)
    : width_(width), height_(height), pixels_(width * height, fill) {}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (pixels_.size() != width * height) {
    throw ShapeError(fmt::format("image has {} pixels, expected {}x{}", pixels_.size(), width,
                                 height));
  }
}

GrayImage GrayImage::transposed() const {
  GrayImage out(height_, width_);
  for (std::size_t y = 0; y < height_; ++y) {
    for (std::size_t x = 0; x < width_; ++x) out.at(y, x) = at(x, y);
  }
  return out;
}

GrayImage GrayImage::rotated90() const {
  GrayImage out(height_, width_);
  for (std::size_t y = 0; y < out.height(); ++y) {
    for (std::size_t x = 0; x < out.width(); ++x) out.at(x, y) = at(width_ - 1 - y, x);
  }
  return out;
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_header_token(std::istream& is) {
  std::string tok;
  int c;
  while ((c = is.get()) != EOF) {
    if (c == '#') {
      while ((c = is.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

std::size_t parse_header_number(const std::string& tok, const std::filesystem::path& path) {
  if (tok.empty() || tok.size() > 9) throw DataError(fmt::format("{}: bad PGM header", path.string()));
  for (char ch : tok) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) {
      throw DataError(fmt::format("{}: bad PGM header value '{}'", path.string(), tok));
    }
  }
  return std::stoul(tok);
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(fmt::format("cannot open image '{}'", path.string()));
  if (next_header_token(is) != "P5") {
    throw DataError(fmt::format("{}: not a binary PGM (P5)", path.string()));
  }
  const std::size_t width = parse_header_number(next_header_token(is), path);
  const std::size_t height = parse_header_number(next_header_token(is), path);
  const std::size_t maxval = parse_header_number(next_header_token(is), path);
  if (width == 0 || height == 0 || maxval == 0 || maxval > 255) {
    throw DataError(fmt::format("{}: unsupported PGM geometry {}x{} maxval {}", path.string(),
                                width, height, maxval));
  }
  std::vector<std::uint8_t> pixels(width * height);
  is.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (static_cast<std::size_t>(is.gcount()) != pixels.size()) {
    throw DataError(fmt::format("{}: truncated pixel data", path.string()));
  }
  if (maxval != 255) {
    for (auto& p : pixels) {
      if (p > maxval) throw DataError(fmt::format("{}: pixel exceeds maxval", path.string()));
      p = static_cast<std::uint8_t>((p * 255 + maxval / 2) / maxval);
    }
  }
  return GrayImage(width, height, std::move(pixels));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  os << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  os.write(reinterpret_cast<const char*>(image.pixels().data()),
           static_cast<std::streamsize>(image.pixels().size()));
}

}  // namespace culprit::vision
