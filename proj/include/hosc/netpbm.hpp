#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace hosc {

/// 8-bit-sourced raster with values in [0, 1]; channels interleaved, rows top to bottom.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<double> values;

  Image() = default;
  Image(std::size_t w, std::size_t h, std::size_t c, double fill = 0.0)
      : width(w), height(h), channels(c), values(w * h * c, fill) {}

  double& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return values[(y * width + x) * channels + c];
  }
  double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return values[(y * width + x) * channels + c];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Reads binary P5 (grayscale) or P6 (RGB) with maxval <= 255, and the
/// ASCII P2/P3 variants. Samples are divided by maxval.
Image read_netpbm(const std::filesystem::path& path);

/// Writes P5 for one channel, P6 for three. Values are clamped to [0, 1]
/// and rounded to the nearest of 256 levels.
void write_netpbm(const Image& image, const std::filesystem::path& path);

}  // namespace hosc
