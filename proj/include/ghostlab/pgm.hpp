#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghostlab/frames.hpp"

namespace ghostlab {

/// Greyscale raster as read from or written to a binary P5 PGM.
struct GrayImage {
  Extent extent;
  unsigned maxval = 255;
  std::vector<std::uint16_t> pixels; // row-major
};

/// P5 bytes; samples are one byte for maxval < 256, big-endian u16 otherwise.
std::string encode_pgm(const GrayImage& image);
GrayImage decode_pgm(std::string_view bytes);
GrayImage read_pgm(const std::filesystem::path& path);

/// Result of mapping real values onto PGM levels.
struct Rendering {
  GrayImage image;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> undefined; // row-major indices rendered as 0
  bool flat = false;                  // zero dynamic range, rendered at maxval / 2

  /// Text sidecar recording the normalization bounds and undefined pixels.
  std::string sidecar() const;
};

/// Min-max normalizes defined values onto [0, maxval]. Undefined pixels
/// render as 0; with zero dynamic range every defined pixel renders as
/// maxval / 2 (integer division).
Rendering render(Extent extent, std::span<const std::optional<double>> values,
                 unsigned maxval = 255);
Rendering render(Extent extent, std::span<const double> values, unsigned maxval = 255);

} // namespace ghostlab
