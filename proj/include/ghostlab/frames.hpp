#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ghostlab {

/// Integer pixel displacement. Positive dx moves right (increasing column),
/// positive dy moves down (increasing row).
struct Displacement {
  int dx = 0;
  int dy = 0;

  friend bool operator==(const Displacement&, const Displacement&) = default;
  Displacement operator-() const { return {-dx, -dy}; }
};

/// Width and height of a sensor or image, in pixels.
struct Extent {
  std::size_t width = 0;
  std::size_t height = 0;

  friend bool operator==(const Extent&, const Extent&) = default;
};

/// Axis-aligned rectangular pixel window. Construction validates the size
/// and origin; containment in a particular sensor is checked at use.
class Region {
public:
  Region() = default;
  Region(long x0, long y0, long width, long height);

  std::size_t x0() const { return x0_; }
  std::size_t y0() const { return y0_; }
  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t area() const { return width_ * height_; }

  double center_x() const { return static_cast<double>(x0_) + (static_cast<double>(width_) - 1.0) / 2.0; }
  double center_y() const { return static_cast<double>(y0_) + (static_cast<double>(height_) - 1.0) / 2.0; }

  bool fits_in(Extent sensor) const;
  bool contains(std::size_t x, std::size_t y) const;

  friend bool operator==(const Region&, const Region&) = default;

private:
  std::size_t x0_ = 0;
  std::size_t y0_ = 0;
  std::size_t width_ = 1;
  std::size_t height_ = 1;
};

std::string to_string(const Region& r);

/// Throws BoundsError naming `what` if the region does not fit the sensor.
void require_inside(const Region& region, Extent sensor, const std::string& what);

/// Region translated by `d`. Throws BoundsError if the result leaves `sensor`.
Region shift_region(const Region& region, Displacement d, Extent sensor);

using MetaEntries = std::vector<std::pair<std::string, std::string>>;

/// A frame-aligned sequence of 2-D intensity frames, indexed
/// (frame, row, column), stored frame-major then row-major.
class FrameStack {
public:
  FrameStack(std::size_t width, std::size_t height, std::size_t n_frames,
             std::vector<double> pixels, MetaEntries meta = {});

  /// Zero-filled stack.
  FrameStack(std::size_t width, std::size_t height, std::size_t n_frames);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t n_frames() const { return n_frames_; }
  Extent extent() const { return {width_, height_}; }
  std::size_t frame_size() const { return width_ * height_; }

  double at(std::size_t frame, std::size_t row, std::size_t col) const {
    return pixels_[(frame * height_ + row) * width_ + col];
  }
  double& at(std::size_t frame, std::size_t row, std::size_t col) {
    return pixels_[(frame * height_ + row) * width_ + col];
  }

  std::span<const double> frame(std::size_t k) const {
    return std::span<const double>(pixels_).subspan(k * frame_size(), frame_size());
  }
  std::span<double> frame(std::size_t k) {
    return std::span<double>(pixels_).subspan(k * frame_size(), frame_size());
  }

  std::span<const double> pixels() const { return pixels_; }

  const MetaEntries& meta() const { return meta_; }
  void set_meta(const std::string& key, const std::string& value);
  /// Empty string when the key is absent.
  std::string meta_value(const std::string& key) const;

  /// Multiplies every pixel by a positive factor.
  void scale(double factor);

  /// Throws PreconditionError if any pixel is negative or non-finite.
  void validate() const;

  friend bool operator==(const FrameStack&, const FrameStack&) = default;

private:
  std::size_t width_;
  std::size_t height_;
  std::size_t n_frames_;
  std::vector<double> pixels_;
  MetaEntries meta_;
};

/// Projection onto `region`: output pixel (f, r, c) equals input (f, r + y0, c + x0).
FrameStack crop(const FrameStack& stack, const Region& region);

/// Frames [first, first + count) of `stack`.
FrameStack frame_range(const FrameStack& stack, std::size_t first, std::size_t count);

/// Time series of one pixel across all frames.
std::vector<double> pixel_series(const FrameStack& stack, std::size_t x, std::size_t y);

} // namespace ghostlab
