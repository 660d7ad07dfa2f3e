#include "ghostlab/frames.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ghostlab/error.hpp"

namespace ghostlab {

Region::Region(long x0, long y0, long width, long height) {
  if (width < 1 || height < 1)
    throw PreconditionError("region size must be at least 1x1, got " + std::to_string(width) +
                            "x" + std::to_string(height));
  if (x0 < 0 || y0 < 0)
    throw BoundsError("region origin must be non-negative, got (" + std::to_string(x0) + ", " +
                      std::to_string(y0) + ")");
  x0_ = static_cast<std::size_t>(x0);
  y0_ = static_cast<std::size_t>(y0);
  width_ = static_cast<std::size_t>(width);
  height_ = static_cast<std::size_t>(height);
}

bool Region::fits_in(Extent sensor) const {
  return x0_ + width_ <= sensor.width && y0_ + height_ <= sensor.height;
}

bool Region::contains(std::size_t x, std::size_t y) const {
  return x >= x0_ && x < x0_ + width_ && y >= y0_ && y < y0_ + height_;
}

std::string to_string(const Region& r) {
  std::ostringstream os;
  os << r.x0() << "," << r.y0() << "," << r.width() << "," << r.height();
  return os.str();
}

void require_inside(const Region& region, Extent sensor, const std::string& what) {
  if (!region.fits_in(sensor))
    throw BoundsError(what + " region (" + to_string(region) + ") exceeds sensor " +
                      std::to_string(sensor.width) + "x" + std::to_string(sensor.height));
}

Region shift_region(const Region& region, Displacement d, Extent sensor) {
  const long x = static_cast<long>(region.x0()) + d.dx;
  const long y = static_cast<long>(region.y0()) + d.dy;
  const long w = static_cast<long>(region.width());
  const long h = static_cast<long>(region.height());
  if (x < 0 || y < 0 || x + w > static_cast<long>(sensor.width) ||
      y + h > static_cast<long>(sensor.height)) {
    throw BoundsError("region (" + to_string(region) + ") shifted by (" + std::to_string(d.dx) +
                      ", " + std::to_string(d.dy) + ") leaves sensor " +
                      std::to_string(sensor.width) + "x" + std::to_string(sensor.height));
  }
  return Region(x, y, w, h);
}

FrameStack::FrameStack(std::size_t width, std::size_t height, std::size_t n_frames,
                       std::vector<double> pixels, MetaEntries meta)
    : width_(width), height_(height), n_frames_(n_frames), pixels_(std::move(pixels)),
      meta_(std::move(meta)) {
  if (width_ == 0 || height_ == 0 || n_frames_ == 0)
    throw PreconditionError("frame stack dimensions must be non-zero, got " +
                            std::to_string(width_) + "x" + std::to_string(height_) + "x" +
                            std::to_string(n_frames_));
  if (pixels_.size() != width_ * height_ * n_frames_)
    throw PreconditionError("frame stack holds " + std::to_string(pixels_.size()) +
                            " pixels, expected " + std::to_string(width_ * height_ * n_frames_));
  validate();
}

FrameStack::FrameStack(std::size_t width, std::size_t height, std::size_t n_frames)
    : FrameStack(width, height, n_frames, std::vector<double>(width * height * n_frames, 0.0)) {}

void FrameStack::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : meta_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  meta_.emplace_back(key, value);
}

std::string FrameStack::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta_)
    if (k == key) return v;
  return {};
}

void FrameStack::scale(double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw PreconditionError("scale factor must be positive and finite");
  for (double& p : pixels_) p *= factor;
}

void FrameStack::validate() const {
  for (std::size_t i = 0; i < pixels_.size(); ++i) {
    if (!(pixels_[i] >= 0.0) || !std::isfinite(pixels_[i])) {
      const std::size_t f = i / frame_size();
      const std::size_t rem = i % frame_size();
      throw PreconditionError("negative or non-finite intensity at frame " + std::to_string(f) +
                              ", row " + std::to_string(rem / width_) + ", column " +
                              std::to_string(rem % width_));
    }
  }
}

FrameStack crop(const FrameStack& stack, const Region& region) {
  require_inside(region, stack.extent(), "crop");
  std::vector<double> out;
  out.reserve(region.area() * stack.n_frames());
  for (std::size_t f = 0; f < stack.n_frames(); ++f) {
    for (std::size_t r = 0; r < region.height(); ++r) {
      const auto row = stack.frame(f).subspan((r + region.y0()) * stack.width() + region.x0(),
                                              region.width());
      out.insert(out.end(), row.begin(), row.end());
    }
  }
  return FrameStack(region.width(), region.height(), stack.n_frames(), std::move(out),
                    stack.meta());
}

FrameStack frame_range(const FrameStack& stack, std::size_t first, std::size_t count) {
  if (count == 0 || first + count > stack.n_frames())
    throw RangeError("frame range [" + std::to_string(first) + ", " +
                     std::to_string(first + count) + ") outside stack of " +
                     std::to_string(stack.n_frames()) + " frames");
  const auto src = stack.pixels().subspan(first * stack.frame_size(), count * stack.frame_size());
  return FrameStack(stack.width(), stack.height(), count, std::vector<double>(src.begin(), src.end()),
                    stack.meta());
}

std::vector<double> pixel_series(const FrameStack& stack, std::size_t x, std::size_t y) {
  if (x >= stack.width() || y >= stack.height())
    throw BoundsError("pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                      ") outside sensor");
  std::vector<double> series(stack.n_frames());
  for (std::size_t f = 0; f < stack.n_frames(); ++f) series[f] = stack.at(f, y, x);
  return series;
}

} // namespace ghostlab
