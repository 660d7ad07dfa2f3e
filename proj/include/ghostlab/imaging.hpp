#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ghostlab/frames.hpp"
#include "ghostlab/moments.hpp"

namespace ghostlab {

/// Per-frame integrated intensity of the test-arm region.
struct BucketSeries {
  std::vector<double> values;
  Region region;
  std::size_t n_frames() const { return values.size(); }
};

BucketSeries bucket(const FrameStack& stack, const Region& region);

/// Map of correlation coefficients over the reference-region pixels.
struct GhostImage {
  int order = 2;
  Extent extent;
  std::vector<std::optional<double>> values; // row-major
  std::size_t n_frames = 0;
  MetaEntries provenance;

  std::optional<double> at(std::size_t x, std::size_t y) const {
    return values[y * extent.width + x];
  }
  std::size_t undefined_count() const;

  /// CSV with header "x,y,value"; undefined pixels are written as "nan".
  std::string to_csv() const;
  /// Inverse of to_csv(); order and provenance are left default.
  static GhostImage from_csv(std::string_view csv);
};

/// Second-order ghost image: c2(bucket, I_ref(x)) over the frames, for
/// every pixel x of ref_region.
GhostImage ghost2(const BucketSeries& bucket, const FrameStack& ref_stack, const Region& ref_region,
                  unsigned threads = 1);

/// Third-order ghost image on the registered diagonal: for each pixel x,
/// c3(bucket, I_2(x in region 2), I_3(x in region 3)).
GhostImage ghost3(const BucketSeries& bucket, const FrameStack& ref2_stack, const Region& ref2_region,
                  const FrameStack& ref3_stack, const Region& ref3_region, unsigned threads = 1);

struct VisibilityReport {
  int order = 2;
  double v = 0.0;
  double v_stderr = 0.0;
  Region region_back;
  Region region_obj;
  double cj_back = 0.0;
  double cj_obj = 0.0;
  std::size_t n_back = 0;
  std::size_t n_obj = 0;

  std::string to_text() const;
  std::string to_csv() const;
};

/// V = (c_back - c_obj) / (c_back + c_obj) from the means of the defined
/// pixels of each region. The standard error is propagated to first order
/// from the standard errors of the two region means. Throws MetricError if
/// a region holds no defined pixel or the denominator vanishes.
VisibilityReport visibility(const GhostImage& image, const Region& region_back,
                            const Region& region_obj);

} // namespace ghostlab
