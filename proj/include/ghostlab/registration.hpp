#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghostlab/frames.hpp"
#include "ghostlab/moments.hpp"

namespace ghostlab {

/// Inclusive rectangle of integer displacements to search.
struct SearchWindow {
  int dx_min = 0;
  int dx_max = 0;
  int dy_min = 0;
  int dy_max = 0;

  static SearchWindow symmetric(int radius) { return {-radius, radius, -radius, radius}; }
  std::size_t columns() const { return static_cast<std::size_t>(dx_max - dx_min + 1); }
  std::size_t rows() const { return static_cast<std::size_t>(dy_max - dy_min + 1); }
  bool contains(Displacement d) const {
    return d.dx >= dx_min && d.dx <= dx_max && d.dy >= dy_min && d.dy <= dy_max;
  }
  bool on_edge(Displacement d) const {
    return d.dx == dx_min || d.dx == dx_max || d.dy == dy_min || d.dy == dy_max;
  }
  void validate() const;
};

/// Per-frame spatial correlation of two equally sized pixel sets: c2 with
/// averages taken over the pixels of a single frame.
CorrelationValue frame_spatial_c2(std::span<const double> a, std::span<const double> b);
CorrelationValue frame_spatial_c2(const FrameStack& stack_a, const Region& region_a,
                                  const FrameStack& stack_b, const Region& region_b,
                                  std::size_t frame);

/// Mean over frames of the spatial c2 between a reference region and the
/// probe region displaced by each D of the search window.
struct CorrelationMap {
  SearchWindow window;
  std::vector<std::optional<double>> values; // row-major over (dy, dx)
  std::vector<std::size_t> skipped_frames;   // frames with undefined c2, per displacement
  std::size_t n_frames = 0;

  std::optional<double> at(Displacement d) const;
  std::size_t total_skipped() const;
  /// CSV with header "dx,dy,value"; undefined values are written as "nan".
  std::string to_csv() const;
};

/// Exhaustive displacement search. All probe placements are checked against
/// the probe sensor before any work starts (BoundsError); stacks must have
/// equal frame counts (AlignmentError).
CorrelationMap correlation_map(const FrameStack& stack_ref, const Region& region_ref,
                               const FrameStack& stack_probe, const Region& region_probe_origin,
                               const SearchWindow& search, unsigned threads = 1);

struct RegistrationResult {
  Displacement d_max;
  double peak_value = 0.0;
  double fwhm_x = 0.0;
  double fwhm_y = 0.0;
  /// Euclidean distance between the anchor centre and the displaced probe centre.
  double distance = 0.0;
  /// Median of the defined map values, used as the FWHM baseline.
  double background = 0.0;
  bool on_boundary = false;
  /// A half-maximum crossing fell outside the map; FWHM is a lower bound.
  bool fwhm_truncated = false;
};

/// Peak of the map with a fully ordered tie-break: larger value, then
/// smaller |D|, then smaller dy, then smaller dx. FWHM per axis comes from
/// linear interpolation of the half-maximum crossings of the profiles
/// through the peak, with half-maximum measured above the median background.
/// Throws RegistrationError if the map has no defined value.
RegistrationResult register_peak(const CorrelationMap& map, const Region& ref_anchor,
                                 const Region& probe_origin);

struct ChainRegistration {
  RegistrationResult arm2_vs_arm1;
  RegistrationResult arm3_vs_arm2;
  Region anchor2; // arm-1 anchor mapped into arm 2
  Region anchor3; // arm-2 anchor mapped into arm 3
};

/// Registers arm 2 against arm 1 on the object-free anchor, then arm 3
/// against the registered arm-2 anchor.
ChainRegistration chain_register(const FrameStack& arm1, const FrameStack& arm2,
                                 const FrameStack& arm3, const Region& anchor1,
                                 const SearchWindow& search12, const SearchWindow& search23,
                                 unsigned threads = 1);

} // namespace ghostlab
