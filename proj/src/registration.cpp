#include "ghostlab/registration.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "ghostlab/error.hpp"
#include "ghostlab/parallel.hpp"

namespace ghostlab {

void SearchWindow::validate() const {
  if (dx_min > dx_max || dy_min > dy_max) throw UsageError("search window bounds are inverted");
}

namespace {

// Rectangular pixel window addressed row by row.
struct View {
  const double* base;
  std::size_t stride;
  std::size_t width;
  std::size_t height;
  std::size_t size() const { return width * height; }
  const double* row(std::size_t r) const { return base + r * stride; }
};

View view_of(const FrameStack& stack, const Region& region, std::size_t frame) {
  return {stack.frame(frame).data() + region.y0() * stack.width() + region.x0(), stack.width(),
          region.width(), region.height()};
}

double view_mean(const View& v) {
  double sum = 0.0;
  for (std::size_t r = 0; r < v.height; ++r) {
    const double* p = v.row(r);
    for (std::size_t c = 0; c < v.width; ++c) sum += p[c];
  }
  return sum / static_cast<double>(v.size());
}

// Reference pixels with their frame mean removed, plus their variance.
struct Centered {
  std::vector<double> dev;
  double var = 0.0;
};

Centered center(const View& v) {
  Centered out;
  out.dev.reserve(v.size());
  const double mean = view_mean(v);
  double ss = 0.0;
  for (std::size_t r = 0; r < v.height; ++r) {
    const double* p = v.row(r);
    for (std::size_t c = 0; c < v.width; ++c) {
      const double d = p[c] - mean;
      out.dev.push_back(d);
      ss += d * d;
    }
  }
  out.var = ss / static_cast<double>(v.size());
  return out;
}

// Two-pass spatial c2 of a centred reference against a probe window.
CorrelationValue spatial_c2(const Centered& a, const View& b) {
  const std::size_t n = b.size();
  CorrelationValue out{std::nullopt, n};
  if (n < 2) return out;
  const double mean_b = view_mean(b);
  double ss = 0.0, cross = 0.0;
  const double* da = a.dev.data();
  for (std::size_t r = 0; r < b.height; ++r) {
    const double* p = b.row(r);
    for (std::size_t c = 0; c < b.width; ++c) {
      const double d = p[c] - mean_b;
      ss += d * d;
      cross += da[c] * d;
    }
    da += b.width;
  }
  const double var_b = ss / static_cast<double>(n);
  if (a.var <= 0.0 || var_b <= 0.0) return out;
  out.value = (cross / static_cast<double>(n)) / std::sqrt(a.var * var_b);
  return out;
}

} // namespace

CorrelationValue frame_spatial_c2(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw AlignmentError("spatial c2 needs equal pixel counts (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  if (a.size() < 2) return {std::nullopt, a.size()};
  return spatial_c2(center(View{a.data(), a.size(), a.size(), 1}), View{b.data(), b.size(), b.size(), 1});
}

CorrelationValue frame_spatial_c2(const FrameStack& stack_a, const Region& region_a,
                                  const FrameStack& stack_b, const Region& region_b,
                                  std::size_t frame) {
  require_inside(region_a, stack_a.extent(), "first");
  require_inside(region_b, stack_b.extent(), "second");
  if (region_a.width() != region_b.width() || region_a.height() != region_b.height())
    throw AlignmentError("spatial c2 regions differ in size");
  if (frame >= stack_a.n_frames() || frame >= stack_b.n_frames())
    throw RangeError("frame index " + std::to_string(frame) + " out of range");
  const std::size_t n = region_a.area();
  if (n < 2) return {std::nullopt, n};
  return spatial_c2(center(view_of(stack_a, region_a, frame)), view_of(stack_b, region_b, frame));
}

std::optional<double> CorrelationMap::at(Displacement d) const {
  if (!window.contains(d)) return std::nullopt;
  return values[static_cast<std::size_t>(d.dy - window.dy_min) * window.columns() +
                static_cast<std::size_t>(d.dx - window.dx_min)];
}

std::size_t CorrelationMap::total_skipped() const {
  std::size_t total = 0;
  for (const auto s : skipped_frames) total += s;
  return total;
}

std::string CorrelationMap::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "dx,dy,value\n";
  for (int dy = window.dy_min; dy <= window.dy_max; ++dy) {
    for (int dx = window.dx_min; dx <= window.dx_max; ++dx) {
      const auto v = at({dx, dy});
      os << dx << "," << dy << ",";
      if (v) os << *v;
      else os << "nan";
      os << "\n";
    }
  }
  return os.str();
}

CorrelationMap correlation_map(const FrameStack& stack_ref, const Region& region_ref,
                               const FrameStack& stack_probe, const Region& region_probe_origin,
                               const SearchWindow& search, unsigned threads) {
  search.validate();
  require_inside(region_ref, stack_ref.extent(), "reference");
  if (region_ref.width() != region_probe_origin.width() ||
      region_ref.height() != region_probe_origin.height())
    throw AlignmentError("reference and probe regions differ in size");
  if (stack_ref.n_frames() != stack_probe.n_frames())
    throw AlignmentError("reference has " + std::to_string(stack_ref.n_frames()) +
                         " frames, probe has " + std::to_string(stack_probe.n_frames()));
  // The window is a rectangle, so its two extreme corners bound every placement.
  shift_region(region_probe_origin, {search.dx_min, search.dy_min}, stack_probe.extent());
  shift_region(region_probe_origin, {search.dx_max, search.dy_max}, stack_probe.extent());

  const std::size_t n_frames = stack_ref.n_frames();
  std::vector<Centered> refs(n_frames);
  for (std::size_t k = 0; k < n_frames; ++k) refs[k] = center(view_of(stack_ref, region_ref, k));

  CorrelationMap map;
  map.window = search;
  map.n_frames = n_frames;
  const std::size_t cells = search.columns() * search.rows();
  map.values.assign(cells, std::nullopt);
  map.skipped_frames.assign(cells, 0);

  parallel_for(cells, threads, [&](std::size_t cell) {
    const Displacement d{search.dx_min + static_cast<int>(cell % search.columns()),
                         search.dy_min + static_cast<int>(cell / search.columns())};
    const Region probe = shift_region(region_probe_origin, d, stack_probe.extent());
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < n_frames; ++k) {
      const auto v = spatial_c2(refs[k], view_of(stack_probe, probe, k));
      if (v.value) {
        sum += *v.value;
        ++used;
      }
    }
    map.skipped_frames[cell] = n_frames - used;
    if (used > 0) map.values[cell] = sum / static_cast<double>(used);
  });
  return map;
}

namespace {

// Half-width of the peak along one direction, walking outwards in unit steps.
double half_width(const CorrelationMap& map, Displacement peak, int step_x, int step_y,
                  double peak_value, double level, bool& truncated) {
  double prev = peak_value;
  for (int s = 1;; ++s) {
    const Displacement d{peak.dx + s * step_x, peak.dy + s * step_y};
    const auto v = map.at(d);
    if (!v) {
      truncated = true;
      return static_cast<double>(s - 1) + 0.5;
    }
    if (*v < level) return static_cast<double>(s - 1) + (prev - level) / (prev - *v);
    prev = *v;
  }
}

} // namespace

RegistrationResult register_peak(const CorrelationMap& map, const Region& ref_anchor,
                                 const Region& probe_origin) {
  std::optional<Displacement> best;
  double best_value = 0.0;
  std::vector<double> defined;
  for (int dy = map.window.dy_min; dy <= map.window.dy_max; ++dy) {
    for (int dx = map.window.dx_min; dx <= map.window.dx_max; ++dx) {
      const auto v = map.at({dx, dy});
      if (!v) continue;
      defined.push_back(*v);
      const Displacement d{dx, dy};
      bool better = !best || *v > best_value;
      if (best && *v == best_value) {
        const long r_new = static_cast<long>(dx) * dx + static_cast<long>(dy) * dy;
        const long r_old = static_cast<long>(best->dx) * best->dx +
                           static_cast<long>(best->dy) * best->dy;
        better = r_new < r_old || (r_new == r_old && (dy < best->dy ||
                                                      (dy == best->dy && dx < best->dx)));
      }
      if (better) {
        best = d;
        best_value = *v;
      }
    }
  }
  if (!best) throw RegistrationError("correlation map has no defined value");

  RegistrationResult result;
  result.d_max = *best;
  result.peak_value = best_value;
  result.on_boundary = map.window.on_edge(*best);

  std::sort(defined.begin(), defined.end());
  const std::size_t m = defined.size();
  result.background = m % 2 ? defined[m / 2] : 0.5 * (defined[m / 2 - 1] + defined[m / 2]);
  const double base = result.background < best_value ? result.background : 0.0;
  const double level = base + 0.5 * (best_value - base);

  bool truncated = false;
  result.fwhm_x = half_width(map, *best, -1, 0, best_value, level, truncated) +
                  half_width(map, *best, 1, 0, best_value, level, truncated);
  result.fwhm_y = half_width(map, *best, 0, -1, best_value, level, truncated) +
                  half_width(map, *best, 0, 1, best_value, level, truncated);
  result.fwhm_truncated = truncated;

  const double px = probe_origin.center_x() + best->dx;
  const double py = probe_origin.center_y() + best->dy;
  result.distance = std::hypot(px - ref_anchor.center_x(), py - ref_anchor.center_y());
  return result;
}

ChainRegistration chain_register(const FrameStack& arm1, const FrameStack& arm2,
                                 const FrameStack& arm3, const Region& anchor1,
                                 const SearchWindow& search12, const SearchWindow& search23,
                                 unsigned threads) {
  ChainRegistration out;
  const auto map12 = correlation_map(arm1, anchor1, arm2, anchor1, search12, threads);
  out.arm2_vs_arm1 = register_peak(map12, anchor1, anchor1);
  out.anchor2 = shift_region(anchor1, out.arm2_vs_arm1.d_max, arm2.extent());
  const auto map23 = correlation_map(arm2, out.anchor2, arm3, out.anchor2, search23, threads);
  out.arm3_vs_arm2 = register_peak(map23, out.anchor2, out.anchor2);
  out.anchor3 = shift_region(out.anchor2, out.arm3_vs_arm2.d_max, arm3.extent());
  return out;
}

} // namespace ghostlab
