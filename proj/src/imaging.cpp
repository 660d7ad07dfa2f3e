#include "ghostlab/imaging.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "ghostlab/error.hpp"
#include "ghostlab/parallel.hpp"

namespace ghostlab {

BucketSeries bucket(const FrameStack& stack, const Region& region) {
  require_inside(region, stack.extent(), "bucket");
  BucketSeries out{std::vector<double>(stack.n_frames()), region};
  for (std::size_t k = 0; k < stack.n_frames(); ++k) {
    CompensatedSum sum;
    for (std::size_t r = region.y0(); r < region.y0() + region.height(); ++r)
      for (std::size_t c = region.x0(); c < region.x0() + region.width(); ++c)
        sum.add(stack.at(k, r, c));
    out.values[k] = sum.value();
  }
  return out;
}

std::size_t GhostImage::undefined_count() const {
  std::size_t n = 0;
  for (const auto& v : values) n += v ? 0 : 1;
  return n;
}

std::string GhostImage::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "x,y,value\n";
  for (std::size_t y = 0; y < extent.height; ++y) {
    for (std::size_t x = 0; x < extent.width; ++x) {
      os << x << "," << y << ",";
      if (const auto v = at(x, y)) os << *v;
      else os << "nan";
      os << "\n";
    }
  }
  return os.str();
}

GhostImage GhostImage::from_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != "x,y,value")
    throw FormatError("ghost image CSV must start with the header x,y,value");
  struct Entry {
    std::size_t x, y;
    std::optional<double> v;
  };
  std::vector<Entry> entries;
  std::size_t width = 0, height = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string sx, sy, sv;
    if (!std::getline(fields, sx, ',') || !std::getline(fields, sy, ',') ||
        !std::getline(fields, sv))
      throw FormatError("ghost image CSV line " + std::to_string(line_no) + " is malformed");
    Entry e{};
    try {
      e.x = std::stoul(sx);
      e.y = std::stoul(sy);
      if (sv != "nan") e.v = std::stod(sv);
    } catch (const std::exception&) {
      throw FormatError("ghost image CSV line " + std::to_string(line_no) + " is malformed");
    }
    width = std::max(width, e.x + 1);
    height = std::max(height, e.y + 1);
    entries.push_back(e);
  }
  if (entries.size() != width * height || entries.empty())
    throw FormatError("ghost image CSV does not cover a full rectangle");
  GhostImage image;
  image.order = 0;
  image.extent = {width, height};
  image.values.assign(width * height, std::nullopt);
  for (const auto& e : entries) image.values[e.y * width + e.x] = e.v;
  return image;
}

namespace {

void require_frames(std::size_t bucket_frames, const FrameStack& stack, const char* what) {
  if (bucket_frames != stack.n_frames())
    throw AlignmentError(std::string(what) + " has " + std::to_string(stack.n_frames()) +
                         " frames but the bucket series has " + std::to_string(bucket_frames));
}

std::string region_text(const Region& r) { return to_string(r); }

} // namespace

GhostImage ghost2(const BucketSeries& bucket, const FrameStack& ref_stack, const Region& ref_region,
                  unsigned threads) {
  require_frames(bucket.n_frames(), ref_stack, "reference stack");
  require_inside(ref_region, ref_stack.extent(), "reference");
  const std::size_t w = ref_region.width();
  const std::size_t h = ref_region.height();
  GhostImage image;
  image.order = 2;
  image.extent = {w, h};
  image.values.assign(w * h, std::nullopt);
  image.n_frames = bucket.n_frames();
  image.provenance = {{"order", "2"},
                      {"bucket_region", region_text(bucket.region)},
                      {"reference_region", region_text(ref_region)},
                      {"reference_arm", ref_stack.meta_value("arm")},
                      {"n_frames", std::to_string(bucket.n_frames())}};

  parallel_for(h, threads, [&](std::size_t row) {
    std::vector<MomentSummary> acc(w, MomentSummary(2));
    for (std::size_t k = 0; k < bucket.n_frames(); ++k) {
      const double b = bucket.values[k];
      const auto frame = ref_stack.frame(k);
      const double* src = frame.data() + (ref_region.y0() + row) * ref_stack.width() + ref_region.x0();
      for (std::size_t x = 0; x < w; ++x) acc[x].add(b, src[x]);
    }
    for (std::size_t x = 0; x < w; ++x) image.values[row * w + x] = c2(acc[x]).value;
  });
  return image;
}

GhostImage ghost3(const BucketSeries& bucket, const FrameStack& ref2_stack, const Region& ref2_region,
                  const FrameStack& ref3_stack, const Region& ref3_region, unsigned threads) {
  require_frames(bucket.n_frames(), ref2_stack, "second reference stack");
  require_frames(bucket.n_frames(), ref3_stack, "third reference stack");
  require_inside(ref2_region, ref2_stack.extent(), "second reference");
  require_inside(ref3_region, ref3_stack.extent(), "third reference");
  if (ref2_region.width() != ref3_region.width() || ref2_region.height() != ref3_region.height())
    throw AlignmentError("reference regions differ in size");
  const std::size_t w = ref2_region.width();
  const std::size_t h = ref2_region.height();
  GhostImage image;
  image.order = 3;
  image.extent = {w, h};
  image.values.assign(w * h, std::nullopt);
  image.n_frames = bucket.n_frames();
  image.provenance = {{"order", "3"},
                      {"bucket_region", region_text(bucket.region)},
                      {"reference_region_2", region_text(ref2_region)},
                      {"reference_region_3", region_text(ref3_region)},
                      {"reference_arms", ref2_stack.meta_value("arm") + "," +
                                             ref3_stack.meta_value("arm")},
                      {"n_frames", std::to_string(bucket.n_frames())}};

  parallel_for(h, threads, [&](std::size_t row) {
    std::vector<MomentSummary> acc(w, MomentSummary(3));
    for (std::size_t k = 0; k < bucket.n_frames(); ++k) {
      const double b = bucket.values[k];
      const double* s2 = ref2_stack.frame(k).data() +
                         (ref2_region.y0() + row) * ref2_stack.width() + ref2_region.x0();
      const double* s3 = ref3_stack.frame(k).data() +
                         (ref3_region.y0() + row) * ref3_stack.width() + ref3_region.x0();
      for (std::size_t x = 0; x < w; ++x) acc[x].add(b, s2[x], s3[x]);
    }
    for (std::size_t x = 0; x < w; ++x) image.values[row * w + x] = c3(acc[x]).value;
  });
  return image;
}

namespace {

struct RegionMean {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

RegionMean region_mean(const GhostImage& image, const Region& region, const char* name) {
  require_inside(region, image.extent, name);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t y = region.y0(); y < region.y0() + region.height(); ++y)
    for (std::size_t x = region.x0(); x < region.x0() + region.width(); ++x)
      if (const auto v = image.at(x, y)) {
        sum += *v;
        ++n;
      }
  if (n == 0)
    throw MetricError(std::string(name) + " region (" + to_string(region) +
                      ") has no defined pixels");
  RegionMean out;
  out.n = n;
  out.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (std::size_t y = region.y0(); y < region.y0() + region.height(); ++y)
      for (std::size_t x = region.x0(); x < region.x0() + region.width(); ++x)
        if (const auto v = image.at(x, y)) ss += (*v - out.mean) * (*v - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    out.stderr_ = sd / std::sqrt(static_cast<double>(n));
  }
  return out;
}

} // namespace

VisibilityReport visibility(const GhostImage& image, const Region& region_back,
                            const Region& region_obj) {
  const RegionMean back = region_mean(image, region_back, "background");
  const RegionMean obj = region_mean(image, region_obj, "object");
  const double denom = back.mean + obj.mean;
  if (denom == 0.0) throw MetricError("visibility denominator c_back + c_obj is zero");

  VisibilityReport r;
  r.order = image.order;
  r.region_back = region_back;
  r.region_obj = region_obj;
  r.cj_back = back.mean;
  r.cj_obj = obj.mean;
  r.n_back = back.n;
  r.n_obj = obj.n;
  r.v = (back.mean - obj.mean) / denom;
  // dV/dc_back = 2 c_obj / D^2, dV/dc_obj = -2 c_back / D^2.
  const double gb = 2.0 * obj.mean / (denom * denom);
  const double go = -2.0 * back.mean / (denom * denom);
  r.v_stderr = std::hypot(gb * back.stderr_, go * obj.stderr_);
  return r;
}

std::string VisibilityReport::to_text() const {
  std::ostringstream os;
  os << std::setprecision(6) << std::fixed;
  os << "order = " << order << "\n";
  os << "V = " << v << " +/- " << v_stderr << "\n";
  os << "c_back = " << cj_back << " (" << n_back << " px, region " << to_string(region_back)
     << ")\n";
  os << "c_obj = " << cj_obj << " (" << n_obj << " px, region " << to_string(region_obj) << ")\n";
  return os.str();
}

std::string VisibilityReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "order,v,v_stderr,c_back,c_obj,n_back,n_obj\n";
  os << order << "," << v << "," << v_stderr << "," << cj_back << "," << cj_obj << "," << n_back
     << "," << n_obj << "\n";
  return os.str();
}

} // namespace ghostlab
