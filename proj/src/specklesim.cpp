#include "ghostlab/specklesim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "ghostlab/error.hpp"
#include "ghostlab/parallel.hpp"
#include "ghostlab/pgm.hpp"
#include "ghostlab/rng.hpp"

namespace ghostlab {

void ArmParams::validate() const {
  if (!(gain > 0.0) || !std::isfinite(gain)) throw ConfigError("arm gain must be positive");
  if (!(decorrelation >= 0.0 && decorrelation <= 1.0))
    throw ConfigError("arm decorrelation must lie in [0, 1]");
  if (!(read_noise_sigma >= 0.0) || !std::isfinite(read_noise_sigma))
    throw ConfigError("arm read_noise_sigma must be non-negative");
}

ObjectMask ObjectMask::transparent(Extent extent) {
  return ObjectMask{extent, std::vector<double>(extent.width * extent.height, 1.0)};
}

void ObjectMask::validate() const {
  if (transmission.size() != extent.width * extent.height)
    throw ConfigError("object mask size does not match its extent");
  for (const double t : transmission)
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("object transmission outside [0, 1]");
}

MaskKind parse_mask_kind(const std::string& name) {
  if (name == "transparent" || name == "none") return MaskKind::transparent;
  if (name == "wire_curl") return MaskKind::wire_curl;
  if (name == "double_slit") return MaskKind::double_slit;
  if (name == "disk") return MaskKind::disk;
  if (name == "custom_pgm" || name == "pgm") return MaskKind::custom_pgm;
  throw ConfigError("unknown object kind '" + name + "'");
}

std::string to_string(MaskKind kind) {
  switch (kind) {
  case MaskKind::transparent: return "transparent";
  case MaskKind::wire_curl: return "wire_curl";
  case MaskKind::double_slit: return "double_slit";
  case MaskKind::disk: return "disk";
  case MaskKind::custom_pgm: return "custom_pgm";
  }
  return "unknown";
}

namespace {

void require_fits(bool ok, const std::string& what) {
  if (!ok) throw GeometryError(what + " does not fit inside the mask");
}

ObjectMask disk_mask(Extent extent, const MaskGeometry& g) {
  if (!(g.radius >= 0.0)) throw GeometryError("disk radius must be non-negative");
  const double w = static_cast<double>(extent.width);
  const double h = static_cast<double>(extent.height);
  require_fits(g.center_x - g.radius >= -0.5 && g.center_x + g.radius <= w - 0.5 &&
                   g.center_y - g.radius >= -0.5 && g.center_y + g.radius <= h - 0.5,
               "disk");
  auto mask = ObjectMask::transparent(extent);
  for (std::size_t r = 0; r < extent.height; ++r)
    for (std::size_t c = 0; c < extent.width; ++c)
      if (std::hypot(static_cast<double>(c) - g.center_x, static_cast<double>(r) - g.center_y) <
          g.radius)
        mask.transmission[r * extent.width + c] = 0.0;
  return mask;
}

ObjectMask double_slit_mask(Extent extent, const MaskGeometry& g) {
  if (g.slit_width == 0) throw GeometryError("slit width must be at least 1");
  if (g.slit_separation < g.slit_width)
    throw GeometryError("slit separation must be at least the slit width");
  const long span = static_cast<long>(g.slit_separation + g.slit_width);
  const long first = std::lround(g.center_x - static_cast<double>(span) / 2.0 + 0.5);
  require_fits(first >= 0 && first + span <= static_cast<long>(extent.width), "double slit");
  ObjectMask mask{extent, std::vector<double>(extent.width * extent.height, 0.0)};
  for (std::size_t r = 0; r < extent.height; ++r) {
    for (std::size_t i = 0; i < g.slit_width; ++i) {
      mask.transmission[r * extent.width + static_cast<std::size_t>(first) + i] = 1.0;
      mask.transmission[r * extent.width + static_cast<std::size_t>(first) + g.slit_separation +
                        i] = 1.0;
    }
  }
  return mask;
}

ObjectMask wire_curl_mask(Extent extent, const MaskGeometry& g) {
  if (!(g.thickness > 0.0)) throw GeometryError("wire thickness must be positive");
  if (!(g.radius >= 0.0)) throw GeometryError("curl radius must be non-negative");
  const double half = g.thickness / 2.0;
  const double w = static_cast<double>(extent.width);
  const double h = static_cast<double>(extent.height);
  require_fits(g.center_x - half >= -0.5 && g.center_x + 2.0 * g.radius + half <= w - 0.5 &&
                   g.center_y - g.radius - half >= -0.5 && g.center_y + g.radius + half <= h - 0.5,
               "wire curl");
  // Straight vertical stroke through center_x plus a loop tangent to it at
  // (center_x, center_y), bulging to the right.
  const double loop_cx = g.center_x + g.radius;
  auto mask = ObjectMask::transparent(extent);
  for (std::size_t r = 0; r < extent.height; ++r) {
    for (std::size_t c = 0; c < extent.width; ++c) {
      const double x = static_cast<double>(c);
      const double y = static_cast<double>(r);
      const bool on_stroke = std::fabs(x - g.center_x) <= half;
      const bool on_loop =
          g.radius > 0.0 && std::fabs(std::hypot(x - loop_cx, y - g.center_y) - g.radius) <= half;
      if (on_stroke || on_loop) mask.transmission[r * extent.width + c] = 0.0;
    }
  }
  return mask;
}

ObjectMask pgm_mask(Extent extent, const MaskGeometry& g) {
  const GrayImage image = read_pgm(g.pgm_path);
  if (!(image.extent == extent))
    throw GeometryError("mask PGM is " + std::to_string(image.extent.width) + "x" +
                        std::to_string(image.extent.height) + ", expected " +
                        std::to_string(extent.width) + "x" + std::to_string(extent.height));
  ObjectMask mask{extent, std::vector<double>(image.pixels.size())};
  for (std::size_t i = 0; i < image.pixels.size(); ++i)
    mask.transmission[i] = static_cast<double>(image.pixels[i]) / image.maxval;
  return mask;
}

} // namespace

ObjectMask builtin_mask(MaskKind kind, Extent extent, const MaskGeometry& geometry) {
  if (extent.width == 0 || extent.height == 0) throw GeometryError("mask extent must be non-empty");
  switch (kind) {
  case MaskKind::transparent: return ObjectMask::transparent(extent);
  case MaskKind::disk: return disk_mask(extent, geometry);
  case MaskKind::double_slit: return double_slit_mask(extent, geometry);
  case MaskKind::wire_curl: return wire_curl_mask(extent, geometry);
  case MaskKind::custom_pgm: return pgm_mask(extent, geometry);
  }
  throw GeometryError("unknown mask kind");
}

void SimConfig::validate() const {
  try {
    speckle.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  for (const auto& arm : arms) arm.validate();
  object.validate();
  if (!(object.extent == Extent{speckle.grid_width, speckle.grid_height}))
    throw ConfigError("object mask is " + std::to_string(object.extent.width) + "x" +
                      std::to_string(object.extent.height) + " but the arm grid is " +
                      std::to_string(speckle.grid_width) + "x" +
                      std::to_string(speckle.grid_height));
  if (!(quantization_gain > 0.0) || !std::isfinite(quantization_gain))
    throw ConfigError("quantization_gain must be positive");
}

std::string GroundTruth::to_text(const SimConfig& config) const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "seed=" << seed << "\n";
  os << "grid_width=" << config.speckle.grid_width << "\n";
  os << "grid_height=" << config.speckle.grid_height << "\n";
  os << "n_frames=" << config.speckle.n_frames << "\n";
  os << "coh_radius=" << config.speckle.coh_radius << "\n";
  os << "intensity_fwhm=" << intensity_fwhm_for_coh_radius(config.speckle.coh_radius) << "\n";
  os << "mean_intensity=" << config.speckle.mean_intensity << "\n";
  os << "quantization_gain=" << config.quantization_gain << "\n";
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& a = config.arms[i];
    const std::string p = "arm" + std::to_string(i + 1) + "_";
    os << p << "gain=" << a.gain << "\n";
    os << p << "offset=" << offsets[i].dx << "," << offsets[i].dy << "\n";
    os << p << "decorrelation=" << a.decorrelation << "\n";
    os << p << "read_noise_sigma=" << a.read_noise_sigma << "\n";
    os << p << "shot_noise=" << (a.shot_noise ? 1 : 0) << "\n";
  }
  std::size_t opaque = 0;
  for (const double t : object.transmission) opaque += t < 0.5 ? 1 : 0;
  os << "object_width=" << object.extent.width << "\n";
  os << "object_height=" << object.extent.height << "\n";
  os << "object_opaque_pixels=" << opaque << "\n";
  return os.str();
}

namespace {

std::size_t wrap(long v, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((v % m) + m) % m);
}

// Renders frame k of all three arms into `out` (analog units).
void render_frame(const SimConfig& config, const SpeckleSynthesizer& synth, std::size_t k,
                  std::array<std::vector<double>, 3>& out) {
  const std::size_t w = config.speckle.grid_width;
  const std::size_t h = config.speckle.grid_height;
  const std::uint64_t seed = config.speckle.seed;
  const IntensityField master = synth.synthesize(synth.frame_key(k));

  for (std::size_t arm = 0; arm < 3; ++arm) {
    const ArmParams& p = config.arms[arm];
    double* dst = out[arm].data() + k * w * h;
    const double keep = 1.0 - p.decorrelation;

    for (std::size_t r = 0; r < h; ++r) {
      const std::size_t sr = wrap(static_cast<long>(r) - p.offset.dy, h);
      for (std::size_t c = 0; c < w; ++c) {
        const std::size_t sc = wrap(static_cast<long>(c) - p.offset.dx, w);
        dst[r * w + c] = keep * master.values[sr * w + sc];
      }
    }
    if (p.decorrelation > 0.0) {
      const IntensityField extra = synth.synthesize(derive_seed(seed, "decorrelation", {k, arm}));
      for (std::size_t i = 0; i < w * h; ++i) dst[i] += p.decorrelation * extra.values[i];
    }
    for (std::size_t i = 0; i < w * h; ++i) dst[i] *= p.gain;
    if (arm == 0)
      for (std::size_t i = 0; i < w * h; ++i) dst[i] *= config.object.transmission[i];
    if (p.shot_noise) {
      Stream stream(derive_seed(seed, "shot-noise", {k, arm}));
      for (std::size_t i = 0; i < w * h; ++i)
        dst[i] = static_cast<double>(stream.poisson(dst[i]));
    }
    if (p.read_noise_sigma > 0.0) {
      Stream stream(derive_seed(seed, "read-noise", {k, arm}));
      for (std::size_t i = 0; i < w * h; ++i) dst[i] += p.read_noise_sigma * stream.normal();
    }
  }
}

} // namespace

std::array<std::vector<double>, 3> simulate_analog(const SimConfig& config, unsigned threads) {
  config.validate();
  const SpeckleSynthesizer synth(config.speckle);
  const std::size_t total =
      config.speckle.grid_width * config.speckle.grid_height * config.speckle.n_frames;
  std::array<std::vector<double>, 3> out;
  for (auto& a : out) a.assign(total, 0.0);
  parallel_for(config.speckle.n_frames, threads,
               [&](std::size_t k) { render_frame(config, synth, k, out); });
  return out;
}

SimResult simulate(const SimConfig& config, unsigned threads) {
  auto analog = simulate_analog(config, threads);
  const auto& sp = config.speckle;
  std::array<FrameStack, 3> arms{FrameStack(1, 1, 1), FrameStack(1, 1, 1), FrameStack(1, 1, 1)};
  for (std::size_t i = 0; i < 3; ++i) {
    for (double& v : analog[i])
      v = std::clamp(std::nearbyint(v * config.quantization_gain), 0.0, 65535.0);
    const auto& a = config.arms[i];
    std::ostringstream gain;
    gain << std::setprecision(17) << a.gain;
    MetaEntries meta{{"arm", std::to_string(i + 1)},
                     {"seed", std::to_string(sp.seed)},
                     {"gain", gain.str()},
                     {"offset", std::to_string(a.offset.dx) + "," + std::to_string(a.offset.dy)}};
    arms[i] = FrameStack(sp.grid_width, sp.grid_height, sp.n_frames, std::move(analog[i]),
                         std::move(meta));
  }
  GroundTruth truth{sp.seed, {config.arms[0].offset, config.arms[1].offset, config.arms[2].offset},
                    config.object};
  return SimResult{std::move(arms), std::move(truth)};
}

double expected_pairwise_c2(double decorrelation, double mean_intensity, double gain,
                            double read_noise_sigma, bool shot_noise) {
  const double keep = 1.0 - decorrelation;
  const double signal = gain * gain * mean_intensity * mean_intensity;
  const double variance = signal * (keep * keep + decorrelation * decorrelation) +
                          (shot_noise ? gain * mean_intensity : 0.0) +
                          read_noise_sigma * read_noise_sigma;
  return signal * keep * keep / variance;
}

double decorrelation_for_pairwise_c2(double target_c2, double mean_intensity, double gain,
                                     double read_noise_sigma, bool shot_noise) {
  if (!(target_c2 > 0.0 && target_c2 <= 1.0))
    throw PreconditionError("target c2 must lie in (0, 1]");
  const auto c2_at = [&](double d) {
    return expected_pairwise_c2(d, mean_intensity, gain, read_noise_sigma, shot_noise);
  };
  if (c2_at(0.0) < target_c2)
    throw PreconditionError("detector noise alone limits c2 to " + std::to_string(c2_at(0.0)));
  // c2 falls monotonically on [0, 1/2].
  double lo = 0.0;
  double hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (c2_at(mid) > target_c2 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace ghostlab
