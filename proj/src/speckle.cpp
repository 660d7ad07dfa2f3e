#include "ghostlab/speckle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "ghostlab/error.hpp"
#include "ghostlab/rng.hpp"

namespace ghostlab {
namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

ComplexBuffer make_buffer(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (!p) throw std::bad_alloc();
  return ComplexBuffer(p);
}

double signed_frequency(std::size_t i, std::size_t n) {
  return i <= n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
}

} // namespace

void SpeckleParams::validate() const {
  if (grid_width == 0 || grid_height == 0) throw PreconditionError("speckle grid must be non-empty");
  const double limit = static_cast<double>(std::min(grid_width, grid_height)) / 4.0;
  if (!(coh_radius > 0.0) || !(coh_radius < limit))
    throw PreconditionError("coh_radius must lie in (0, " + std::to_string(limit) + "), got " +
                            std::to_string(coh_radius));
  if (!(mean_intensity > 0.0) || !std::isfinite(mean_intensity))
    throw PreconditionError("mean_intensity must be positive");
  if (n_frames < 1) throw PreconditionError("n_frames must be at least 1");
}

double intensity_fwhm_for_coh_radius(double coh_radius) {
  return coh_radius * std::sqrt(2.0 * std::numbers::ln2);
}

double coh_radius_for_intensity_fwhm(double fwhm) {
  return fwhm / std::sqrt(2.0 * std::numbers::ln2);
}

struct SpeckleSynthesizer::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

SpeckleSynthesizer::SpeckleSynthesizer(const SpeckleParams& params)
    : params_(params), plans_(std::make_unique<Plans>()) {
  params_.validate();
  const std::size_t w = params_.grid_width;
  const std::size_t h = params_.grid_height;
  const std::size_t n = w * h;

  // Amplitude correlation exp(-r^2/a^2) has power spectrum ~ exp(-k^2 a^2 / 4);
  // the filter is its square root.
  const double a = params_.coh_radius;
  filter_.resize(n);
  double power = 0.0;
  for (std::size_t r = 0; r < h; ++r) {
    const double ky = 2.0 * std::numbers::pi * signed_frequency(r, h) / static_cast<double>(h);
    for (std::size_t c = 0; c < w; ++c) {
      const double kx = 2.0 * std::numbers::pi * signed_frequency(c, w) / static_cast<double>(w);
      const double g = std::exp(-(kx * kx + ky * ky) * a * a / 8.0);
      filter_[r * w + c] = g;
      power += g * g;
    }
  }
  // Unnormalized forward and backward transforms of unit-variance white
  // noise give <|E|^2> = n * sum |H|^2.
  const double scale = std::sqrt(params_.mean_intensity / (static_cast<double>(n) * power));
  for (double& g : filter_) g *= scale;

  auto in = make_buffer(n);
  auto out = make_buffer(n);
  std::lock_guard lock(planner_mutex());
  plans_->forward = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), in.get(), out.get(),
                                     FFTW_FORWARD, FFTW_ESTIMATE);
  plans_->backward = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), out.get(),
                                      in.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plans_->forward || !plans_->backward) throw Error("FFTW planning failed");
}

SpeckleSynthesizer::~SpeckleSynthesizer() = default;

std::uint64_t SpeckleSynthesizer::frame_key(std::size_t frame_index) const {
  return derive_seed(params_.seed, "speckle-frame", {frame_index});
}

IntensityField SpeckleSynthesizer::synthesize(std::uint64_t stream_key) const {
  const std::size_t n = params_.grid_width * params_.grid_height;
  auto field = make_buffer(n);
  auto spectrum = make_buffer(n);

  // Circular complex Gaussian white noise, E|w|^2 = 1.
  Stream stream(stream_key);
  const double component = std::sqrt(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    field[i][0] = component * stream.normal();
    field[i][1] = component * stream.normal();
  }

  fftw_execute_dft(plans_->forward, field.get(), spectrum.get());
  for (std::size_t i = 0; i < n; ++i) {
    spectrum[i][0] *= filter_[i];
    spectrum[i][1] *= filter_[i];
  }
  fftw_execute_dft(plans_->backward, spectrum.get(), field.get());

  IntensityField out{{params_.grid_width, params_.grid_height}, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i)
    out.values[i] = field[i][0] * field[i][0] + field[i][1] * field[i][1];
  return out;
}

IntensityField synthesize_speckle_frame(const SpeckleParams& params, std::size_t frame_index) {
  const SpeckleSynthesizer synth(params);
  return synth.synthesize(synth.frame_key(frame_index));
}

} // namespace ghostlab
