#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "ghostlab/frames.hpp"

namespace ghostlab {

/// Parameters of a stationary far-field speckle pattern.
struct SpeckleParams {
  std::size_t grid_width = 128;
  std::size_t grid_height = 128;
  /// 1/e radius of the field amplitude correlation, in pixels.
  double coh_radius = 3.0;
  /// Ensemble mean intensity per pixel, analog units.
  double mean_intensity = 1000.0;
  std::size_t n_frames = 1;
  std::uint64_t seed = 0;

  /// Throws PreconditionError unless 0 < coh_radius < min(grid)/4,
  /// mean_intensity > 0 and n_frames >= 1.
  void validate() const;
};

/// FWHM of the normalized intensity correlation |g(r)|^2 produced by a
/// Gaussian amplitude correlation of 1/e radius `coh_radius`:
/// exp(-2 r^2 / a^2) = 1/2  =>  FWHM = a * sqrt(2 ln 2).
double intensity_fwhm_for_coh_radius(double coh_radius);
double coh_radius_for_intensity_fwhm(double fwhm);

/// Real intensity field, row-major.
struct IntensityField {
  Extent extent;
  std::vector<double> values;

  double at(std::size_t row, std::size_t col) const { return values[row * extent.width + col]; }
};

/// Draws speckle intensity fields I = |E|^2, where E is white circular
/// complex Gaussian noise low-pass filtered in the spatial-frequency domain
/// by a Gaussian window, so that <E(x) E*(x + r)> / <|E|^2> = exp(-r^2/a^2).
/// The field is periodic on the grid and its ensemble mean intensity equals
/// mean_intensity exactly.
///
/// A synthesizer owns its FFT plans; synthesize() is safe to call
/// concurrently from several threads.
class SpeckleSynthesizer {
public:
  explicit SpeckleSynthesizer(const SpeckleParams& params);
  ~SpeckleSynthesizer();
  SpeckleSynthesizer(const SpeckleSynthesizer&) = delete;
  SpeckleSynthesizer& operator=(const SpeckleSynthesizer&) = delete;

  const SpeckleParams& params() const { return params_; }

  /// Field drawn from the random stream identified by `stream_key`.
  IntensityField synthesize(std::uint64_t stream_key) const;

  /// Stream key used for frame `frame_index` of the master speckle sequence.
  std::uint64_t frame_key(std::size_t frame_index) const;

private:
  struct Plans;
  SpeckleParams params_;
  std::vector<double> filter_; // Gaussian spectral window times the global scale
  std::unique_ptr<Plans> plans_;
};

/// Frame `frame_index` of the speckle sequence defined by `params`.
/// Deterministic in (seed, frame_index); distinct indices are independent.
IntensityField synthesize_speckle_frame(const SpeckleParams& params, std::size_t frame_index);

} // namespace ghostlab
