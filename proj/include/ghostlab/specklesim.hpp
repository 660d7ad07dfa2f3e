#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ghostlab/frames.hpp"
#include "ghostlab/speckle.hpp"

namespace ghostlab {

/// Per-arm imperfections of the three-arm layout.
struct ArmParams {
  double gain = 1.0;
  /// Position of this arm's pattern relative to arm 1 (registration ground truth).
  Displacement offset{};
  /// Weight of an independent speckle field mixed into this arm, in [0, 1].
  double decorrelation = 0.0;
  double read_noise_sigma = 0.0;
  bool shot_noise = false;

  void validate() const;
};

/// Object transmission in [0, 1]; 0 is opaque.
struct ObjectMask {
  Extent extent;
  std::vector<double> transmission; // row-major

  static ObjectMask transparent(Extent extent);
  double at(std::size_t row, std::size_t col) const { return transmission[row * extent.width + col]; }
  void validate() const;
};

enum class MaskKind { transparent, wire_curl, double_slit, disk, custom_pgm };

MaskKind parse_mask_kind(const std::string& name);
std::string to_string(MaskKind kind);

/// Geometry of the built-in masks. Only the fields relevant to the chosen
/// kind are read.
struct MaskGeometry {
  double center_x = 0.0;
  double center_y = 0.0;
  /// disk: opaque radius. wire_curl: radius of the curl loop.
  double radius = 0.0;
  /// wire_curl: stroke thickness in pixels.
  double thickness = 3.0;
  /// double_slit: slit width and centre-to-centre separation, in columns.
  std::size_t slit_width = 0;
  std::size_t slit_separation = 0;
  /// custom_pgm: source file; values are scaled by 1 / maxval.
  std::filesystem::path pgm_path;
};

/// Built-in transmission masks:
///   disk        opaque disk of `radius` around the centre (radius 0 is transparent)
///   double_slit opaque screen with two transparent full-height slits
///   wire_curl   opaque wire of `thickness` running vertically through
///               center_x with one circular curl of `radius` at center_y
///   custom_pgm  transmission read from a P5 file
/// Throws GeometryError if the shape does not fit `extent`.
ObjectMask builtin_mask(MaskKind kind, Extent extent, const MaskGeometry& geometry);

struct SimConfig {
  SpeckleParams speckle;
  std::array<ArmParams, 3> arms; // arm 1 = test arm, arms 2 and 3 = reference
  ObjectMask object;             // applied to arm 1
  double quantization_gain = 1.0;

  /// Throws ConfigError on any invalid field or object/grid mismatch.
  void validate() const;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::array<Displacement, 3> offsets{};
  ObjectMask object;

  /// UTF-8 key=value text.
  std::string to_text(const SimConfig& config) const;
};

struct SimResult {
  std::array<FrameStack, 3> arms;
  GroundTruth truth;
};

/// Analog (pre-quantization) intensities per arm, frame-major then
/// row-major. Includes object, shot noise and read noise; may be negative
/// where read noise dominates.
std::array<std::vector<double>, 3> simulate_analog(const SimConfig& config, unsigned threads);

/// Full simulation: analog arms scaled by quantization_gain, clamped to
/// [0, 65535] and rounded to integers. Pure function of `config`.
SimResult simulate(const SimConfig& config, unsigned threads);

/// Decorrelation weight that, applied equally to all arms with the given
/// gain and noise, gives the requested pairwise inter-arm c2 at matched
/// pixels (object-free). Throws PreconditionError if unreachable.
double decorrelation_for_pairwise_c2(double target_c2, double mean_intensity, double gain,
                                     double read_noise_sigma, bool shot_noise);

/// Expected inter-arm c2 for symmetric arms; inverse of the above.
double expected_pairwise_c2(double decorrelation, double mean_intensity, double gain,
                            double read_noise_sigma, bool shot_noise);

} // namespace ghostlab
