#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ghostlab/frames.hpp"

namespace ghostlab::test {

inline std::vector<double> uniform_series(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline std::vector<double> exponential_series(std::mt19937_64& rng, std::size_t n, double mean) {
  std::exponential_distribution<double> dist(1.0 / mean);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ghostlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline FrameStack make_stack(std::size_t w, std::size_t h, std::size_t n, std::vector<double> px) {
  return FrameStack(w, h, n, std::move(px));
}

inline double relative_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

} // namespace ghostlab::test
