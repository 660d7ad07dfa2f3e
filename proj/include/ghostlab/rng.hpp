#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace ghostlab {

/// Derives an independent stream key from a master seed, a purpose label
/// and a tuple of counters (frame, arm, ...). Pure function; the same
/// inputs give the same key on every platform.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::initializer_list<std::uint64_t> counters = {});

/// Counter-addressed random stream. The engine is std::mt19937_64, whose
/// output sequence is fixed by the standard; the variate transforms are
/// implemented here because the standard distributions are not portable
/// bit-for-bit.
class Stream {
public:
  explicit Stream(std::uint64_t key) : engine_(key) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller, both outputs used).
  double normal();
  /// Poisson variate with the given mean (multiplication method below 12,
  /// transformed rejection above).
  std::uint64_t poisson(double mean);

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace ghostlab
