#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>

namespace ghostlab {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double v) {
    const double t = sum_ + v;
    if (abs_(sum_) >= abs_(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

private:
  static double abs_(double v) { return v < 0 ? -v : v; }
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Outcome of a normalized correlation: a value, or undefined when a
/// normalizing moment vanishes or too few samples were seen.
struct CorrelationValue {
  std::optional<double> value;
  std::size_t n = 0;

  bool defined() const { return value.has_value(); }
};

/// Streaming accumulator of raw power sums for one to three paired series,
/// plus the cross sums needed by c2 and c3.
///
/// Sums are taken of x - a, where the shift a is the first sample of each
/// series. Central moments are invariant to the shift, and centring the
/// sums near the data keeps the raw-to-central expansion from cancelling
/// catastrophically. Summaries with different shifts merge exactly by
/// binomial re-centring.
class MomentSummary {
public:
  explicit MomentSummary(std::size_t arity);

  std::size_t arity() const { return arity_; }
  std::size_t count() const { return n_; }

  /// Adds one sample; its length must equal arity() (UsageError otherwise).
  void add(std::span<const double> sample);
  void add(double x);
  void add(double x, double y);
  void add(double x, double y, double z);

  /// Folds `other` into this summary, as if its samples had been added here.
  void merge(const MomentSummary& other);

  /// Population statistics (divide by n). Empty when n == 0.
  std::optional<double> mean(std::size_t series) const;
  std::optional<double> central2(std::size_t series) const;
  std::optional<double> central3(std::size_t series) const;
  /// <(x_i - <x_i>)(x_j - <x_j>)>
  std::optional<double> covariance(std::size_t i, std::size_t j) const;
  /// <(x - <x>)(y - <y>)(z - <z>)>, arity 3 only.
  std::optional<double> comoment3() const;

private:
  static std::size_t pair_index(std::size_t i, std::size_t j);
  void require_series(std::size_t series) const;
  void initialize_shift(std::span<const double> sample);

  std::size_t arity_;
  std::size_t n_ = 0;
  std::array<double, 3> shift_{};
  std::array<CompensatedSum, 3> s1_{}, s2_{}, s3_{};
  std::array<CompensatedSum, 3> cross_{}; // (0,1), (0,2), (1,2)
  CompensatedSum triple_{};
};

/// Pure form of MomentSummary::add.
MomentSummary accumulate(MomentSummary summary, std::span<const double> sample);
MomentSummary accumulate(MomentSummary summary, std::initializer_list<double> sample);

/// Summary of paired series of equal length (1 to 3 series).
MomentSummary summarize(std::span<const double> x);
MomentSummary summarize(std::span<const double> x, std::span<const double> y);
MomentSummary summarize(std::span<const double> x, std::span<const double> y,
                        std::span<const double> z);

/// Normalized second-order correlation coefficient of series 0 and 1:
/// (<xy> - <x><y>) / (sqrt(mu2(x)) sqrt(mu2(y))). Undefined for n < 2 or a
/// vanishing second central moment.
CorrelationValue c2(const MomentSummary& summary);

/// Normalized third-order correlation coefficient of series 0, 1, 2:
/// <dx dy dz> / (cbrt(mu3(x)) cbrt(mu3(y)) cbrt(mu3(z))), with real,
/// sign-preserving cube roots. Undefined for n < 3 or a vanishing third
/// central moment.
CorrelationValue c3(const MomentSummary& summary);

/// Two-pass reference implementations: means first, then direct sums over
/// deviations. Independent of MomentSummary; used to verify it.
CorrelationValue oracle_c2(std::span<const double> x, std::span<const double> y);
CorrelationValue oracle_c3(std::span<const double> x, std::span<const double> y,
                           std::span<const double> z);

} // namespace ghostlab
