#include "ghostlab/moments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ghostlab/error.hpp"

namespace ghostlab {

MomentSummary::MomentSummary(std::size_t arity) : arity_(arity) {
  if (arity < 1 || arity > 3)
    throw UsageError("moment summary arity must be 1, 2 or 3, got " + std::to_string(arity));
}

std::size_t MomentSummary::pair_index(std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  return i == 0 ? j - 1 : 2; // (0,1)->0, (0,2)->1, (1,2)->2
}

void MomentSummary::require_series(std::size_t series) const {
  if (series >= arity_)
    throw UsageError("series " + std::to_string(series) + " outside arity " +
                     std::to_string(arity_));
}

void MomentSummary::initialize_shift(std::span<const double> sample) {
  for (std::size_t i = 0; i < arity_; ++i) shift_[i] = sample[i];
}

void MomentSummary::add(std::span<const double> sample) {
  if (sample.size() != arity_)
    throw UsageError("sample of " + std::to_string(sample.size()) + " values for a summary of arity " +
                     std::to_string(arity_));
  if (n_ == 0) initialize_shift(sample);
  std::array<double, 3> u{};
  for (std::size_t i = 0; i < arity_; ++i) {
    u[i] = sample[i] - shift_[i];
    const double sq = u[i] * u[i];
    s1_[i].add(u[i]);
    s2_[i].add(sq);
    s3_[i].add(sq * u[i]);
  }
  if (arity_ >= 2) cross_[0].add(u[0] * u[1]);
  if (arity_ == 3) {
    cross_[1].add(u[0] * u[2]);
    cross_[2].add(u[1] * u[2]);
    triple_.add(u[0] * u[1] * u[2]);
  }
  ++n_;
}

void MomentSummary::add(double x) { add(std::span<const double>(&x, 1)); }

void MomentSummary::add(double x, double y) {
  const std::array<double, 2> s{x, y};
  add(s);
}

void MomentSummary::add(double x, double y, double z) {
  const std::array<double, 3> s{x, y, z};
  add(s);
}

void MomentSummary::merge(const MomentSummary& other) {
  if (other.arity_ != arity_) throw UsageError("cannot merge summaries of different arity");
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  // Re-express other's sums of (x - b) as sums of (x - a): x - a = u + t with t = b - a.
  const double m = static_cast<double>(other.n_);
  std::array<double, 3> t{};
  std::array<double, 3> o1{}, o2{}, o3{};
  for (std::size_t i = 0; i < arity_; ++i) {
    t[i] = other.shift_[i] - shift_[i];
    o1[i] = other.s1_[i].value();
    o2[i] = other.s2_[i].value();
    o3[i] = other.s3_[i].value();
    const double ti = t[i];
    s1_[i].add(o1[i]);
    s1_[i].add(m * ti);
    s2_[i].add(o2[i]);
    s2_[i].add(2.0 * ti * o1[i]);
    s2_[i].add(m * ti * ti);
    s3_[i].add(o3[i]);
    s3_[i].add(3.0 * ti * o2[i]);
    s3_[i].add(3.0 * ti * ti * o1[i]);
    s3_[i].add(m * ti * ti * ti);
  }
  const auto merge_cross = [&](std::size_t i, std::size_t j) {
    const std::size_t k = pair_index(i, j);
    cross_[k].add(other.cross_[k].value());
    cross_[k].add(t[j] * o1[i]);
    cross_[k].add(t[i] * o1[j]);
    cross_[k].add(m * t[i] * t[j]);
  };
  if (arity_ >= 2) merge_cross(0, 1);
  if (arity_ == 3) {
    merge_cross(0, 2);
    merge_cross(1, 2);
    const double sxy = other.cross_[0].value();
    const double sxz = other.cross_[1].value();
    const double syz = other.cross_[2].value();
    triple_.add(other.triple_.value());
    triple_.add(t[2] * sxy);
    triple_.add(t[1] * sxz);
    triple_.add(t[0] * syz);
    triple_.add(t[1] * t[2] * o1[0]);
    triple_.add(t[0] * t[2] * o1[1]);
    triple_.add(t[0] * t[1] * o1[2]);
    triple_.add(m * t[0] * t[1] * t[2]);
  }
  n_ += other.n_;
}

std::optional<double> MomentSummary::mean(std::size_t series) const {
  require_series(series);
  if (n_ == 0) return std::nullopt;
  return shift_[series] + s1_[series].value() / static_cast<double>(n_);
}

std::optional<double> MomentSummary::central2(std::size_t series) const {
  require_series(series);
  if (n_ == 0) return std::nullopt;
  const double n = static_cast<double>(n_);
  const double mu = s1_[series].value() / n;
  return std::max(0.0, s2_[series].value() / n - mu * mu);
}

std::optional<double> MomentSummary::central3(std::size_t series) const {
  require_series(series);
  if (n_ == 0) return std::nullopt;
  const double n = static_cast<double>(n_);
  const double mu = s1_[series].value() / n;
  return s3_[series].value() / n - 3.0 * mu * (s2_[series].value() / n) + 2.0 * mu * mu * mu;
}

std::optional<double> MomentSummary::covariance(std::size_t i, std::size_t j) const {
  require_series(i);
  require_series(j);
  if (n_ == 0) return std::nullopt;
  if (i == j) return central2(i);
  const double n = static_cast<double>(n_);
  return cross_[pair_index(i, j)].value() / n - (s1_[i].value() / n) * (s1_[j].value() / n);
}

std::optional<double> MomentSummary::comoment3() const {
  if (arity_ != 3) throw UsageError("third-order co-moment needs a summary of arity 3");
  if (n_ == 0) return std::nullopt;
  const double n = static_cast<double>(n_);
  const double mx = s1_[0].value() / n;
  const double my = s1_[1].value() / n;
  const double mz = s1_[2].value() / n;
  return triple_.value() / n - mx * (cross_[2].value() / n) - my * (cross_[1].value() / n) -
         mz * (cross_[0].value() / n) + 2.0 * mx * my * mz;
}

MomentSummary accumulate(MomentSummary summary, std::span<const double> sample) {
  summary.add(sample);
  return summary;
}

MomentSummary accumulate(MomentSummary summary, std::initializer_list<double> sample) {
  summary.add(std::span<const double>(sample.begin(), sample.size()));
  return summary;
}

namespace {

void require_equal_lengths(std::size_t a, std::size_t b) {
  if (a != b)
    throw UsageError("paired series differ in length (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
}

} // namespace

MomentSummary summarize(std::span<const double> x) {
  MomentSummary s(1);
  for (const double v : x) s.add(v);
  return s;
}

MomentSummary summarize(std::span<const double> x, std::span<const double> y) {
  require_equal_lengths(x.size(), y.size());
  MomentSummary s(2);
  for (std::size_t i = 0; i < x.size(); ++i) s.add(x[i], y[i]);
  return s;
}

MomentSummary summarize(std::span<const double> x, std::span<const double> y,
                        std::span<const double> z) {
  require_equal_lengths(x.size(), y.size());
  require_equal_lengths(x.size(), z.size());
  MomentSummary s(3);
  for (std::size_t i = 0; i < x.size(); ++i) s.add(x[i], y[i], z[i]);
  return s;
}

CorrelationValue c2(const MomentSummary& summary) {
  if (summary.arity() < 2) throw UsageError("c2 needs a summary of arity 2 or 3");
  CorrelationValue out{std::nullopt, summary.count()};
  if (summary.count() < 2) return out;
  const double vx = *summary.central2(0);
  const double vy = *summary.central2(1);
  if (vx <= 0.0 || vy <= 0.0) return out;
  out.value = *summary.covariance(0, 1) / std::sqrt(vx * vy);
  return out;
}

CorrelationValue c3(const MomentSummary& summary) {
  if (summary.arity() != 3) throw UsageError("c3 needs a summary of arity 3");
  CorrelationValue out{std::nullopt, summary.count()};
  if (summary.count() < 3) return out;
  const double mx = *summary.central3(0);
  const double my = *summary.central3(1);
  const double mz = *summary.central3(2);
  if (mx == 0.0 || my == 0.0 || mz == 0.0) return out;
  out.value = *summary.comoment3() / (std::cbrt(mx) * std::cbrt(my) * std::cbrt(mz));
  return out;
}

namespace {

double plain_mean(std::span<const double> x) {
  double s = 0.0;
  for (const double v : x) s += v;
  return s / static_cast<double>(x.size());
}

bool constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

} // namespace

CorrelationValue oracle_c2(std::span<const double> x, std::span<const double> y) {
  require_equal_lengths(x.size(), y.size());
  CorrelationValue out{std::nullopt, x.size()};
  if (x.size() < 2 || constant(x) || constant(y)) return out;
  const double mx = plain_mean(x);
  const double my = plain_mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  const double n = static_cast<double>(x.size());
  out.value = (sxy / n) / std::sqrt((sxx / n) * (syy / n));
  return out;
}

CorrelationValue oracle_c3(std::span<const double> x, std::span<const double> y,
                           std::span<const double> z) {
  require_equal_lengths(x.size(), y.size());
  require_equal_lengths(x.size(), z.size());
  CorrelationValue out{std::nullopt, x.size()};
  if (x.size() < 3 || constant(x) || constant(y) || constant(z)) return out;
  const double mx = plain_mean(x);
  const double my = plain_mean(y);
  const double mz = plain_mean(z);
  double cx = 0.0, cy = 0.0, cz = 0.0, cxyz = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    const double dz = z[i] - mz;
    cx += dx * dx * dx;
    cy += dy * dy * dy;
    cz += dz * dz * dz;
    cxyz += dx * dy * dz;
  }
  const double n = static_cast<double>(x.size());
  if (cx == 0.0 || cy == 0.0 || cz == 0.0) return out;
  out.value = (cxyz / n) / (std::cbrt(cx / n) * std::cbrt(cy / n) * std::cbrt(cz / n));
  return out;
}

} // namespace ghostlab
