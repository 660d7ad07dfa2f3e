#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ghostlab/error.hpp"
#include "ghostlab/moments.hpp"
#include "support.hpp"

using namespace ghostlab;
using test::relative_diff;

TEST_SUITE("moments") {

TEST_CASE("empty summary has no statistics") {
  const MomentSummary s(3);
  CHECK(s.count() == 0);
  CHECK_FALSE(s.mean(0).has_value());
  CHECK_FALSE(s.central2(1).has_value());
  CHECK_FALSE(s.comoment3().has_value());
  CHECK_FALSE(c2(s).defined());
  CHECK_FALSE(c3(s).defined());
}

TEST_CASE("hand fixture {0,0,3}") {
  // deviations (-1,-1,2): mu2 = (1+1+4)/3, mu3 = (-1-1+8)/3
  const std::vector<double> x{0, 0, 3};
  const MomentSummary s = summarize(x);
  CHECK(*s.mean(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*s.central2(0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(*s.central3(0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("arity is enforced") {
  MomentSummary s(2);
  CHECK_THROWS_AS(s.add(1.0), UsageError);
  CHECK_THROWS_AS(s.add(1.0, 2.0, 3.0), UsageError);
  CHECK_THROWS_AS(MomentSummary(4), UsageError);
  CHECK_THROWS_AS(c3(s), UsageError);
  CHECK_THROWS_AS(accumulate(MomentSummary(1), {1.0, 2.0}), UsageError);
  CHECK(accumulate(MomentSummary(2), {1.0, 2.0}).count() == 1);
}

TEST_CASE("c2 fixtures") {
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> y{2, 4, 6};
  CHECK(*c2(summarize(x, x)).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*c2(summarize(x, y)).value == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> k{5, 5, 5};
  CHECK_FALSE(c2(summarize(k, y)).defined());
  CHECK_FALSE(oracle_c2(k, y).defined());
  const std::vector<double> one{1};
  CHECK_FALSE(c2(summarize(one, one)).defined());
  CHECK_FALSE(oracle_c2(one, one).defined());
}

TEST_CASE("c3 fixtures") {
  const std::vector<double> a{0, 0, 3};
  const std::vector<double> b{3, 0, 0};
  // numerator = mu3 = 2, denominator = cbrt(2)^3 = 2
  CHECK(std::abs(*c3(summarize(a, a, a)).value - 1.0) < 1e-12);
  // numerator = (2 - 1 - 4)/3 = -1, denominator = 2
  CHECK(std::abs(*c3(summarize(a, a, b)).value + 0.5) < 1e-12);
  CHECK(std::abs(*oracle_c3(a, a, b).value + 0.5) < 1e-12);
  const std::vector<double> symmetric{1, 2, 3}; // mu3 = 0
  CHECK_FALSE(c3(summarize(a, a, symmetric)).defined());
  CHECK_FALSE(oracle_c3(a, a, symmetric).defined());
}

TEST_CASE("merge equals summarizing the concatenation") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t na = 1 + rng() % 40, nb = 1 + rng() % 40;
    const auto xa = test::uniform_series(rng, na, 0, 10), xb = test::uniform_series(rng, nb, 0, 10);
    const auto ya = test::uniform_series(rng, na, 50, 60), yb = test::uniform_series(rng, nb, 50, 60);
    const auto za = test::exponential_series(rng, na, 3), zb = test::exponential_series(rng, nb, 3);
    MomentSummary merged = summarize(xa, ya, za);
    merged.merge(summarize(xb, yb, zb));

    auto cat = [](std::vector<double> a, const std::vector<double>& b) {
      a.insert(a.end(), b.begin(), b.end());
      return a;
    };
    const MomentSummary whole = summarize(cat(xa, xb), cat(ya, yb), cat(za, zb));
    REQUIRE(merged.count() == whole.count());
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(relative_diff(*merged.mean(i), *whole.mean(i)) < 1e-12);
      CHECK(relative_diff(*merged.central2(i), *whole.central2(i)) < 1e-12);
      CHECK(std::abs(*merged.central3(i) - *whole.central3(i)) <
            1e-12 * std::pow(*whole.central2(i), 1.5) + 1e-300);
    }
    CHECK(std::abs(*merged.covariance(0, 1) - *whole.covariance(0, 1)) <
          1e-12 * std::sqrt(*whole.central2(0) * *whole.central2(1)));
    CHECK(std::abs(*merged.comoment3() - *whole.comoment3()) <
          1e-12 * std::sqrt(*whole.central2(0) * *whole.central2(1) * *whole.central2(2)) *
              std::sqrt(std::max({*whole.central2(0), *whole.central2(1), *whole.central2(2)})));
  }
  MomentSummary empty(2);
  const std::vector<double> x{1, 2}, y{3, 5};
  empty.merge(summarize(x, y));
  CHECK(*c2(empty).value == doctest::Approx(1.0));
}

TEST_CASE("streaming estimators match the two-pass oracle") {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + rng() % 98;
    const auto x = test::uniform_series(rng, n, 0, 10);
    const auto y = test::uniform_series(rng, n, 0, 10);
    const auto z = test::uniform_series(rng, n, 0, 10);
    const auto s = c2(summarize(x, y)), o = oracle_c2(x, y);
    const auto s3 = c3(summarize(x, y, z)), o3 = oracle_c3(x, y, z);
    REQUIRE(s.defined() == o.defined());
    REQUIRE(s3.defined() == o3.defined());
    worst = std::max(worst, relative_diff(*s.value, *o.value));
    worst = std::max(worst, relative_diff(*s3.value, *o3.value));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("c2 symmetry and affine invariance") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng() % 50;
    const auto x = test::exponential_series(rng, n, 4);
    const auto y = test::uniform_series(rng, n, 0, 3);
    const double base = *c2(summarize(x, y)).value;
    CHECK(*c2(summarize(y, x)).value == base);
    for (const double a : {2.5, -0.3, 1e3}) {
      std::vector<double> ax(n);
      for (std::size_t i = 0; i < n; ++i) ax[i] = a * x[i] + 7.0;
      CHECK(std::abs(*c2(summarize(ax, y)).value - (a > 0 ? base : -base)) < 1e-12);
    }
  }
}

TEST_CASE("c3 permutation symmetry and scale invariance") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng() % 50;
    const auto x = test::exponential_series(rng, n, 1);
    const auto y = test::exponential_series(rng, n, 2);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] + y[i] + test::exponential_series(rng, 1, 1)[0];
    const double base = *c3(summarize(x, y, z)).value;
    CHECK(std::abs(*c3(summarize(y, x, z)).value - base) < 1e-12 * std::max(1.0, std::abs(base)));
    CHECK(std::abs(*c3(summarize(z, y, x)).value - base) < 1e-12 * std::max(1.0, std::abs(base)));
    CHECK(std::abs(*c3(summarize(y, z, x)).value - base) < 1e-12 * std::max(1.0, std::abs(base)));
    for (const double a : {3.0, -0.5}) {
      std::vector<double> ax(n);
      for (std::size_t i = 0; i < n; ++i) ax[i] = a * x[i];
      // a negative factor flips both the co-moment and the signed cube root
      CHECK(std::abs(*c3(summarize(ax, y, z)).value - base) < 1e-12 * std::max(1.0, std::abs(base)));
    }
  }
}

TEST_CASE("independent streams are uncorrelated") {
  std::mt19937_64 rng(99);
  const auto x = test::exponential_series(rng, 10000, 1);
  const auto y = test::exponential_series(rng, 10000, 1);
  const auto z = test::exponential_series(rng, 10000, 1);
  CHECK(std::abs(*c2(summarize(x, y)).value) < 0.05);
  CHECK(std::abs(*c3(summarize(x, y, z)).value) < 0.05);
}

TEST_CASE("exponential stream moments") {
  // mu2 = m^2 and mu3 = 2 m^3 for an exponential law of mean m
  std::mt19937_64 rng(3);
  const double m = 250.0;
  const auto x = test::exponential_series(rng, 100000, m);
  const MomentSummary s = summarize(x);
  const double mean = *s.mean(0);
  CHECK(*s.central2(0) / (mean * mean) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(*s.central3(0) / (2.0 * mean * mean * mean) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("shifted sums survive a large common offset") {
  std::mt19937_64 rng(8);
  auto x = test::uniform_series(rng, 400, 0, 1);
  auto y = test::uniform_series(rng, 400, 0, 1);
  const double ref = *oracle_c2(x, y).value;
  for (auto& v : x) v += 1e6;
  CHECK(std::abs(*c2(summarize(x, y)).value - ref) < 1e-9);
}

} // TEST_SUITE
