#include <doctest.h>

#include <cmath>
#include <random>

#include "ghostlab/error.hpp"
#include "ghostlab/imaging.hpp"
#include "ghostlab/moments.hpp"
#include "ghostlab/specklesim.hpp"
#include "support.hpp"

using namespace ghostlab;

namespace {

GhostImage image_from(Extent e, std::vector<std::optional<double>> v, int order = 2) {
  GhostImage g;
  g.order = order;
  g.extent = e;
  g.values = std::move(v);
  g.n_frames = 1;
  return g;
}

// Background columns 0-1 hold `back`, object columns 2-3 hold `obj`.
GhostImage two_level(double back, double obj) {
  std::vector<std::optional<double>> v;
  for (std::size_t y = 0; y < 3; ++y)
    for (std::size_t x = 0; x < 4; ++x) v.push_back(x < 2 ? back : obj);
  return image_from({4, 3}, v);
}

SimConfig clean(std::size_t w, std::size_t h, std::size_t frames, double coh, std::uint64_t seed) {
  SimConfig c;
  c.speckle = SpeckleParams{w, h, coh, 1000.0, frames, seed};
  c.object = ObjectMask::transparent({w, h});
  return c;
}

std::pair<double, double> mean_sd(const GhostImage& g) {
  MomentSummary s(1);
  for (const auto& v : g.values) {
    REQUIRE(v.has_value());
    s.add(*v);
  }
  return {*s.mean(0), std::sqrt(*s.central2(0))};
}

} // namespace

TEST_SUITE("imaging") {

TEST_CASE("bucket sums") {
  const FrameStack ones(4, 4, 3, std::vector<double>(48, 1.0));
  const BucketSeries b = bucket(ones, Region(1, 1, 2, 2));
  CHECK(b.values == std::vector<double>{4.0, 4.0, 4.0});

  std::mt19937_64 rng(3);
  const FrameStack s(6, 5, 7, test::uniform_series(rng, 6 * 5 * 7, 0, 100));
  CHECK(bucket(s, Region(2, 3, 1, 1)).values == pixel_series(s, 2, 3));
  const auto left = bucket(s, Region(0, 0, 2, 5)).values;
  const auto right = bucket(s, Region(2, 0, 4, 5)).values;
  const auto all = bucket(s, Region(0, 0, 6, 5)).values;
  for (std::size_t k = 0; k < 7; ++k) CHECK(left[k] + right[k] == doctest::Approx(all[k]).epsilon(1e-14));
  CHECK_THROWS_AS(bucket(s, Region(3, 0, 4, 5)), BoundsError);
}

TEST_CASE("visibility arithmetic") {
  CHECK(visibility(two_level(0.3, 0.1), Region(0, 0, 2, 3), Region(2, 0, 2, 3)).v == doctest::Approx(0.5));
  CHECK(visibility(two_level(0.2, 0.2), Region(0, 0, 2, 3), Region(2, 0, 2, 3)).v == 0.0);
  const auto full = visibility(two_level(0.4, 0.0), Region(0, 0, 2, 3), Region(2, 0, 2, 3));
  CHECK(full.v == 1.0);
  CHECK(full.v_stderr == 0.0);
  CHECK(full.n_back == 6);
  CHECK(full.to_text().find("V = 1.000000 +/- 0.000000") != std::string::npos);
}

TEST_CASE("visibility standard error") {
  // back values {1, 3}: mean 2, sd sqrt(2), se 1; obj {1, 1}: se 0
  auto g = image_from({2, 2}, {1.0, 3.0, 1.0, 1.0});
  const auto r = visibility(g, Region(0, 0, 2, 1), Region(0, 1, 2, 1));
  CHECK(r.v == doctest::Approx(1.0 / 3.0));
  // dV/dc_back = 2 c_obj / D^2 = 2 / 9
  CHECK(r.v_stderr == doctest::Approx(2.0 / 9.0));
}

TEST_CASE("undefined pixels are excluded and empty regions rejected") {
  auto g = image_from({2, 2}, {0.5, std::nullopt, std::nullopt, std::nullopt});
  CHECK(g.undefined_count() == 3);
  try {
    visibility(g, Region(0, 0, 1, 1), Region(1, 1, 1, 1));
    FAIL("expected MetricError");
  } catch (const MetricError& e) {
    CHECK(std::string(e.what()).find("object region (1,1,1,1)") != std::string::npos);
  }
  CHECK_THROWS_AS(visibility(g, Region(1, 0, 1, 2), Region(0, 0, 1, 1)), MetricError);
  CHECK(visibility(g, Region(0, 0, 2, 1), Region(0, 0, 1, 1)).n_back == 1);
  CHECK_THROWS_AS(visibility(two_level(0.1, -0.1), Region(0, 0, 2, 3), Region(2, 0, 2, 3)), MetricError);
  CHECK_THROWS_AS(visibility(g, Region(0, 0, 3, 1), Region(0, 0, 1, 1)), BoundsError);
}

TEST_CASE("ghost image CSV round trip") {
  auto g = image_from({3, 2}, {0.25, std::nullopt, -1.0, 1e-17, 0.5, 1.0 / 3.0});
  const GhostImage back = GhostImage::from_csv(g.to_csv());
  CHECK(back.extent == g.extent);
  CHECK(back.values == g.values);
  CHECK_THROWS_AS(GhostImage::from_csv("a,b\n"), FormatError);
}

TEST_CASE("independent reference gives a null image") {
  std::mt19937_64 rng(21);
  const std::size_t n = 400;
  const FrameStack test_arm(8, 8, n, test::exponential_series(rng, 64 * n, 50.0));
  const FrameStack ref2(8, 8, n, test::exponential_series(rng, 64 * n, 50.0));
  const FrameStack ref3(8, 8, n, test::exponential_series(rng, 64 * n, 50.0));
  const BucketSeries b = bucket(test_arm, Region(0, 0, 8, 8));
  const GhostImage g2 = ghost2(b, ref2, Region(0, 0, 8, 8));
  const GhostImage g3 = ghost3(b, ref2, Region(0, 0, 8, 8), ref3, Region(0, 0, 8, 8));
  double ss2 = 0.0, ss3 = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    ss2 += *g2.values[i] * *g2.values[i];
    ss3 += *g3.values[i] * *g3.values[i];
  }
  CHECK(std::sqrt(ss2 / 64) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::sqrt(ss3 / 64) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("transparent object gives a uniform positive image") {
  // The bucket is a few speckles across so that the correlation signal
  // stands well above the 1/sqrt(400) estimator noise; the imaged pixels
  // sit at least 2 px inside the bucket.
  const SimResult r = simulate(clean(64, 64, 400, 3.0, 2), 1);
  const GhostImage g = ghost2(bucket(r.arms[0], Region(28, 28, 8, 8)), r.arms[1], Region(30, 30, 4, 4));
  const auto [mean, sd] = mean_sd(g);
  MESSAGE("transparent image mean " << mean << ", sd " << sd);
  CHECK(mean > 0.0);
  CHECK(sd < 0.2 * mean);
}

TEST_CASE("third-order self correlation") {
  const SimResult r = simulate(clean(32, 32, 200, 3.0, 5), 1);
  const BucketSeries b = bucket(r.arms[0], Region(10, 12, 1, 1));
  const GhostImage g = ghost3(b, r.arms[1], Region(8, 8, 8, 8), r.arms[1], Region(8, 8, 8, 8));
  CHECK(*g.at(2, 4) == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& v : g.values) CHECK(*v <= 1.0 + 1e-9);
  CHECK(g.order == 3);
}

TEST_CASE("gain invariance") {
  SimConfig c = clean(32, 32, 50, 3.0, 7);
  c.arms[2].offset = {1, 0};
  const SimResult r = simulate(c, 1);
  const Region reg(4, 4, 16, 16);
  FrameStack a1 = r.arms[0], a2 = r.arms[1], a3 = r.arms[2];
  const GhostImage g2 = ghost2(bucket(a1, reg), a2, reg);
  const GhostImage g3 = ghost3(bucket(a1, reg), a2, reg, a3, Region(5, 4, 16, 16));
  a1.scale(3.7);
  a2.scale(0.013);
  a3.scale(250.0);
  const GhostImage h2 = ghost2(bucket(a1, reg), a2, reg);
  const GhostImage h3 = ghost3(bucket(a1, reg), a2, reg, a3, Region(5, 4, 16, 16));
  for (std::size_t i = 0; i < g2.values.size(); ++i) {
    CHECK(std::abs(*g2.values[i] - *h2.values[i]) < 1e-9);
    CHECK(std::abs(*g3.values[i] - *h3.values[i]) < 1e-9);
  }
}

TEST_CASE("thread count does not change the image") {
  const SimResult r = simulate(clean(32, 32, 30, 3.0, 8), 1);
  const Region reg(0, 0, 32, 32);
  const auto b = bucket(r.arms[0], reg);
  CHECK(ghost2(b, r.arms[1], reg, 1).values == ghost2(b, r.arms[1], reg, 3).values);
  CHECK(ghost3(b, r.arms[1], reg, r.arms[2], reg, 1).values ==
        ghost3(b, r.arms[1], reg, r.arms[2], reg, 3).values);
}

TEST_CASE("alignment errors") {
  const FrameStack s(8, 8, 5);
  const FrameStack t(8, 8, 4);
  const BucketSeries b = bucket(s, Region(0, 0, 8, 8));
  CHECK_THROWS_AS(ghost2(b, t, Region(0, 0, 8, 8)), AlignmentError);
  CHECK_THROWS_AS(ghost3(b, s, Region(0, 0, 8, 8), t, Region(0, 0, 8, 8)), AlignmentError);
  CHECK_THROWS_AS(ghost3(b, s, Region(0, 0, 8, 8), s, Region(0, 0, 8, 7)), AlignmentError);
  CHECK_THROWS_AS(ghost2(b, s, Region(1, 0, 8, 8)), BoundsError);
  // constant frames leave every pixel undefined
  CHECK(ghost2(b, s, Region(0, 0, 8, 8)).undefined_count() == 64);
}

TEST_CASE("opaque disk and arm exchange") {
  // Fine speckle keeps neighbouring image pixels nearly independent, so the
  // pixel-sample standard errors are representative. The bucket extends
  // 8 px beyond the imaged area so every imaged pixel sees the same bucket
  // geometry.
  SimConfig c = clean(64, 64, 4000, 1.0, 11);
  c.arms[1].offset = {2, -1};
  c.arms[2].offset = {-1, 3};
  c.arms[1].decorrelation = 0.15;
  c.arms[2].decorrelation = 0.15;
  c.object = builtin_mask(MaskKind::disk, {64, 64}, MaskGeometry{32, 32, 10.0});
  const SimResult r = simulate(c, 1);
  const Region bucket_region(8, 8, 48, 48);
  const BucketSeries b = bucket(r.arms[0], bucket_region);
  const GhostImage via2 = ghost2(b, r.arms[1], Region(18, 15, 32, 32));
  const GhostImage via3 = ghost2(b, r.arms[2], Region(15, 19, 32, 32));
  const Region back(0, 0, 32, 4);
  const Region obj(11, 11, 10, 10);
  const auto v2 = visibility(via2, back, obj);
  const auto v3 = visibility(via3, back, obj);
  MESSAGE("V via arm 2 = " << v2.v << " +/- " << v2.v_stderr << ", via arm 3 = " << v3.v << " +/- "
                           << v3.v_stderr);
  CHECK(v2.v > 3.0 * v2.v_stderr);
  CHECK(v3.v > 3.0 * v3.v_stderr);
  CHECK(std::abs(v2.v - v3.v) < std::hypot(v2.v_stderr, v3.v_stderr));

  // a transparent object drives visibility to zero within its error
  c.object = ObjectMask::transparent({64, 64});
  const SimResult t = simulate(c, 1);
  const auto vt = visibility(ghost2(bucket(t.arms[0], bucket_region), t.arms[1], Region(18, 15, 32, 32)),
                             back, obj);
  MESSAGE("transparent V = " << vt.v << " +/- " << vt.v_stderr);
  CHECK(std::abs(vt.v) < 3.0 * vt.v_stderr);
}

} // TEST_SUITE
