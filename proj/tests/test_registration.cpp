#include <doctest.h>

#include <cmath>
#include <random>

#include "ghostlab/error.hpp"
#include "ghostlab/registration.hpp"
#include "ghostlab/specklesim.hpp"
#include "support.hpp"

using namespace ghostlab;

namespace {

FrameStack white_noise(std::size_t w, std::size_t h, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return FrameStack(w, h, n, test::exponential_series(rng, w * h * n, 100.0));
}

SimResult speckle_arms(std::size_t frames, Displacement o2, Displacement o3, std::uint64_t seed) {
  SimConfig c;
  c.speckle = SpeckleParams{64, 64, 3.0, 1000.0, frames, seed};
  c.object = ObjectMask::transparent({64, 64});
  c.arms[1].offset = o2;
  c.arms[2].offset = o3;
  return simulate(c, 1);
}

CorrelationMap synthetic_map(int radius, double sigma, Displacement centre) {
  CorrelationMap map;
  map.window = SearchWindow::symmetric(radius);
  map.n_frames = 1;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const double r2 = std::pow(dx - centre.dx, 2) + std::pow(dy - centre.dy, 2);
      map.values.push_back(std::exp(-r2 / (2.0 * sigma * sigma)));
    }
  map.skipped_frames.assign(map.values.size(), 0);
  return map;
}

} // namespace

TEST_SUITE("registration") {

TEST_CASE("spatial c2 fixtures") {
  std::mt19937_64 rng(1);
  const auto a = test::uniform_series(rng, 64, 0, 10);
  std::vector<double> scaled(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) scaled[i] = 3.0 * a[i] + 2.0;
  CHECK(*frame_spatial_c2(a, a).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(*frame_spatial_c2(a, scaled).value == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> board(64), inverse(64);
  for (std::size_t i = 0; i < 64; ++i) {
    board[i] = ((i % 8) + (i / 8)) % 2 ? 10.0 : 0.0;
    inverse[i] = 10.0 - board[i];
  }
  CHECK(*frame_spatial_c2(board, inverse).value == doctest::Approx(-1.0).epsilon(1e-14));
  const std::vector<double> flat(64, 4.0);
  CHECK_FALSE(frame_spatial_c2(board, flat).defined());
  CHECK_THROWS_AS(frame_spatial_c2(board, std::vector<double>(63, 1.0)), AlignmentError);
}

TEST_CASE("self map peaks at zero displacement") {
  const FrameStack s = white_noise(40, 40, 5, 2);
  const Region r(15, 15, 10, 10);
  const auto map = correlation_map(s, r, s, r, SearchWindow::symmetric(4));
  const auto reg = register_peak(map, r, r);
  CHECK(reg.d_max == Displacement{0, 0});
  CHECK(reg.peak_value == doctest::Approx(1.0));
  CHECK(reg.distance == 0.0);
  CHECK_FALSE(reg.on_boundary);
  // uncorrelated pixels give a delta-like peak
  CHECK(reg.fwhm_x <= 2.0);
  CHECK(reg.fwhm_y <= 2.0);
  CHECK(map.total_skipped() == 0);
}

TEST_CASE("Gaussian peak width") {
  const double sigma = 3.0;
  const auto map = synthetic_map(15, sigma, {2, -1});
  const Region r(20, 20, 5, 5);
  const auto reg = register_peak(map, r, r);
  CHECK(reg.d_max == Displacement{2, -1});
  const double fwhm = 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma;
  CHECK(reg.fwhm_x == doctest::Approx(fwhm).epsilon(0.1));
  CHECK(reg.fwhm_y == doctest::Approx(fwhm).epsilon(0.1));
  CHECK(reg.distance == doctest::Approx(std::sqrt(5.0)));
  CHECK_FALSE(reg.fwhm_truncated);
}

TEST_CASE("tie-break prefers the smallest displacement") {
  CorrelationMap map;
  map.window = SearchWindow::symmetric(2);
  map.n_frames = 1;
  map.values.assign(25, 0.1);
  map.skipped_frames.assign(25, 0);
  auto set = [&](int dx, int dy, double v) { map.values[(dy + 2) * 5 + (dx + 2)] = v; };
  set(1, 1, 0.9);
  set(-1, 0, 0.9);
  set(2, -2, 0.9);
  const Region r(10, 10, 4, 4);
  CHECK(register_peak(map, r, r).d_max == Displacement{-1, 0});
  set(0, -1, 0.9);
  CHECK(register_peak(map, r, r).d_max == Displacement{0, -1});
  set(1, 0, 0.9);
  CHECK(register_peak(map, r, r).d_max == Displacement{0, -1});
  set(-1, 0, 0.5);
  set(0, -1, 0.5);
  CHECK(register_peak(map, r, r).d_max == Displacement{1, 0});
}

TEST_CASE("known offset is recovered") {
  const SimResult arms = speckle_arms(20, {3, -2}, {0, 0}, 5);
  const Region anchor(20, 20, 16, 16);
  const auto map = correlation_map(arms.arms[0], anchor, arms.arms[1], anchor, SearchWindow::symmetric(6));
  const auto reg = register_peak(map, anchor, anchor);
  CHECK(reg.d_max == Displacement{3, -2});
  CHECK(reg.peak_value == doctest::Approx(1.0));
  CHECK(reg.distance == doctest::Approx(std::sqrt(13.0)));
}

TEST_CASE("map symmetry under exchange of reference and probe") {
  const SimResult arms = speckle_arms(6, {2, 1}, {0, 0}, 8);
  const Region r(20, 20, 12, 12);
  const Displacement d{2, 1};
  const Region rd = shift_region(r, d, arms.arms[1].extent());
  const auto forward = correlation_map(arms.arms[0], r, arms.arms[1], r, SearchWindow::symmetric(3));
  const auto backward = correlation_map(arms.arms[1], rd, arms.arms[0], rd, SearchWindow::symmetric(3));
  // forward at D pairs arm1[r] with arm2[r + D]; backward at -D pairs the same regions
  const auto f = forward.at(d);
  const auto b = backward.at(-d);
  REQUIRE(f);
  REQUIRE(b);
  CHECK(std::abs(*f - *b) < 1e-12);
  CHECK(register_peak(forward, r, r).d_max == d);
  CHECK(register_peak(backward, rd, rd).d_max == -d);
}

TEST_CASE("moving the probe origin shifts the map") {
  const FrameStack s = white_noise(40, 40, 4, 9);
  const Region ref(15, 15, 8, 8);
  const auto base = correlation_map(s, ref, s, ref, SearchWindow::symmetric(4));
  const Region moved(17, 14, 8, 8);
  const auto shifted = correlation_map(s, ref, s, moved, SearchWindow{-6, 2, -3, 5});
  for (int dy = -3; dy <= 4; ++dy)
    for (int dx = -4; dx <= 2; ++dx) {
      const auto a = base.at({dx, dy});
      const auto b = shifted.at({dx - 2, dy + 1});
      REQUIRE(a);
      REQUIRE(b);
      CHECK(*a == *b);
    }
  CHECK(register_peak(shifted, ref, moved).d_max == Displacement{-2, 1});
  CHECK(register_peak(shifted, ref, moved).distance == 0.0);
}

TEST_CASE("thread count does not change the map") {
  const SimResult arms = speckle_arms(5, {1, 1}, {0, 0}, 3);
  const Region r(20, 20, 12, 12);
  const auto one = correlation_map(arms.arms[0], r, arms.arms[1], r, SearchWindow::symmetric(3), 1);
  const auto many = correlation_map(arms.arms[0], r, arms.arms[1], r, SearchWindow::symmetric(3), 3);
  CHECK(one.values == many.values);
}

TEST_CASE("chain registration") {
  const SimResult arms = speckle_arms(20, {3, -2}, {-1, 4}, 14);
  const Region anchor(20, 20, 16, 16);
  const auto chain = chain_register(arms.arms[0], arms.arms[1], arms.arms[2], anchor,
                                    SearchWindow::symmetric(6), SearchWindow::symmetric(8));
  CHECK(chain.arm2_vs_arm1.d_max == Displacement{3, -2});
  CHECK(chain.arm3_vs_arm2.d_max == Displacement{-4, 6});
  CHECK(chain.anchor2 == Region(23, 18, 16, 16));
  CHECK(chain.anchor3 == Region(19, 24, 16, 16));
}

TEST_CASE("peak on the window edge is flagged") {
  const SimResult arms = speckle_arms(10, {5, 0}, {0, 0}, 4);
  const Region anchor(20, 20, 16, 16);
  const auto map = correlation_map(arms.arms[0], anchor, arms.arms[1], anchor, SearchWindow{-3, 5, -3, 3});
  const auto reg = register_peak(map, anchor, anchor);
  CHECK(reg.d_max == Displacement{5, 0});
  CHECK(reg.on_boundary);
  CHECK(reg.fwhm_truncated);
}

TEST_CASE("registration errors") {
  const FrameStack s = white_noise(30, 30, 3, 1);
  const Region r(5, 5, 10, 10);
  CHECK_THROWS_AS(correlation_map(s, r, s, r, SearchWindow::symmetric(6)), BoundsError);
  CHECK_THROWS_AS(correlation_map(s, Region(25, 25, 10, 10), s, r, SearchWindow::symmetric(1)), BoundsError);
  CHECK_THROWS_AS(correlation_map(s, r, s, Region(5, 5, 9, 10), SearchWindow::symmetric(1)), AlignmentError);
  CHECK_THROWS_AS(correlation_map(s, r, frame_range(s, 0, 2), r, SearchWindow::symmetric(1)), AlignmentError);
  CHECK_THROWS_AS(correlation_map(s, r, s, r, SearchWindow{1, 0, 0, 0}), UsageError);

  const FrameStack flat(30, 30, 3, std::vector<double>(30 * 30 * 3, 7.0));
  const auto map = correlation_map(flat, r, flat, r, SearchWindow::symmetric(2));
  CHECK(map.total_skipped() == 25 * 3);
  CHECK_FALSE(map.at({0, 0}).has_value());
  CHECK(map.to_csv().find("0,0,nan\n") != std::string::npos);
  CHECK_THROWS_AS(register_peak(map, r, r), RegistrationError);
}

} // TEST_SUITE
