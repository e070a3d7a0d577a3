#include <cmath>

#include "doctest.h"
#include "lace/error.hpp"
#include "lace/histogram.hpp"
#include "lace/laminar.hpp"
#include "lace/reference.hpp"
#include "lace/rng.hpp"
#include "oracles.hpp"

using namespace lace;

namespace {

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

std::vector<DirectionSpeed> random_obs(Rng& rng, int n, double speed_max) {
  std::vector<DirectionSpeed> z;
  for (int i = 0; i < n; ++i) z.push_back({rng.uniform(0, kTwoPi), rng.uniform(0, speed_max)});
  return z;
}

}  // namespace

TEST_CASE("standard geometry has 900 states") {
  const auto g = BinGeometry::standard();
  CHECK(g.n_speed_bins() == 25);
  CHECK(g.n_direction_bins() == 36);
  CHECK(g.size() == 900);
  CHECK(g.direction_bin(0.0) == 0);
  CHECK(g.direction_bin(deg_to_rad(10)) == 1);
  CHECK(g.direction_bin(kTwoPi - 1e-12) == 35);
  CHECK(g.speed_bin(0.2) == 1);
  bool clipped = false;
  CHECK(g.speed_bin(9.0, &clipped) == 24);
  CHECK(clipped);
  CHECK(g.speed_bin(5.0) == 24);
  CHECK_THROWS_AS(BinGeometry::make(0, 5, 36), ConfigError);
  CHECK_THROWS_AS(BinGeometry::make(0.2, 5, 0), ConfigError);
}

TEST_CASE("gamma_r counts") {
  const auto g = BinGeometry::standard();
  std::vector<DirectionSpeed> same(7, {0.3, 1.1});
  const auto a = estimate_gamma_r(same, g).histogram;
  CHECK(a.probs[g.index_of(0.3, 1.1)] == 1.0);

  std::vector<DirectionSpeed> all;
  for (int d = 0; d < 36; ++d)
    for (int s = 0; s < 25; ++s) all.push_back({g.direction_center(d), g.speed_center(s)});
  const auto u = estimate_gamma_r(all, g).histogram;
  for (double p : u.probs) CHECK(p == doctest::Approx(1.0 / 900));

  const std::vector<DirectionSpeed> three{{0.1, 0.1}, {0.1, 0.1}, {2.0, 1.0}};
  const auto t = estimate_gamma_r(three, g).histogram;
  CHECK(t.probs[g.index_of(0.1, 0.1)] == doctest::Approx(2.0 / 3));
  CHECK(t.probs[g.index_of(2.0, 1.0)] == doctest::Approx(1.0 / 3));
  CHECK_THROWS_AS(estimate_gamma_r({}, g), DataError);
}

TEST_CASE("measurement model") {
  const double sw = deg_to_rad(10), sv = 0.2;
  const double centre = measurement_model({1.0, 1.0}, {1.0, 1.0}, sw, sv);
  CHECK(centre == doctest::Approx(1.0 / (2 * kPi * sw * sv)).epsilon(1e-14));
  // one sigma off in direction
  const double off = measurement_model({1.0 + 0.17453292519943295, 1.0}, {1.0, 1.0}, sw, sv);
  CHECK(off / centre == doctest::Approx(0.6065306597126334).epsilon(1e-12));
  CHECK(off / centre == doctest::Approx(0.6065).epsilon(1e-4));
  // wraps across zero
  CHECK(measurement_model({0.05, 1.0}, {kTwoPi - 0.05, 1.0}, sw, sv) ==
        doctest::Approx(measurement_model({0.1, 1.0}, {0.0, 1.0}, sw, sv)));
  CHECK_THROWS_AS(measurement_model({0, 0}, {0, 0}, 0, 1), ConfigError);
}

TEST_CASE("constant signal concentrates") {
  const auto g = BinGeometry::standard();
  const auto fp = FilterParams::for_geometry(g);
  const DirectionSpeed z{g.direction_center(5), g.speed_center(6)};
  const std::vector<DirectionSpeed> obs(200, z);
  const auto h = extract_laminar(obs, g, fp);
  const int want = g.index_of(z.omega, z.nu);
  int arg = 0;
  for (int j = 1; j < g.size(); ++j)
    if (h.probs[j] > h.probs[arg]) arg = j;
  CHECK(arg == want);
  CHECK(h.probs[want] > 1.0 / 900);
  CHECK(sum(h.probs) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single observation normalises") {
  const auto g = BinGeometry::standard();
  const auto h = extract_laminar(std::vector<DirectionSpeed>{{1.0, 1.3}}, g, FilterParams::for_geometry(g));
  CHECK(sum(h.probs) == doctest::Approx(1.0).epsilon(1e-12));
  for (double p : h.probs) CHECK(p > 0.0);
  CHECK_THROWS_AS(extract_laminar({}, g, FilterParams::for_geometry(g)), DataError);
  CHECK_THROWS_AS(extract_laminar(std::vector<DirectionSpeed>{{1.0, 1.3}}, g, FilterParams{0, 1}), ConfigError);
}

TEST_CASE("6-state toy equals a literal transcription") {
  // 3 direction x 2 speed bins of 0.5 m/s on [0, 1]
  const auto g = BinGeometry::make(0.5, 1.0, 3);
  REQUIRE(g.size() == 6);
  const oracle::ToyGeometry tg{3, 2, 0.5};
  std::vector<DirectionSpeed> z;
  std::vector<std::pair<double, double>> oz;
  const double script[20][2] = {{0.1, 0.2},  {0.3, 0.4},  {2.2, 0.7},  {2.0, 0.9},  {4.5, 0.3}, {4.4, 0.6},  {0.2, 0.1},
                                {6.1, 0.8},  {1.5, 0.5},  {3.3, 0.2},  {3.0, 0.95}, {5.9, 0.6}, {0.05, 0.3}, {2.5, 0.4},
                                {4.0, 0.75}, {1.05, 0.15}, {5.2, 0.55}, {0.7, 0.85}, {2.9, 0.05}, {6.2, 0.45}};
  for (const auto& s : script) {
    z.push_back({s[0], s[1]});
    oz.emplace_back(s[0], s[1]);
  }
  const double sw = g.direction_bin_width(), sv = g.speed_bin_width();
  const auto h = extract_laminar(z, g, {sw, sv, false});
  const auto o = oracle::alg1(tg, oz, sw, sv);
  for (int j = 0; j < 6; ++j) CHECK(std::fabs(h.probs[j] - o[j]) <= 1e-12);
  const auto d = reference::extract_laminar_dense(z, g, {sw, sv, false});
  for (int j = 0; j < 6; ++j) CHECK(std::fabs(d.probs[j] - o[j]) <= 1e-12);
}

TEST_CASE("shared-row kernel equals the dense form") {
  const auto g = BinGeometry::standard();
  Rng rng(21);
  for (int trial = 0; trial < 3; ++trial) {
    auto z = random_obs(rng, 40, 3.0);
    for (int i = 0; i < 40; ++i) z.push_back({0.2 + 0.05 * rng.normal(), 1.2});
    const auto a = extract_laminar(z, g, FilterParams::for_geometry(g));
    const auto b = reference::extract_laminar_dense(z, g, FilterParams::for_geometry(g));
    double worst = 0;
    for (int j = 0; j < g.size(); ++j) worst = std::max(worst, std::fabs(a.probs[j] - b.probs[j]));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("kl divergence") {
  const auto g = BinGeometry::make(0.5, 0.5, 2);
  REQUIRE(g.size() == 2);
  DSHistogram p{g, {0.75, 0.25}, 0}, q{g, {0.5, 0.5}, 0};
  // 0.75 ln 1.5 + 0.25 ln 0.5
  CHECK(kl_divergence(p, q).nats == doctest::Approx(0.130812035).epsilon(1e-8));
  CHECK(kl_divergence(p, p).nats == 0.0);
  DSHistogram z{g, {1.0, 0.0}, 0};
  const auto r = kl_divergence(q, z);
  CHECK(std::isfinite(r.nats));
  CHECK(r.floored_bins == 1);
  DSHistogram other{BinGeometry::standard(), std::vector<double>(900, 1.0 / 900), 0};
  CHECK_THROWS_AS(kl_divergence(p, other), DataError);
}

TEST_CASE("kl is non-negative on random histograms") {
  const auto g = BinGeometry::standard();
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    DSHistogram a{g, std::vector<double>(900), 0}, b{g, std::vector<double>(900), 0};
    double sa = 0, sb = 0;
    for (int j = 0; j < 900; ++j) {
      a.probs[j] = rng.uniform01() < 0.3 ? rng.uniform01() : 0.0;
      b.probs[j] = rng.uniform01();
      sa += a.probs[j];
      sb += b.probs[j];
    }
    if (sa == 0) continue;
    for (int j = 0; j < 900; ++j) {
      a.probs[j] /= sa;
      b.probs[j] /= sb;
    }
    CHECK(kl_divergence(a, b).nats >= 0.0);
  }
}
