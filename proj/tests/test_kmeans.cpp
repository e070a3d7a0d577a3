#include <cmath>

#include "doctest.h"
#include "lace/error.hpp"
#include "lace/kmeans.hpp"
#include "lace/reference.hpp"
#include "oracles.hpp"

using namespace lace;

TEST_CASE("two separated blobs") {
  std::vector<Vec2> pts;
  Rng rng(4);
  for (int i = 0; i < 50; ++i) pts.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
  for (int i = 0; i < 50; ++i) pts.push_back({100 + rng.uniform(-1, 1), 50 + rng.uniform(-1, 1)});
  const auto r = kmeans_xy(pts, 2, 1);
  REQUIRE(r.centroids.size() == 2);
  for (int c = 0; c < 2; ++c) {
    const int base = r.assignment[0] == c ? 0 : 50;
    double mx = 0, my = 0;
    for (int i = base; i < base + 50; ++i) {
      CHECK(r.assignment[i] == c);
      mx += pts[i].x / 50;
      my += pts[i].y / 50;
    }
    CHECK(r.centroids[c].x == doctest::Approx(mx).epsilon(1e-12));
    CHECK(r.centroids[c].y == doctest::Approx(my).epsilon(1e-12));
  }
  CHECK(r.converged);
}

TEST_CASE("K=1 is the global mean") {
  std::vector<Vec2> pts{{0, 0}, {2, 0}, {4, 6}};
  const auto r = kmeans_xy(pts, 1, 3);
  CHECK(r.centroids[0].x == doctest::Approx(2.0));
  CHECK(r.centroids[0].y == doctest::Approx(2.0));
}

TEST_CASE("K above distinct positions is reduced") {
  std::vector<Vec2> pts{{0, 0}, {0, 0}, {1, 1}};
  const auto r = kmeans_xy(pts, 5, 3);
  CHECK(r.effective_k == 2);
  CHECK(r.requested_k == 5);
  CHECK(!r.warnings.empty());
  CHECK_THROWS_AS(kmeans_xy({}, 2, 1), DataError);
  CHECK_THROWS_AS(kmeans_xy(pts, 0, 1), ConfigError);
}

TEST_CASE("10x10 grid K=4 matches an independent Lloyd oracle bit for bit") {
  std::vector<Vec2> pts;
  std::vector<oracle::P> opts;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      pts.push_back({static_cast<double>(i), static_cast<double>(j)});
      opts.push_back({static_cast<double>(i), static_cast<double>(j)});
    }
  for (std::uint64_t seed : {1ULL, 2ULL, 42ULL, 1234ULL}) {
    const auto r = kmeans_xy(pts, 4, seed);
    const auto o = oracle::lloyd(opts, 4, seed, 100);
    CHECK(r.sse(pts) == o.sse);
    CHECK(r.assignment == o.label);
  }
}

TEST_CASE("random clouds match the oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 100);
    std::vector<Vec2> pts;
    std::vector<oracle::P> opts;
    for (int i = 0; i < 400; ++i) {
      const double x = rng.uniform(-20, 20), y = rng.normal() * 4;
      pts.push_back({x, y});
      opts.push_back({x, y});
    }
    const int k = 3 + static_cast<int>(seed);
    const auto r = kmeans_xy(pts, k, seed);
    const auto o = oracle::lloyd(opts, k, seed, 100);
    if (r.warnings.empty()) {
      CHECK(r.sse(pts) == o.sse);
    }
  }
}

TEST_CASE("parallel k-means equals the serial reference") {
  Rng rng(8);
  std::vector<Vec2> pts;
  for (int i = 0; i < 5000; ++i) pts.push_back({rng.uniform(0, 50), rng.uniform(0, 30)});
  const auto a = kmeans_xy(pts, 60, 5);
  const auto b = reference::kmeans_xy(pts, 60, 5);
  CHECK(a.assignment == b.assignment);
  for (std::size_t c = 0; c < a.centroids.size(); ++c) {
    CHECK(a.centroids[c].x == b.centroids[c].x);
    CHECK(a.centroids[c].y == b.centroids[c].y);
  }
}

TEST_CASE("spatial index equals a linear scan") {
  Rng rng(12);
  std::vector<Vec2> cents;
  for (int i = 0; i < 300; ++i) cents.push_back({rng.uniform(-30, 30), rng.uniform(-5, 25)});
  cents.push_back(cents[7]);  // duplicate: ties go to the lower index
  const SpatialIndex idx(cents);
  for (int q = 0; q < 1000; ++q) {
    const Vec2 p{rng.uniform(-60, 60), rng.uniform(-40, 60)};
    int best = 0;
    for (std::size_t c = 1; c < cents.size(); ++c)
      if (squared_distance(p, cents[c]) < squared_distance(p, cents[best])) best = static_cast<int>(c);
    const auto hit = idx.nearest(p);
    REQUIRE(hit.index == best);
    CHECK(hit.distance == std::sqrt(squared_distance(p, cents[best])));
  }
  CHECK(idx.nearest(cents[7]).index == 7);
  CHECK(SpatialIndex().nearest({0, 0}).index == -1);
}
