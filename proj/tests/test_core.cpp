#include <cmath>
#include <set>

#include "doctest.h"
#include "lace/core.hpp"
#include "lace/error.hpp"
#include "lace/rng.hpp"

using namespace lace;

TEST_CASE("wrap_angle") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kTwoPi) == doctest::Approx(0.0));
  CHECK(wrap_angle(-kPi / 2) == doctest::Approx(3 * kPi / 2));
  CHECK_THROWS_AS(wrap_angle(NAN), DataError);
  CHECK_THROWS_AS(wrap_angle(INFINITY), DataError);
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.uniform(-1000.0, 1000.0);
    const double w = wrap_angle(a);
    REQUIRE(w >= 0.0);
    REQUIRE(w < kTwoPi);
    CHECK(std::cos(w) == doctest::Approx(std::cos(a)).epsilon(1e-9));
    CHECK(std::sin(w) == doctest::Approx(std::sin(a)).epsilon(1e-9));
  }
}

TEST_CASE("circular_distance") {
  CHECK(circular_distance(1.3, 1.3) == 0.0);
  CHECK(circular_distance(deg_to_rad(350), deg_to_rad(10)) == doctest::Approx(deg_to_rad(20)));
  CHECK(circular_distance(0.0, kPi) == doctest::Approx(kPi));
  Rng rng(3);
  for (int i = 0; i < 5000; ++i) {
    const double a = rng.uniform(-10, 10), b = rng.uniform(-10, 10);
    const double d = circular_distance(a, b);
    REQUIRE(d >= 0.0);
    REQUIRE(d <= kPi + 1e-12);
    CHECK(d == doctest::Approx(circular_distance(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("signed_angular_delta") {
  CHECK(signed_angular_delta(0.0, kPi / 4) == doctest::Approx(kPi / 4));
  CHECK(signed_angular_delta(deg_to_rad(350), deg_to_rad(10)) == doctest::Approx(deg_to_rad(20)));
  CHECK(signed_angular_delta(kPi / 4, kPi / 4) == 0.0);
  Rng rng(5);
  for (int i = 0; i < 5000; ++i) {
    const double a = rng.uniform(0, kTwoPi), b = rng.uniform(0, kTwoPi);
    const double d = signed_angular_delta(a, b);
    REQUIRE(d > -kPi - 1e-12);
    REQUIRE(d <= kPi + 1e-12);
    CHECK(std::fabs(d) == doctest::Approx(circular_distance(a, b)).epsilon(1e-9));
    CHECK(circular_distance(wrap_angle(a + d), b) < 1e-9);
  }
}

TEST_CASE("propagate") {
  const AgentState s0 = AgentState::make(0, 0, 0, 1, 0);
  const AgentState e = propagate(s0, 0.0, 1.0, 1.0);
  CHECK(e.x == doctest::Approx(1.0));
  CHECK(e.y == doctest::Approx(0.0));
  CHECK(e.t == 1);
  const AgentState n = propagate(s0, kPi / 2, 2.0, 1.0);
  CHECK(n.x == doctest::Approx(0.0));
  CHECK(n.y == doctest::Approx(2.0));
  const AgentState z = propagate(AgentState::make(3, 4, 1, 1, 5), 2.0, 0.0, 1.0);
  CHECK(z.x == 3.0);
  CHECK(z.y == 4.0);
  CHECK(z.omega == 2.0);
}

TEST_CASE("AgentState::make rejects bad values") {
  CHECK_THROWS_AS(AgentState::make(0, 0, 0, -1, 0), DataError);
  CHECK_THROWS_AS(AgentState::make(NAN, 0, 0, 1, 0), DataError);
  CHECK(AgentState::make(0, 0, -kPi / 2, 1, 0).omega == doctest::Approx(3 * kPi / 2));
}

TEST_CASE("trajectory validation") {
  Trajectory t;
  t.person_id = "a";
  t.states = {AgentState::make(0, 0, 0, 1, 0)};
  CHECK_THROWS_AS(validate(t), DataError);
  t.states.push_back(AgentState::make(1, 0, 0, 1, 2));
  CHECK_THROWS_AS(validate(t), DataError);
  t.states[1].t = 1;
  CHECK_NOTHROW(validate(t));
  t.dt = 0.0;
  CHECK_THROWS_AS(validate(t), DataError);
}

TEST_CASE("recompute_velocities uses backward differences") {
  Trajectory t;
  t.dt = 0.5;
  t.states = {AgentState::make(0, 0, 0, 0, 0), AgentState::make(0, 1, 0, 0, 1), AgentState::make(-1, 1, 0, 0, 2)};
  recompute_velocities(t);
  CHECK(t.states[1].nu == doctest::Approx(2.0));
  CHECK(t.states[1].omega == doctest::Approx(kPi / 2));
  CHECK(t.states[0].omega == t.states[1].omega);
  CHECK(t.states[2].omega == doctest::Approx(kPi));
}

TEST_CASE("seconds_to_steps") {
  CHECK(seconds_to_steps(20, 1, "h") == 20);
  CHECK(seconds_to_steps(3, 0.5, "h") == 6);
  CHECK_THROWS_AS(seconds_to_steps(2.5, 1, "h"), ConfigError);
  CHECK_THROWS_AS(seconds_to_steps(0, 1, "h"), ConfigError);
}

TEST_CASE("rng streams") {
  Rng a(11), b(11);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(r.index(7) < 7u);
  }
  std::set<std::uint64_t> seeds;
  for (std::uint64_t m = 0; m < 10; ++m)
    for (std::uint64_t s = 0; s < 10; ++s) seeds.insert(derive_seed(42, m, s));
  CHECK(seeds.size() == 100);
}

TEST_CASE("normal draws have unit moments") {
  Rng r(9);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::fabs(s / n) < 0.01);
  CHECK(std::fabs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("fnv1a known vectors") {
  Fnv1a h;
  CHECK(h.digest() == 0xcbf29ce484222325ULL);
  h.update(std::string_view("a"));
  CHECK(h.digest() == 0xaf63dc4c8601ec8cULL);
  Fnv1a g;
  g.update(std::string_view("foobar"));
  CHECK(g.digest() == 0x85944171f73967e8ULL);
}
