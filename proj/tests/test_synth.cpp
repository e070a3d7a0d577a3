#include <cmath>
#include <sstream>

#include "doctest.h"
#include "lace/error.hpp"
#include "lace/histogram.hpp"
#include "lace/ingest.hpp"
#include "lace/synth.hpp"
#include "support.hpp"

using namespace lace;

namespace {

FlowScenario one_lane() {
  FlowScenario sc;
  sc.name = "lane";
  sc.bounds = {0, 40, -5, 5};
  sc.lanes = {Lane{{{0, 0}, {40, 0}}, 0.0, 1.2}};
  sc.agents = 50;
  sc.seed = 3;
  return sc;
}

}  // namespace

TEST_CASE("noise-free lane is collinear") {
  const auto trajs = generate(one_lane(), 1.0);
  REQUIRE(trajs.size() == 50);
  for (const auto& t : trajs) {
    CHECK_NOTHROW(validate(t));
    for (const auto& s : t.states) {
      CHECK(s.y == 0.0);
      CHECK(s.x >= 0.0);
      CHECK(s.x <= 40.0);
    }
  }
}

TEST_CASE("all walkers give uniform headings") {
  FlowScenario sc;
  sc.name = "walk";
  sc.bounds = {-1e6, 1e6, -1e6, 1e6};
  sc.turbulence_fraction = 1.0;
  sc.agents = 3500;
  sc.walk_steps = 30;
  const auto trajs = generate(sc, 1.0);
  const auto g = BinGeometry::standard();
  std::vector<long> counts(36, 0);
  long n = 0;
  for (const auto& t : trajs)
    for (std::size_t i = 1; i < t.size(); ++i) {
      ++counts[g.direction_bin(t.states[i].omega)];
      ++n;
    }
  REQUIRE(n >= 100000);
  const double p = 1.0 / 36, sd = std::sqrt(n * p * (1 - p));
  for (long c : counts) CHECK(std::fabs(c - n * p) <= 3 * sd);
}

TEST_CASE("zero agents") {
  auto sc = one_lane();
  sc.agents = 0;
  CHECK(generate(sc, 1.0).empty());
}

TEST_CASE("same seed same corpus, other seed differs") {
  auto sc = builtin_scenario("mixed-50");
  sc.agents = 80;
  std::ostringstream a, b, c;
  write_trajectories_csv(a, generate(sc, 1.0));
  write_trajectories_csv(b, generate(sc, 1.0));
  sc.seed = 2;
  write_trajectories_csv(c, generate(sc, 1.0));
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
}

TEST_CASE("builtins validate and stay in bounds") {
  for (const auto& name : builtin_scenario_names()) {
    auto sc = builtin_scenario(name);
    CHECK_NOTHROW(validate(sc));
    sc.agents = 60;
    for (const auto& t : generate(sc, 1.0))
      for (const auto& s : t.states) CHECK(sc.bounds.contains(s.x, s.y));
  }
  CHECK_THROWS_AS(builtin_scenario("nope"), ConfigError);
}

TEST_CASE("scenario validation") {
  auto sc = one_lane();
  sc.turbulence_fraction = 1.5;
  CHECK_THROWS_AS(validate(sc), ConfigError);
  sc = one_lane();
  sc.lanes[0].waypoints = {{0, 0}};
  CHECK_THROWS_AS(validate(sc), ConfigError);
  sc = one_lane();
  sc.lanes[0].waypoints[1] = {50, 0};
  CHECK_THROWS_AS(validate(sc), ConfigError);
  sc = one_lane();
  sc.lanes.clear();
  CHECK_THROWS_AS(validate(sc), ConfigError);
  sc.turbulence_fraction = 1.0;
  CHECK_NOTHROW(validate(sc));
  sc.agents = -1;
  CHECK_THROWS_AS(validate(sc), ConfigError);
}

TEST_CASE("scenario json round trip") {
  const auto sc = builtin_scenario("curved-arc");
  const auto back = scenario_from_json(scenario_to_json(sc));
  CHECK(scenario_to_json(back) == scenario_to_json(sc));
  auto doc = scenario_to_json(sc);
  doc.erase("walk_steps");
  CHECK(scenario_from_json(doc).walk_steps == 30);
  doc["turbulence_fraction"] = 2.0;
  CHECK_THROWS_AS(scenario_from_json(doc), ConfigError);
}

TEST_CASE("walkers come first") {
  auto sc = builtin_scenario("mixed-50");
  sc.agents = 10;
  sc.direction_jitter = 0;
  sc.speed_jitter = 0;
  const auto trajs = generate(sc, 1.0);
  // lane followers at zero jitter never turn
  int straight = 0;
  for (const auto& t : trajs) {
    bool turned = false;
    for (std::size_t i = 2; i < t.size(); ++i) turned = turned || circular_distance(t.states[i].omega, 0.0) > 1e-9;
    straight += !turned;
  }
  CHECK(straight == 5);
}
