#include <cmath>
#include <sstream>

#include "doctest.h"
#include "lace/error.hpp"
#include "lace/ingest.hpp"
#include "support.hpp"

using namespace lace;

namespace {

ParseResult parse(const std::string& text, const CsvSchema& schema, bool strict = true) {
  std::istringstream in(text);
  return parse_csv(in, schema, strict);
}

}  // namespace

TEST_CASE("atc rows convert mm to meters") {
  const auto r = parse("1351651349.123,9200100,-12345,6789,1000,1250,0.5,0.4\n", CsvSchema::atc());
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].x == doctest::Approx(-12.345));
  CHECK(r.records[0].y == doctest::Approx(6.789));
  CHECK(r.records[0].person_id == "9200100");
  CHECK(r.records[0].time == doctest::Approx(1351651349.123));
  REQUIRE(r.records[0].speed);
  CHECK(*r.records[0].speed == doctest::Approx(1.25));
}

TEST_CASE("empty stream gives no records") {
  CHECK(parse("", CsvSchema::atc()).records.empty());
  CHECK(parse("", CsvSchema::generic()).records.empty());
}

TEST_CASE("strict mode reports the bad line") {
  const std::string text = "time,person_id,x,y\n0,a,0,0\n1,a,oops,0\n";
  try {
    parse(text, CsvSchema::generic(), true);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find('3') != std::string::npos);
  }
  const auto lenient = parse(text, CsvSchema::generic(), false);
  CHECK(lenient.records.size() == 1);
  REQUIRE(lenient.skipped.size() == 1);
  CHECK(lenient.skipped[0].line == 3);
}

TEST_CASE("missing required column is a config error") {
  CHECK_THROWS_AS(parse("time,person_id,x\n0,a,0\n", CsvSchema::generic()), ConfigError);
}

TEST_CASE("resample one second apart") {
  const auto r = parse("time,person_id,x,y\n0,a,0,0\n1,a,1,0\n", CsvSchema::generic());
  const auto rs = resample(r.records, 1.0);
  REQUIRE(rs.trajectories.size() == 1);
  const auto& t = rs.trajectories[0];
  REQUIRE(t.size() == 2);
  CHECK(t.states[1].nu == doctest::Approx(1.0));
  CHECK(t.states[1].omega == doctest::Approx(0.0));
}

TEST_CASE("single-sample person is dropped") {
  const auto r = parse("time,person_id,x,y\n0,a,0,0\n0,b,0,0\n1,b,0,1\n", CsvSchema::generic());
  const auto rs = resample(r.records, 1.0);
  REQUIRE(rs.trajectories.size() == 1);
  CHECK(rs.trajectories[0].person_id == "b");
  CHECK(rs.dropped_tracks == 1);
}

TEST_CASE("10 Hz straight walker downsampled to 1 s keeps unit speed") {
  // exact synthetic input against the closed form x = t
  std::vector<RawRecord> recs;
  for (int i = 0; i <= 300; ++i) {
    RawRecord r;
    r.time = 1000.0 + i * 0.1;
    r.person_id = "w";
    r.x = 5.0 + r.time - 1000.0;
    r.y = -2.0;
    recs.push_back(r);
  }
  const auto rs = resample(recs, 1.0);
  REQUIRE(rs.trajectories.size() == 1);
  const auto& t = rs.trajectories[0];
  CHECK(t.size() == 31);
  for (std::size_t i = 1; i < t.size(); ++i) {
    CHECK(std::fabs(t.states[i].nu - 1.0) < 1e-9);
    CHECK(t.states[i].t == t.states[i - 1].t + 1);
  }
  CHECK(rs.discarded_records == 301 - 31);
}

TEST_CASE("gaps split a track") {
  std::vector<RawRecord> recs;
  for (double tm : {0.0, 1.0, 2.0, 5.0, 6.0}) recs.push_back({tm, "p", tm, 0.0, {}, {}});
  const auto rs = resample(recs, 1.0);
  REQUIRE(rs.trajectories.size() == 2);
  CHECK(rs.trajectories[0].size() == 3);
  CHECK(rs.trajectories[1].size() == 2);
  for (const auto& t : rs.trajectories) CHECK_NOTHROW(validate(t));
}

TEST_CASE("make_tasks window arithmetic") {
  const std::vector<Trajectory> t23{test::line("a", 0, 0, 0, 1, 23)};
  auto tasks = make_tasks(t23, 3, 20, 23);
  REQUIRE(tasks.size() == 1);
  CHECK(tasks[0].observed.size() == 3);
  CHECK(tasks[0].effective_horizon() == 20);
  CHECK(tasks[0].ground_truth.states.front().t == tasks[0].observed.states.back().t + 1);
  CHECK(tasks[0].id == "a@2");

  tasks = make_tasks({test::line("a", 0, 0, 0, 1, 10)}, 3, 20, 23);
  REQUIRE(tasks.size() == 1);
  CHECK(tasks[0].effective_horizon() == 7);
  CHECK(tasks[0].horizon_steps == 20);

  CHECK(make_tasks({test::line("a", 0, 0, 0, 1, 3)}, 3, 20, 23).empty());
  CHECK_THROWS_AS(make_tasks(t23, 3, 2.5, 0), ConfigError);
}

TEST_CASE("make_tasks default stride does not overlap") {
  const auto tasks = make_tasks({test::line("a", 0, 0, 0, 1, 60)}, 3, 20);
  REQUIRE(tasks.size() == 3);
  CHECK(tasks[1].observed.states.front().t == 23);
  CHECK(tasks[2].effective_horizon() == 11);
}

TEST_CASE("region filter modes") {
  const std::vector<Trajectory> trajs{test::line("a", -5, 0, 0, 1, 11), test::line("b", 1, 1, 0, 1, 3)};
  const Region r{0, 10, -1, 2};
  const auto clipped = filter_region(trajs, r, RegionMode::kClip);
  REQUIRE(clipped.size() == 2);
  CHECK(clipped[0].states.front().x == doctest::Approx(0.0));
  CHECK(clipped[0].size() == 6);
  const auto contained = filter_region(trajs, r, RegionMode::kContain);
  REQUIRE(contained.size() == 1);
  CHECK(contained[0].person_id == "b");
  CHECK_THROWS_AS(filter_region(trajs, Region{1, 0, 0, 1}, RegionMode::kClip), ConfigError);
  CHECK_THROWS_AS(parse_region_mode("inside"), ConfigError);
}

TEST_CASE("split keeps time disjoint") {
  const std::vector<Trajectory> trajs{test::line("a", 0, 0, 0, 1, 100), test::line("b", 0, 5, 0, 1, 40, 70)};
  const auto split = split_dataset(trajs, 50, 3, 20);
  for (const auto& t : split.training)
    for (const auto& s : t.states) CHECK(s.t < 50);
  REQUIRE(!split.evaluation.empty());
  for (const auto& task : split.evaluation) {
    for (const auto& s : task.observed.states) CHECK(s.t >= 50);
    for (const auto& s : task.ground_truth.states) CHECK(s.t >= 50);
  }
}

TEST_CASE("normalized csv round trip") {
  std::vector<Trajectory> trajs{test::line("a", 0.1, 0.2, 0.3, 1.1, 5, 7), test::line("b", -1, 2, 4, 0.7, 3)};
  std::ostringstream out;
  write_trajectories_csv(out, trajs, "first\nsecond");
  const std::string text = out.str();
  CHECK(text.rfind("# first\n# second\n", 0) == 0);
  std::istringstream in(text);
  const auto back = read_trajectories_csv(in);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(back[i].size() == trajs[i].size());
    CHECK(back[i].person_id == trajs[i].person_id);
    for (std::size_t k = 0; k < back[i].size(); ++k) {
      CHECK(back[i].states[k].x == trajs[i].states[k].x);
      CHECK(back[i].states[k].y == trajs[i].states[k].y);
      CHECK(back[i].states[k].omega == trajs[i].states[k].omega);
      CHECK(back[i].states[k].t == trajs[i].states[k].t);
    }
  }
}
