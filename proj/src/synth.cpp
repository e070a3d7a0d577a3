#include "lace/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lace/error.hpp"
#include "lace/io.hpp"
#include "lace/parallel.hpp"
#include "lace/rng.hpp"

namespace lace {
namespace {

constexpr double kWalkSpeedMin = 0.3;
constexpr double kWalkSpeedMax = 1.8;
constexpr int kWalkRedraws = 32;

class Polyline {
 public:
  explicit Polyline(const std::vector<Vec2>& pts) : pts_(pts), cum_(pts.size(), 0.0) {
    for (std::size_t i = 1; i < pts_.size(); ++i)
      cum_[i] = cum_[i - 1] + std::sqrt(squared_distance(pts_[i], pts_[i - 1]));
  }

  double length() const { return cum_.back(); }

  // Point at arc length s with a lateral offset to the left of travel.
  // Outside [0, length] the end segments are extended.
  Vec2 at(double s, double offset) const {
    const std::size_t seg = segment(s);
    const Vec2 a = pts_[seg];
    const Vec2 b = pts_[seg + 1];
    const double len = cum_[seg + 1] - cum_[seg];
    const double tx = (b.x - a.x) / len;
    const double ty = (b.y - a.y) / len;
    const double u = s - cum_[seg];
    return {a.x + tx * u - ty * offset, a.y + ty * u + tx * offset};
  }

  // Arc length of the closest centreline point among segments overlapping [lo, hi].
  double project(Vec2 p, double lo, double hi) const {
    double best_d = INFINITY;
    double best_s = lo;
    for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
      if (cum_[i + 1] < lo || cum_[i] > hi) continue;
      const Vec2 a = pts_[i];
      const Vec2 b = pts_[i + 1];
      const double len = cum_[i + 1] - cum_[i];
      double u = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / (len * len);
      u = std::clamp(u, 0.0, 1.0);
      const Vec2 q{a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
      const double d = squared_distance(p, q);
      if (d < best_d) {
        best_d = d;
        best_s = cum_[i] + u * len;
      }
    }
    return best_s;
  }

 private:
  std::size_t segment(double s) const {
    std::size_t seg = 0;
    while (seg + 2 < pts_.size() && s >= cum_[seg + 1]) ++seg;
    return seg;
  }

  std::vector<Vec2> pts_;
  std::vector<double> cum_;
};

std::string agent_id(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%06d", i);
  return buf;
}

Trajectory lane_agent(const FlowScenario& sc, const Polyline& line, const Lane& lane, Rng& rng, double dt,
                      std::int64_t t0) {
  Trajectory tr;
  tr.dt = dt;
  const double offset = (rng.uniform01() - 0.5) * lane.width;
  const double step_len = lane.speed * dt;
  const double lookahead = std::max(1.0, step_len);
  const int max_steps = static_cast<int>(std::ceil(2.0 * line.length() / step_len)) + 4;

  Vec2 p = line.at(0.0, offset);
  double s = 0.0;
  AgentState st;
  st.x = p.x;
  st.y = p.y;
  st.t = t0;
  tr.states.push_back(st);
  for (int k = 0; k < max_steps && s < line.length() - 1e-9; ++k) {
    const Vec2 target = line.at(s + lookahead, offset);
    const double heading = std::atan2(target.y - p.y, target.x - p.x) + sc.direction_jitter * rng.normal();
    const double speed = std::max(0.0, lane.speed + sc.speed_jitter * rng.normal());
    const Vec2 next{p.x + speed * dt * std::cos(heading), p.y + speed * dt * std::sin(heading)};
    if (!sc.bounds.contains(next.x, next.y)) break;
    p = next;
    s = std::max(s, line.project(p, s - 1.0, s + 3.0 * lookahead));
    st.x = p.x;
    st.y = p.y;
    ++st.t;
    tr.states.push_back(st);
  }
  return tr;
}

Trajectory walker(const FlowScenario& sc, Rng& rng, double dt, std::int64_t t0) {
  Trajectory tr;
  tr.dt = dt;
  const Region& b = sc.bounds;
  Vec2 p{rng.uniform(b.xmin, b.xmax), rng.uniform(b.ymin, b.ymax)};
  AgentState st;
  st.x = p.x;
  st.y = p.y;
  st.t = t0;
  tr.states.push_back(st);
  for (int k = 0; k < sc.walk_steps; ++k) {
    bool moved = false;
    for (int attempt = 0; attempt < kWalkRedraws && !moved; ++attempt) {
      const double heading = rng.uniform(0.0, kTwoPi);
      const double speed = rng.uniform(kWalkSpeedMin, kWalkSpeedMax);
      const Vec2 next{p.x + speed * dt * std::cos(heading), p.y + speed * dt * std::sin(heading)};
      if (b.contains(next.x, next.y)) {
        p = next;
        moved = true;
      }
    }
    if (!moved) break;
    st.x = p.x;
    st.y = p.y;
    ++st.t;
    tr.states.push_back(st);
  }
  return tr;
}

}  // namespace

void validate(const FlowScenario& sc) {
  auto fail = [&](const std::string& what) {
    throw ConfigError("scenario '" + sc.name + "': " + what);
  };
  if (!sc.bounds.valid()) fail("bounds must satisfy xmin < xmax and ymin < ymax");
  if (!(sc.turbulence_fraction >= 0.0 && sc.turbulence_fraction <= 1.0)) fail("turbulence_fraction must be in [0, 1]");
  if (!(sc.direction_jitter >= 0.0) || !std::isfinite(sc.direction_jitter)) fail("direction_jitter must be >= 0");
  if (!(sc.speed_jitter >= 0.0) || !std::isfinite(sc.speed_jitter)) fail("speed_jitter must be >= 0");
  if (sc.agents < 0) fail("agents must be >= 0");
  if (sc.walk_steps < 1) fail("walk_steps must be >= 1");
  if (sc.spawn_window < 1) fail("spawn_window must be >= 1");
  for (std::size_t i = 0; i < sc.lanes.size(); ++i) {
    const Lane& lane = sc.lanes[i];
    const std::string tag = "lane " + std::to_string(i) + ": ";
    if (lane.waypoints.size() < 2) fail(tag + "needs at least 2 waypoints");
    if (!(lane.speed > 0.0) || !std::isfinite(lane.speed)) fail(tag + "speed must be positive");
    if (!(lane.width >= 0.0) || !std::isfinite(lane.width)) fail(tag + "width must be >= 0");
    for (std::size_t k = 0; k < lane.waypoints.size(); ++k) {
      const Vec2 w = lane.waypoints[k];
      if (!sc.bounds.contains(w.x, w.y)) fail(tag + "waypoint " + std::to_string(k) + " lies outside bounds");
      if (k > 0 && squared_distance(w, lane.waypoints[k - 1]) == 0.0)
        fail(tag + "repeated waypoint " + std::to_string(k));
    }
  }
  const long long walkers = std::llround(sc.turbulence_fraction * sc.agents);
  if (walkers < sc.agents && sc.lanes.empty()) fail("lane agents requested but no lanes defined");
}

std::vector<Trajectory> generate(const FlowScenario& sc, double dt) {
  validate(sc);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("generate: dt must be positive");
  const int walkers = static_cast<int>(std::llround(sc.turbulence_fraction * sc.agents));
  std::vector<Polyline> lines;
  for (const Lane& lane : sc.lanes) lines.emplace_back(lane.waypoints);

  std::vector<Trajectory> out(static_cast<std::size_t>(sc.agents));
  parallel_for(sc.agents, [&](std::ptrdiff_t ii) {
    const int i = static_cast<int>(ii);
    Rng rng(derive_seed(sc.seed, static_cast<std::uint64_t>(i)));
    const auto t0 = static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(sc.spawn_window)));
    Trajectory tr;
    if (i < walkers) {
      tr = walker(sc, rng, dt, t0);
    } else {
      const std::size_t lane = rng.index(sc.lanes.size());
      tr = lane_agent(sc, lines[lane], sc.lanes[lane], rng, dt, t0);
    }
    tr.person_id = agent_id(i);
    recompute_velocities(tr);
    out[static_cast<std::size_t>(i)] = std::move(tr);
  });
  std::erase_if(out, [](const Trajectory& t) { return t.size() < 2; });
  return out;
}

std::vector<std::string> builtin_scenario_names() {
  return {"straight-east", "bidirectional-corridor", "curved-arc", "mixed-50"};
}

FlowScenario builtin_scenario(const std::string& name) {
  FlowScenario sc;
  sc.name = name;
  sc.agents = 500;
  sc.seed = 1;
  sc.direction_jitter = 0.05;
  sc.speed_jitter = 0.05;
  if (name == "straight-east" || name == "mixed-50") {
    sc.bounds = {0.0, 40.0, -10.0, 10.0};
    sc.lanes = {Lane{{{0.0, 0.0}, {40.0, 0.0}}, 16.0, 1.2}};
    if (name == "mixed-50") {
      sc.turbulence_fraction = 0.5;
      sc.walk_steps = 33;  // about as long as a lane crossing
    }
  } else if (name == "bidirectional-corridor") {
    sc.bounds = {0.0, 40.0, -10.0, 10.0};
    sc.lanes = {Lane{{{0.0, 0.0}, {40.0, 0.0}}, 16.0, 1.2}, Lane{{{40.0, 0.0}, {0.0, 0.0}}, 16.0, 1.2}};
  } else if (name == "curved-arc") {
    // eastbound approach, left quarter turn of radius 8, northbound exit
    sc.bounds = {-18.0, 12.0, -3.0, 26.0};
    Lane lane;
    lane.width = 2.0;
    lane.speed = 1.2;
    lane.waypoints.push_back({-16.0, 0.0});
    const int n_arc = 18;
    for (int k = 1; k <= n_arc; ++k) {
      const double a = -kPi / 2.0 + (kPi / 2.0) * k / n_arc;
      lane.waypoints.push_back({8.0 * std::cos(a), 8.0 + 8.0 * std::sin(a)});
    }
    lane.waypoints.push_back({8.0, 24.0});
    sc.lanes = {lane};
  } else {
    throw ConfigError("unknown scenario '" + name + "'");
  }
  return sc;
}

nlohmann::json scenario_to_json(const FlowScenario& sc) {
  using nlohmann::json;
  json lanes = json::array();
  for (const Lane& lane : sc.lanes) {
    json pts = json::array();
    for (const Vec2& w : lane.waypoints) pts.push_back({w.x, w.y});
    lanes.push_back({{"waypoints", pts}, {"width", lane.width}, {"speed", lane.speed}});
  }
  return {{"name", sc.name},
          {"bounds", {{"xmin", sc.bounds.xmin}, {"xmax", sc.bounds.xmax}, {"ymin", sc.bounds.ymin}, {"ymax", sc.bounds.ymax}}},
          {"lanes", lanes},
          {"turbulence_fraction", sc.turbulence_fraction},
          {"direction_jitter", sc.direction_jitter},
          {"speed_jitter", sc.speed_jitter},
          {"agents", sc.agents},
          {"seed", sc.seed},
          {"walk_steps", sc.walk_steps},
          {"spawn_window", sc.spawn_window}};
}

namespace {

template <typename T>
void read_opt(const nlohmann::json& doc, const char* key, T& out) {
  const auto it = doc.find(key);
  if (it == doc.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("scenario: field '") + key + "' has the wrong type");
  }
}

double req_number(const nlohmann::json& obj, const std::string& field, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw ConfigError("scenario: field '" + field + key + "' must be a number");
  return it->get<double>();
}

}  // namespace

FlowScenario scenario_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("scenario: document must be an object");
  FlowScenario sc;
  read_opt(doc, "name", sc.name);
  const auto b = doc.find("bounds");
  if (b == doc.end() || !b->is_object()) throw ConfigError("scenario: field 'bounds' must be an object");
  sc.bounds = {req_number(*b, "bounds.", "xmin"), req_number(*b, "bounds.", "xmax"), req_number(*b, "bounds.", "ymin"),
               req_number(*b, "bounds.", "ymax")};
  if (const auto lanes = doc.find("lanes"); lanes != doc.end()) {
    if (!lanes->is_array()) throw ConfigError("scenario: field 'lanes' must be an array");
    for (std::size_t i = 0; i < lanes->size(); ++i) {
      const auto& lj = (*lanes)[i];
      const std::string field = "lanes[" + std::to_string(i) + "].";
      if (!lj.is_object()) throw ConfigError("scenario: field 'lanes[" + std::to_string(i) + "]' must be an object");
      Lane lane;
      const auto w = lj.find("waypoints");
      if (w == lj.end() || !w->is_array()) throw ConfigError("scenario: field '" + field + "waypoints' must be an array");
      for (const auto& p : *w) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
          throw ConfigError("scenario: field '" + field + "waypoints' entries must be [x, y]");
        lane.waypoints.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      lane.width = req_number(lj, field, "width");
      lane.speed = req_number(lj, field, "speed");
      sc.lanes.push_back(std::move(lane));
    }
  }
  read_opt(doc, "turbulence_fraction", sc.turbulence_fraction);
  read_opt(doc, "direction_jitter", sc.direction_jitter);
  read_opt(doc, "speed_jitter", sc.speed_jitter);
  read_opt(doc, "agents", sc.agents);
  read_opt(doc, "seed", sc.seed);
  read_opt(doc, "walk_steps", sc.walk_steps);
  read_opt(doc, "spawn_window", sc.spawn_window);
  validate(sc);
  return sc;
}

FlowScenario load_scenario(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("scenario '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(doc);
}

}  // namespace lace
