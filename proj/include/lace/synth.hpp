#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "lace/core.hpp"
#include "lace/ingest.hpp"

namespace lace {

struct Lane {
  std::vector<Vec2> waypoints;  // centreline, entry first
  double width = 0.0;           // agents keep a fixed lateral offset drawn in [-width/2, width/2)
  double speed = 1.2;           // nominal m/s
};

struct FlowScenario {
  std::string name;
  Region bounds;
  std::vector<Lane> lanes;
  double turbulence_fraction = 0.0;
  double direction_jitter = 0.0;  // std of per-step heading noise, radians
  double speed_jitter = 0.0;      // std of per-step speed noise, m/s
  int agents = 0;
  std::uint64_t seed = 1;
  int walk_steps = 30;      // length of a random walk in steps
  int spawn_window = 200;   // start step drawn uniformly from [0, spawn_window)
};

/// Throws ConfigError describing the first problem found.
void validate(const FlowScenario& scenario);

/// Lane followers use pure pursuit on their offset centreline at the nominal
/// speed with Gaussian heading and speed noise, and stop at the lane end or
/// the bounds. The first round(turbulence_fraction * agents) agents are random
/// walkers: each step draws a uniform heading and a speed uniform in
/// [0.3, 1.8] m/s, redrawing (up to 32 times) steps that would leave the
/// bounds. Deterministic given the seed and independent of thread count.
std::vector<Trajectory> generate(const FlowScenario& scenario, double dt);

std::vector<std::string> builtin_scenario_names();
/// straight-east, bidirectional-corridor, curved-arc or mixed-50. Throws
/// ConfigError for other names.
FlowScenario builtin_scenario(const std::string& name);

nlohmann::json scenario_to_json(const FlowScenario& scenario);
/// Missing optional fields take their defaults; the result is validated.
FlowScenario scenario_from_json(const nlohmann::json& doc);
FlowScenario load_scenario(const std::filesystem::path& path);

}  // namespace lace
