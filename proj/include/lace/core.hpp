#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace lace {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double squared_distance(Vec2 a, Vec2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Maps any finite angle into [0, 2pi). Throws DataError on NaN/inf.
double wrap_angle(double theta);

/// Great-circle distance on the unit circle, in [0, pi].
double circular_distance(double a, double b);

/// Smallest signed rotation carrying `from` onto `to`, in (-pi, pi].
double signed_angular_delta(double from, double to);

/// Kinematic state of one person at one time step. `t` is an integer step
/// index; the step length lives on the owning Trajectory.
struct AgentState {
  double x = 0.0;
  double y = 0.0;
  double omega = 0.0;  // heading, radians in [0, 2pi)
  double nu = 0.0;     // speed, m/s
  std::int64_t t = 0;

  /// Validating constructor: wraps omega, rejects negative or non-finite input.
  static AgentState make(double x, double y, double omega, double nu, std::int64_t t);

  Vec2 position() const { return {x, y}; }
};

/// One constant-speed, constant-heading step of length dt.
AgentState propagate(const AgentState& state, double omega_next, double nu_next, double dt);

struct Trajectory {
  std::string person_id;
  double dt = 1.0;
  std::vector<AgentState> states;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
};

/// Throws DataError if the trajectory breaks its invariants: at least two
/// states, unit step increments, valid angles and speeds, dt > 0.
void validate(const Trajectory& traj);

/// Rewrites omega/nu of every state from consecutive positions. State k uses
/// the backward difference p_k - p_{k-1}; state 0 copies state 1.
void recompute_velocities(Trajectory& traj);

/// One (direction, speed) measurement at a location, used for training.
struct VelocityObservation {
  double x = 0.0;
  double y = 0.0;
  double omega = 0.0;
  double nu = 0.0;
  std::int64_t t = 0;  // global step index, orders observations in time
};

struct PredictionTask {
  std::string id;
  Trajectory observed;      // O_p states; the last one is the current state at t0
  Trajectory ground_truth;  // up to T_p states starting at t0 + 1
  int observation_steps = 0;  // O_p
  int horizon_steps = 0;      // T_p
  double dt = 1.0;

  double observation_seconds() const { return observation_steps * dt; }
  double horizon_seconds() const { return horizon_steps * dt; }
  int effective_horizon() const { return static_cast<int>(ground_truth.size()); }
};

/// Converts a horizon in seconds to whole steps; throws ConfigError when the
/// horizon is not a positive multiple of dt.
int seconds_to_steps(double seconds, double dt, const char* what);

}  // namespace lace
