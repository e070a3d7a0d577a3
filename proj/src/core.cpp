#include "lace/core.hpp"

#include <algorithm>
#include <cmath>

#include "lace/error.hpp"

namespace lace {
namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DataError(std::string(what) + " must be finite");
}

}  // namespace

double wrap_angle(double theta) {
  require_finite(theta, "angle");
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // -tiny + 2pi rounds to 2pi
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double circular_distance(double a, double b) {
  const double d = std::fabs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, kTwoPi - d);
}

double signed_angular_delta(double from, double to) {
  require_finite(from, "angle");
  require_finite(to, "angle");
  double d = wrap_angle(to - from);
  if (d > kPi) d -= kTwoPi;
  return d;
}

AgentState AgentState::make(double x, double y, double omega, double nu, std::int64_t t) {
  require_finite(x, "x");
  require_finite(y, "y");
  require_finite(nu, "speed");
  if (nu < 0.0) throw DataError("speed must be >= 0");
  return AgentState{x, y, wrap_angle(omega), nu, t};
}

AgentState propagate(const AgentState& state, double omega_next, double nu_next, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DataError("dt must be positive");
  if (!(nu_next >= 0.0) || !std::isfinite(nu_next)) throw DataError("speed must be >= 0");
  const double omega = wrap_angle(omega_next);
  return AgentState{state.x + nu_next * std::cos(omega) * dt,
                    state.y + nu_next * std::sin(omega) * dt, omega, nu_next, state.t + 1};
}

void validate(const Trajectory& traj) {
  if (!(traj.dt > 0.0) || !std::isfinite(traj.dt))
    throw DataError("trajectory '" + traj.person_id + "': dt must be positive");
  if (traj.states.size() < 2)
    throw DataError("trajectory '" + traj.person_id + "': needs at least 2 states");
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const AgentState& s = traj.states[i];
    if (!std::isfinite(s.x) || !std::isfinite(s.y))
      throw DataError("trajectory '" + traj.person_id + "': non-finite position");
    if (!(s.omega >= 0.0 && s.omega < kTwoPi))
      throw DataError("trajectory '" + traj.person_id + "': omega outside [0, 2pi)");
    if (!(s.nu >= 0.0) || !std::isfinite(s.nu))
      throw DataError("trajectory '" + traj.person_id + "': negative speed");
    if (i > 0 && s.t != traj.states[i - 1].t + 1)
      throw DataError("trajectory '" + traj.person_id + "': time steps must increase by 1");
  }
}

void recompute_velocities(Trajectory& traj) {
  auto& st = traj.states;
  if (st.size() < 2) return;
  for (std::size_t k = 1; k < st.size(); ++k) {
    const double dx = st[k].x - st[k - 1].x;
    const double dy = st[k].y - st[k - 1].y;
    st[k].omega = wrap_angle(std::atan2(dy, dx));
    st[k].nu = std::hypot(dx, dy) / traj.dt;
  }
  st[0].omega = st[1].omega;
  st[0].nu = st[1].nu;
}

int seconds_to_steps(double seconds, double dt, const char* what) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  const double ratio = seconds / dt;
  const double rounded = std::round(ratio);
  if (!std::isfinite(ratio) || rounded < 1.0 || std::fabs(ratio - rounded) > 1e-9 * std::max(1.0, rounded))
    throw ConfigError(std::string(what) + " must be a positive multiple of dt");
  return static_cast<int>(rounded);
}

}  // namespace lace
