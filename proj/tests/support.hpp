#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "lace/core.hpp"
#include "lace/rng.hpp"

namespace lace::test {

// straight walker from (x0, y0) heading omega at speed nu, n states, t from t0
inline Trajectory line(const std::string& id, double x0, double y0, double omega, double nu, int n,
                       std::int64_t t0 = 0, double dt = 1.0) {
  Trajectory tr;
  tr.person_id = id;
  tr.dt = dt;
  for (int i = 0; i < n; ++i) {
    const double d = nu * dt * i;
    tr.states.push_back(AgentState::make(x0 + d * std::cos(omega), y0 + d * std::sin(omega), omega, nu, t0 + i));
  }
  return tr;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("lace_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace lace::test
