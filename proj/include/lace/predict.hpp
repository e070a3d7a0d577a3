#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lace/core.hpp"
#include "lace/model.hpp"
#include "lace/rng.hpp"

namespace lace {

struct ObservedVelocity {
  double omega = 0.0;
  double nu = 0.0;
};

struct VelocityWeighting {
  double sigma = 1.5;  // in steps
  // false reproduces the raw kernel weights (they sum to well below 1)
  bool normalize = true;
};

/// Zero-mean Gaussian recency weight g(t) = 1 / (sigma sqrt(2 pi) exp(t^2 / (2 sigma^2))).
double recency_weight(int t, double sigma);

/// Direction of the weighted resultant of unit vectors. Returns nullopt when
/// the resultant vanishes.
std::optional<double> circular_weighted_mean(std::span<const double> angles, std::span<const double> weights);

/// Weighted finite-difference velocity of an observed window. The difference
/// ending at the last state gets weight g(1), the one before g(2), and so on.
/// Throws DataError with fewer than two states.
ObservedVelocity observed_velocity(const Trajectory& observed, const VelocityWeighting& weighting = {});

struct DirectionSample {
  double omega = 0.0;     // sampled direction, jittered inside its bin
  double bin_prob = 0.0;  // marginal probability of the sampled bin
  double kl = 0.0;        // divergence score of the cluster
};

/// Samples a heading from the speed-marginal of the nearest cluster's Gamma^L.
/// nullopt when the nearest centroid is farther than r_max.
std::optional<DirectionSample> sample_direction(const LaceModel& model, Vec2 position, double r_max, Rng& rng);

/// Pulls omega_prev toward omega_s with the kernel exp(-beta d^2), beta = 10^kl,
/// d the signed shortest rotation in radians.
double bias_direction(double omega_prev, double omega_s, double kl);

struct RolloutResult {
  Trajectory trajectory;
  double log_probability = 0.0;
  int fallback_steps = 0;
  int sample_index = 0;
};

struct PredictParams {
  int n_samples = 5;
  double r_max = 2.0;
  std::uint64_t seed = 42;
  VelocityWeighting weighting;
};

/// Per-sample seed from (master seed, task id, sample index).
std::uint64_t rollout_seed(std::uint64_t master, const std::string& task_id, int sample_index);

/// One rollout of T_p steps with a dedicated generator.
RolloutResult rollout_lace(const LaceModel& model, const PredictionTask& task, const ObservedVelocity& velocity,
                           const PredictParams& params, int sample_index);

/// n_samples rollouts in sample order (not ranked). Throws DataError on an
/// untrained model and ConfigError when n_samples < 1.
std::vector<RolloutResult> predict_lace(const LaceModel& model, const PredictionTask& task,
                                        const PredictParams& params);

/// Constant-velocity baseline: one deterministic rollout at (omega_obs, nu_obs).
RolloutResult predict_cvm(const PredictionTask& task, const VelocityWeighting& weighting = {});

/// Descending log probability; ties by fewer fallback steps, then sample index.
std::vector<RolloutResult> rank(std::vector<RolloutResult> rollouts);

/// Ranked rollouts for every task, parallel over (task, sample) pairs.
/// Identical to running predict_lace + rank per task.
std::vector<std::vector<RolloutResult>> predict_lace_batch(const LaceModel& model,
                                                           std::span<const PredictionTask> tasks,
                                                           const PredictParams& params);

}  // namespace lace
