#include "lace/predict.hpp"

#include <algorithm>
#include <cmath>

#include "lace/error.hpp"
#include "lace/parallel.hpp"

namespace lace {

double recency_weight(int t, double sigma) {
  const double r = static_cast<double>(t) / sigma;
  return 1.0 / (sigma * std::sqrt(2.0 * kPi) * std::exp(0.5 * r * r));
}

std::optional<double> circular_weighted_mean(std::span<const double> angles, std::span<const double> weights) {
  double s = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    s += weights[i] * std::sin(angles[i]);
    c += weights[i] * std::cos(angles[i]);
  }
  if (std::hypot(s, c) <= 1e-15) return std::nullopt;
  return wrap_angle(std::atan2(s, c));
}

ObservedVelocity observed_velocity(const Trajectory& observed, const VelocityWeighting& weighting) {
  const auto& st = observed.states;
  if (st.size() < 2) throw DataError("observed_velocity: need at least 2 observed states");
  if (!(weighting.sigma > 0.0)) throw ConfigError("observed_velocity: sigma must be positive");
  const std::size_t n = st.size() - 1;

  double weight_sum = 0.0;
  double speed_sum = 0.0;
  std::vector<double> headings;
  std::vector<double> heading_weights;
  for (std::size_t t = 1; t <= n; ++t) {
    const AgentState& a = st[n - t];
    const AgentState& b = st[n - t + 1];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double g = recency_weight(static_cast<int>(t), weighting.sigma);
    weight_sum += g;
    speed_sum += g * (std::hypot(dx, dy) / observed.dt);
    if (dx != 0.0 || dy != 0.0) {
      headings.push_back(std::atan2(dy, dx));
      heading_weights.push_back(g);
    }
  }
  ObservedVelocity v;
  v.nu = weighting.normalize ? speed_sum / weight_sum : speed_sum;
  v.omega = circular_weighted_mean(headings, heading_weights).value_or(st.back().omega);
  return v;
}

std::optional<DirectionSample> sample_direction(const LaceModel& model, Vec2 position, double r_max, Rng& rng) {
  const auto hit = model.nearest_cluster(position);
  if (hit.index < 0 || hit.distance > r_max) return std::nullopt;
  const auto& cdf = model.direction_cdf(hit.index);
  const auto& marginal = model.direction_marginal(hit.index);
  const double u = rng.uniform01() * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  int bin = static_cast<int>(it - cdf.begin());
  if (bin >= static_cast<int>(cdf.size())) bin = static_cast<int>(cdf.size()) - 1;
  while (bin > 0 && marginal[bin] <= 0.0) --bin;

  const BinGeometry& g = model.geometry();
  const double jitter = (rng.uniform01() - 0.5) * g.direction_bin_width();
  DirectionSample s;
  s.omega = wrap_angle(g.direction_center(bin) + jitter);
  s.bin_prob = marginal[bin];
  s.kl = model.clusters()[hit.index].kl_divergence;
  return s;
}

double bias_direction(double omega_prev, double omega_s, double kl) {
  if (!(kl >= 0.0)) throw DataError("bias_direction: kl must be >= 0");
  const double d = signed_angular_delta(omega_prev, omega_s);
  const double beta = std::pow(10.0, kl);
  return wrap_angle(omega_prev + d * std::exp(-beta * d * d));
}

std::uint64_t rollout_seed(std::uint64_t master, const std::string& task_id, int sample_index) {
  Fnv1a h;
  h.update(task_id);
  return derive_seed(master, h.digest(), static_cast<std::uint64_t>(sample_index));
}

namespace {

AgentState start_state(const PredictionTask& task, const ObservedVelocity& v) {
  AgentState s = task.observed.states.back();
  s.omega = v.omega;
  s.nu = v.nu;
  return s;
}

Trajectory empty_like(const PredictionTask& task) {
  Trajectory t;
  t.person_id = task.observed.person_id;
  t.dt = task.dt;
  t.states.reserve(static_cast<std::size_t>(task.horizon_steps));
  return t;
}

}  // namespace

RolloutResult rollout_lace(const LaceModel& model, const PredictionTask& task, const ObservedVelocity& velocity,
                           const PredictParams& params, int sample_index) {
  Rng rng(rollout_seed(params.seed, task.id, sample_index));
  RolloutResult r;
  r.sample_index = sample_index;
  r.trajectory = empty_like(task);
  AgentState state = start_state(task, velocity);
  for (int step = 0; step < task.horizon_steps; ++step) {
    double omega = state.omega;
    if (const auto s = sample_direction(model, state.position(), params.r_max, rng)) {
      omega = bias_direction(state.omega, s->omega, s->kl);
      r.log_probability += std::log(s->bin_prob);
    } else {
      ++r.fallback_steps;
    }
    state = propagate(state, omega, velocity.nu, task.dt);
    r.trajectory.states.push_back(state);
  }
  return r;
}

std::vector<RolloutResult> predict_lace(const LaceModel& model, const PredictionTask& task,
                                        const PredictParams& params) {
  if (!model.trained()) throw DataError("predict: model has no clusters");
  if (params.n_samples < 1) throw ConfigError("predict: n_samples must be >= 1");
  const ObservedVelocity v = observed_velocity(task.observed, params.weighting);
  std::vector<RolloutResult> out;
  out.reserve(static_cast<std::size_t>(params.n_samples));
  for (int i = 0; i < params.n_samples; ++i) out.push_back(rollout_lace(model, task, v, params, i));
  return out;
}

RolloutResult predict_cvm(const PredictionTask& task, const VelocityWeighting& weighting) {
  const ObservedVelocity v = observed_velocity(task.observed, weighting);
  RolloutResult r;
  r.trajectory = empty_like(task);
  AgentState state = start_state(task, v);
  for (int step = 0; step < task.horizon_steps; ++step) {
    state = propagate(state, v.omega, v.nu, task.dt);
    r.trajectory.states.push_back(state);
  }
  r.fallback_steps = task.horizon_steps;
  return r;
}

std::vector<RolloutResult> rank(std::vector<RolloutResult> rollouts) {
  std::stable_sort(rollouts.begin(), rollouts.end(), [](const RolloutResult& a, const RolloutResult& b) {
    if (a.log_probability != b.log_probability) return a.log_probability > b.log_probability;
    if (a.fallback_steps != b.fallback_steps) return a.fallback_steps < b.fallback_steps;
    return a.sample_index < b.sample_index;
  });
  return rollouts;
}

std::vector<std::vector<RolloutResult>> predict_lace_batch(const LaceModel& model,
                                                           std::span<const PredictionTask> tasks,
                                                           const PredictParams& params) {
  if (!model.trained()) throw DataError("predict: model has no clusters");
  if (params.n_samples < 1) throw ConfigError("predict: n_samples must be >= 1");
  const auto n_tasks = static_cast<std::ptrdiff_t>(tasks.size());
  std::vector<ObservedVelocity> velocities(tasks.size());
  for (std::ptrdiff_t t = 0; t < n_tasks; ++t) velocities[t] = observed_velocity(tasks[t].observed, params.weighting);

  std::vector<std::vector<RolloutResult>> out(tasks.size());
  for (auto& v : out) v.resize(static_cast<std::size_t>(params.n_samples));
  const std::ptrdiff_t total = n_tasks * params.n_samples;
  parallel_for(total, [&](std::ptrdiff_t job) {
    const std::ptrdiff_t t = job / params.n_samples;
    const int i = static_cast<int>(job % params.n_samples);
    out[t][i] = rollout_lace(model, tasks[t], velocities[t], params, i);
  });
  for (auto& v : out) v = rank(std::move(v));
  return out;
}

}  // namespace lace
