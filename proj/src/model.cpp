#include "lace/model.hpp"

#include <algorithm>
#include <cstdio>

#include "lace/error.hpp"
#include "lace/parallel.hpp"
#include "lace/reference.hpp"
#include "lace/rng.hpp"

namespace lace {

FilterParams TrainParams::filter() const {
  FilterParams f = FilterParams::for_geometry(geometry);
  if (sigma_omega) f.sigma_omega = *sigma_omega;
  if (sigma_nu) f.sigma_nu = *sigma_nu;
  f.normalize_increment = normalize_increment;
  return f;
}

LaceModel::LaceModel(BinGeometry geometry, std::vector<ClusterModel> clusters, TrainParams params)
    : geometry_(geometry), clusters_(std::move(clusters)), params_(std::move(params)) {
  std::vector<Vec2> centroids;
  centroids.reserve(clusters_.size());
  marginals_.reserve(clusters_.size());
  cdfs_.reserve(clusters_.size());
  for (const ClusterModel& c : clusters_) {
    if (!(c.gamma_l.geometry == geometry_) || !(c.gamma_r.geometry == geometry_))
      throw DataError("cluster histograms do not match the model geometry");
    centroids.push_back(c.centroid);
    auto m = c.gamma_l.direction_marginal();
    std::vector<double> cdf(m.size());
    double acc = 0.0;
    for (std::size_t d = 0; d < m.size(); ++d) {
      acc += m[d];
      cdf[d] = acc;
    }
    marginals_.push_back(std::move(m));
    cdfs_.push_back(std::move(cdf));
  }
  index_ = SpatialIndex(std::move(centroids));
}

std::vector<VelocityObservation> flatten_observations(std::span<const Trajectory> trajectories) {
  std::size_t total = 0;
  for (const Trajectory& t : trajectories) total += t.size();
  std::vector<VelocityObservation> obs;
  obs.reserve(total);
  for (const Trajectory& traj : trajectories) {
    for (const AgentState& s : traj.states) obs.push_back({s.x, s.y, s.omega, s.nu, s.t});
  }
  return obs;
}

std::string fingerprint(std::span<const Trajectory> trajectories) {
  Fnv1a h;
  for (const Trajectory& traj : trajectories) {
    h.update(traj.person_id);
    h.update(traj.dt);
    for (const AgentState& s : traj.states) {
      h.update(static_cast<std::int64_t>(s.t));
      h.update(s.x);
      h.update(s.y);
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h.digest()));
  return buf;
}

ClusterModel build_cluster(std::span<const VelocityObservation> observations, std::vector<std::size_t> members,
                           Vec2 centroid, const TrainParams& params, std::size_t* overspeed_clipped,
                           std::uint64_t cluster_index) {
  if (params.shuffle_seed) {
    Rng rng(derive_seed(*params.shuffle_seed, cluster_index));
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.index(i)]);
  } else {
    // flattened order breaks ties between simultaneous observations
    std::stable_sort(members.begin(), members.end(),
                     [&](std::size_t a, std::size_t b) { return observations[a].t < observations[b].t; });
  }
  std::vector<DirectionSpeed> z;
  z.reserve(members.size());
  for (std::size_t i : members) z.push_back({observations[i].omega, observations[i].nu});

  ClusterModel cm;
  cm.centroid = centroid;
  cm.member_count = members.size();
  auto est = estimate_gamma_r(z, params.geometry);
  if (overspeed_clipped != nullptr) *overspeed_clipped = est.overspeed_clipped;
  cm.gamma_r = std::move(est.histogram);
  cm.gamma_l = extract_laminar(z, params.geometry, params.filter());
  cm.kl_divergence = kl_divergence(cm.gamma_r, cm.gamma_l, params.kl_epsilon).nats;
  return cm;
}

namespace {

LaceModel train_impl(std::span<const Trajectory> trajectories, const TrainParams& params, TrainReport* report,
                     bool parallel) {
  if (trajectories.empty()) throw DataError("train: empty training set");
  const auto observations = flatten_observations(trajectories);
  if (observations.empty()) throw DataError("train: no observations");

  std::vector<Vec2> positions;
  positions.reserve(observations.size());
  for (const auto& o : observations) positions.push_back({o.x, o.y});
  const KMeansResult km = parallel ? kmeans_xy(positions, params.k, params.seed, params.max_iters)
                                   : reference::kmeans_xy(positions, params.k, params.seed, params.max_iters);

  const int k = km.effective_k;
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < observations.size(); ++i) members[km.assignment[i]].push_back(i);

  std::vector<std::optional<ClusterModel>> fitted(k);
  std::vector<std::size_t> clipped(k, 0);
  auto fit = [&](std::ptrdiff_t c) {
    if (members[c].empty()) return;
    fitted[c] = build_cluster(observations, std::move(members[c]), km.centroids[c], params, &clipped[c],
                              static_cast<std::uint64_t>(c));
  };
  if (parallel) {
    parallel_for(k, fit);
  } else {
    for (int c = 0; c < k; ++c) fit(c);
  }

  TrainReport rep;
  rep.observations = observations.size();
  rep.requested_k = km.requested_k;
  rep.effective_k = k;
  rep.kmeans_iterations = km.iterations;
  rep.kmeans_converged = km.converged;
  rep.warnings = km.warnings;
  std::vector<ClusterModel> clusters;
  clusters.reserve(k);
  for (int c = 0; c < k; ++c) {
    rep.overspeed_clipped += clipped[c];
    if (!fitted[c]) {
      ++rep.clusters_dropped;
      rep.warnings.push_back("cluster " + std::to_string(c) + " empty after repair; dropped");
      continue;
    }
    clusters.push_back(std::move(*fitted[c]));
  }
  rep.clusters_kept = clusters.size();

  TrainParams stamped = params;
  stamped.sigma_omega = params.filter().sigma_omega;
  stamped.sigma_nu = params.filter().sigma_nu;
  if (stamped.source_fingerprint.empty()) stamped.source_fingerprint = fingerprint(trajectories);
  if (report != nullptr) *report = std::move(rep);
  return LaceModel(params.geometry, std::move(clusters), std::move(stamped));
}

}  // namespace

LaceModel train(std::span<const Trajectory> trajectories, const TrainParams& params, TrainReport* report) {
  return train_impl(trajectories, params, report, true);
}

namespace reference {
LaceModel train(std::span<const Trajectory> trajectories, const TrainParams& params, TrainReport* report) {
  return train_impl(trajectories, params, report, false);
}
}  // namespace reference

}  // namespace lace
