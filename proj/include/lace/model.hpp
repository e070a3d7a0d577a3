#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lace/core.hpp"
#include "lace/histogram.hpp"
#include "lace/ingest.hpp"
#include "lace/kmeans.hpp"
#include "lace/laminar.hpp"

namespace lace {

struct ClusterModel {
  Vec2 centroid;
  std::size_t member_count = 0;
  DSHistogram gamma_r;  // raw histogram
  DSHistogram gamma_l;  // laminar component
  double kl_divergence = 0.0;  // D_KL(gamma_r || gamma_l), nats
};

struct TrainParams {
  BinGeometry geometry = BinGeometry::standard();
  int k = 500;
  int max_iters = 100;
  std::uint64_t seed = 42;
  // Measurement-model widths; default to one bin width each.
  std::optional<double> sigma_omega;
  std::optional<double> sigma_nu;
  bool normalize_increment = false;
  // Diagnostic: shuffle each cluster's observations instead of time order.
  std::optional<std::uint64_t> shuffle_seed;
  double kl_epsilon = 1e-12;
  // Provenance only; region filtering happens before training.
  std::optional<Region> region;
  std::string region_mode = "clip";
  std::string source_fingerprint;

  FilterParams filter() const;
};

class LaceModel {
 public:
  LaceModel() = default;
  LaceModel(BinGeometry geometry, std::vector<ClusterModel> clusters, TrainParams params);

  const BinGeometry& geometry() const { return geometry_; }
  const std::vector<ClusterModel>& clusters() const { return clusters_; }
  const TrainParams& params() const { return params_; }
  bool trained() const { return !clusters_.empty(); }

  SpatialIndex::Hit nearest_cluster(Vec2 p) const { return index_.nearest(p); }

  /// Gamma^L of cluster `c` summed over speed bins; cached at construction.
  const std::vector<double>& direction_marginal(int c) const { return marginals_[c]; }
  /// Cumulative form of direction_marginal, for sampling.
  const std::vector<double>& direction_cdf(int c) const { return cdfs_[c]; }

 private:
  BinGeometry geometry_ = BinGeometry::standard();
  std::vector<ClusterModel> clusters_;
  TrainParams params_;
  SpatialIndex index_;
  std::vector<std::vector<double>> marginals_;
  std::vector<std::vector<double>> cdfs_;
};

struct TrainReport {
  std::size_t observations = 0;
  int requested_k = 0;
  int effective_k = 0;
  int kmeans_iterations = 0;
  bool kmeans_converged = false;
  std::size_t clusters_kept = 0;
  std::size_t clusters_dropped = 0;
  std::size_t overspeed_clipped = 0;
  std::vector<std::string> warnings;
};

/// Every state of every trajectory becomes one observation; t is the global
/// step index.
std::vector<VelocityObservation> flatten_observations(std::span<const Trajectory> trajectories);

/// Content hash over person ids, steps and positions.
std::string fingerprint(std::span<const Trajectory> trajectories);

/// Per-cluster stage of training, shared by the parallel trainer and the
/// serial reference: orders members in time (or shuffles), builds Gamma^R,
/// extracts Gamma^L, scores the divergence.
ClusterModel build_cluster(std::span<const VelocityObservation> observations, std::vector<std::size_t> members,
                           Vec2 centroid, const TrainParams& params, std::size_t* overspeed_clipped,
                           std::uint64_t cluster_index);

/// Clusters the observations, then fits clusters in parallel. Throws
/// DataError on an empty training set.
LaceModel train(std::span<const Trajectory> trajectories, const TrainParams& params,
                TrainReport* report = nullptr);

}  // namespace lace
