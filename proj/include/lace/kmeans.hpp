#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lace/core.hpp"

namespace lace {

struct KMeansResult {
  std::vector<Vec2> centroids;
  std::vector<int> assignment;  // one cluster index per input point
  int requested_k = 0;
  int effective_k = 0;  // reduced to the number of distinct positions if needed
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;

  double sse(std::span<const Vec2> points) const;
};

/// Lloyd's algorithm on (x, y) with k-means++ seeding.
///
/// Seeding: the first centre is point rng.index(n); every further centre is
/// the first point whose running D^2 sum exceeds rng.uniform01() * sum D^2.
/// Iteration: assign (ties to the lower index), stop when no assignment
/// changes or after max_iters updates. A cluster left empty by an update is
/// re-seeded at the point farthest from its own centroid (taken from a
/// cluster with more than one member). Centroid sums run serially in point
/// order so results are bit-identical for any thread count.
KMeansResult kmeans_xy(std::span<const Vec2> points, int k, std::uint64_t seed, int max_iters = 100);

/// Nearest-centroid queries over a uniform bucket grid. Answers (index and
/// distance) equal a linear scan that breaks ties toward the lower index.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  explicit SpatialIndex(std::vector<Vec2> points);

  struct Hit {
    int index = -1;
    double distance = 0.0;
  };

  /// index = -1 when the index is empty.
  Hit nearest(Vec2 query) const;
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<Vec2> points_;
  double x0_ = 0.0;
  double y0_ = 0.0;
  double cell_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<int> cell_start_;  // CSR layout over cells
  std::vector<int> cell_items_;
};

}  // namespace lace
