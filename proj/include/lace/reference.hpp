#pragma once

// Serial reference implementations. They follow the same rules as the
// production kernels and exist for equivalence tests and benchmarks.

#include <span>
#include <vector>

#include "lace/histogram.hpp"
#include "lace/kmeans.hpp"
#include "lace/laminar.hpp"
#include "lace/model.hpp"
#include "lace/predict.hpp"

namespace lace::reference {

/// Bayes filter with an explicit N_S x N_S transition tally matrix C[j][J],
/// each row normalised separately. O(N * N_S^2).
DSHistogram extract_laminar_dense(std::span<const DirectionSpeed> observations, const BinGeometry& geometry,
                                  const FilterParams& params);

/// kmeans_xy without OpenMP.
KMeansResult kmeans_xy(std::span<const Vec2> points, int k, std::uint64_t seed, int max_iters = 100);

/// train() with serial clustering and a serial loop over clusters.
LaceModel train(std::span<const Trajectory> trajectories, const TrainParams& params,
                TrainReport* report = nullptr);

/// predict_lace + rank, one task after another.
std::vector<std::vector<RolloutResult>> predict_batch(const LaceModel& model, std::span<const PredictionTask> tasks,
                                                      const PredictParams& params);

}  // namespace lace::reference
