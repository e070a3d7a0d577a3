#pragma once

#include <cstddef>
#include <span>

#include "lace/histogram.hpp"

namespace lace {

/// Gaussian measurement density M(z | J) over (direction, speed) with the
/// great-circle distance in direction:
///   M = exp(-(dw^2 / (2 sw^2) + dv^2 / (2 sv^2))) / (2 pi sw sv).
double measurement_model(DirectionSpeed z, DirectionSpeed state, double sigma_omega, double sigma_nu);

struct FilterParams {
  double sigma_omega = 0.0;  // radians
  double sigma_nu = 0.0;     // m/s
  // Diagnostic: normalise M(z_i | .) over J before adding it to the tallies.
  bool normalize_increment = false;

  /// One bin width in each dimension.
  static FilterParams for_geometry(const BinGeometry& geometry) {
    return {geometry.direction_bin_width(), geometry.speed_bin_width(), false};
  }
};

/// Laminar component of a cluster's time-ordered observations, computed by the
/// histogram Bayes filter:
///
///   p_0(J) = 1 / N_S
///   for each z_i:
///     C(J | J_j) += M(z_i | J)                       cumulative transition tallies
///     pbar(J)    = sum_j p_{i-1}(J_j) * Chat(J | J_j) Chat = row-normalised C
///     p_i(J)     ~ pbar(J) * M(z_i | J)              normalised over J
///   Gamma^L ~ p_0 + sum_i p_i
///
/// The tally increment does not depend on the source state J_j, so all rows of
/// C are equal; the kernel keeps a single row. The dense N_S x N_S form lives
/// in reference::extract_laminar_dense. Deterministic; throws DataError on an
/// empty input and ConfigError on non-positive sigmas.
DSHistogram extract_laminar(std::span<const DirectionSpeed> observations, const BinGeometry& geometry,
                            const FilterParams& params);

struct KlResult {
  double nats = 0.0;
  std::size_t floored_bins = 0;  // bins where q was raised to epsilon
};

/// D_KL(p || q) in nats, summing over bins with p > 0 and flooring q at
/// epsilon. Clamped at zero. Throws DataError on geometry mismatch.
KlResult kl_divergence(const DSHistogram& p, const DSHistogram& q, double epsilon = 1e-12);

}  // namespace lace
