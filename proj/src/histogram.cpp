#include "lace/histogram.hpp"

#include <cmath>

#include "lace/core.hpp"
#include "lace/error.hpp"

namespace lace {

BinGeometry BinGeometry::make(double speed_bin_width, double speed_max, int n_direction_bins) {
  if (!(speed_bin_width > 0.0) || !(speed_max > 0.0) || !std::isfinite(speed_max))
    throw ConfigError("bin geometry: speed bin width and speed max must be positive");
  if (n_direction_bins < 1) throw ConfigError("bin geometry: need at least one direction bin");
  BinGeometry g;
  g.speed_bin_width_ = speed_bin_width;
  g.speed_max_ = speed_max;
  // 5 / 0.2 is 25.000000000000004 in doubles
  g.n_speed_ = static_cast<int>(std::ceil(speed_max / speed_bin_width - 1e-9));
  g.n_direction_ = n_direction_bins;
  g.direction_bin_width_ = kTwoPi / n_direction_bins;
  return g;
}

int BinGeometry::direction_bin(double omega) const {
  const int b = static_cast<int>(std::floor(wrap_angle(omega) / direction_bin_width_));
  return b >= n_direction_ ? b - n_direction_ : b;
}

int BinGeometry::speed_bin(double nu, bool* clipped) const {
  if (clipped != nullptr) *clipped = nu > speed_max_;
  if (!(nu > 0.0)) return 0;
  const double b = std::floor(nu / speed_bin_width_);
  return b >= n_speed_ - 1 ? n_speed_ - 1 : static_cast<int>(b);
}

std::vector<double> DSHistogram::direction_marginal() const {
  std::vector<double> m(geometry.n_direction_bins(), 0.0);
  for (int d = 0; d < geometry.n_direction_bins(); ++d) {
    double s = 0.0;
    for (int v = 0; v < geometry.n_speed_bins(); ++v) s += probs[geometry.index(d, v)];
    m[d] = s;
  }
  return m;
}

GammaREstimate estimate_gamma_r(std::span<const DirectionSpeed> observations, const BinGeometry& geometry) {
  if (observations.empty()) throw DataError("estimate_gamma_r: empty observation list");
  GammaREstimate est;
  est.histogram.geometry = geometry;
  est.histogram.support_count = observations.size();
  std::vector<double> counts(geometry.size(), 0.0);
  for (const auto& z : observations) {
    bool clipped = false;
    counts[geometry.index_of(z.omega, z.nu, &clipped)] += 1.0;
    if (clipped) ++est.overspeed_clipped;
  }
  const double n = static_cast<double>(observations.size());
  for (double& c : counts) c /= n;
  est.histogram.probs = std::move(counts);
  return est;
}

}  // namespace lace
