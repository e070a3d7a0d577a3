#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lace {

/// Direction x speed grid. Bins are half-open [lo, hi); the top speed bin is
/// closed and absorbs overspeed. Flat index = direction_bin * n_speed + speed_bin.
class BinGeometry {
 public:
  /// n_speed = ceil(speed_max / speed_bin_width); the direction bin width is
  /// 2pi / n_direction_bins.
  static BinGeometry make(double speed_bin_width, double speed_max, int n_direction_bins);

  /// 0.2 m/s on [0, 5] x 10 degree bins: 25 x 36 = 900 states.
  static BinGeometry standard() { return make(0.2, 5.0, 36); }

  double speed_bin_width() const { return speed_bin_width_; }
  double speed_max() const { return speed_max_; }
  double direction_bin_width() const { return direction_bin_width_; }
  int n_speed_bins() const { return n_speed_; }
  int n_direction_bins() const { return n_direction_; }
  int size() const { return n_speed_ * n_direction_; }

  int direction_bin(double omega) const;
  /// Clamps to the top bin; `clipped` is set when nu exceeded speed_max.
  int speed_bin(double nu, bool* clipped = nullptr) const;
  int index(int direction_bin, int speed_bin) const { return direction_bin * n_speed_ + speed_bin; }
  int index_of(double omega, double nu, bool* clipped = nullptr) const {
    return index(direction_bin(omega), speed_bin(nu, clipped));
  }
  int direction_of(int flat) const { return flat / n_speed_; }
  int speed_of(int flat) const { return flat % n_speed_; }

  double direction_center(int direction_bin) const { return (direction_bin + 0.5) * direction_bin_width_; }
  double speed_center(int speed_bin) const { return (speed_bin + 0.5) * speed_bin_width_; }

  bool operator==(const BinGeometry&) const = default;

 private:
  double speed_bin_width_ = 0.2;
  double speed_max_ = 5.0;
  double direction_bin_width_ = 0.0;
  int n_speed_ = 0;
  int n_direction_ = 0;
};

/// Discrete joint direction-speed distribution.
struct DSHistogram {
  BinGeometry geometry;
  std::vector<double> probs;
  std::size_t support_count = 0;

  double at(int direction_bin, int speed_bin) const { return probs[geometry.index(direction_bin, speed_bin)]; }

  /// Sum over speed bins, one entry per direction bin.
  std::vector<double> direction_marginal() const;
};

struct DirectionSpeed {
  double omega = 0.0;
  double nu = 0.0;
};

struct GammaREstimate {
  DSHistogram histogram;
  std::size_t overspeed_clipped = 0;
};

/// Relative bin frequencies of the observations. Throws DataError when empty.
GammaREstimate estimate_gamma_r(std::span<const DirectionSpeed> observations, const BinGeometry& geometry);

}  // namespace lace
