#include "lace/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lace/error.hpp"
#include "lace/reference.hpp"
#include "lace/rng.hpp"

namespace lace {
namespace {

std::size_t count_distinct(std::span<const Vec2> points) {
  std::vector<Vec2> sorted(points.begin(), points.end());
  auto less = [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); };
  std::sort(sorted.begin(), sorted.end(), less);
  auto eq = [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; };
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end(), eq) - sorted.begin());
}

void assign_all(std::span<const Vec2> points, const std::vector<Vec2>& centroids, std::vector<int>& out,
                bool parallel) {
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  const int k = static_cast<int>(centroids.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    int best = 0;
    double best_d = squared_distance(points[i], centroids[0]);
    for (int c = 1; c < k; ++c) {
      const double d = squared_distance(points[i], centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    out[i] = best;
  }
}

KMeansResult kmeans_impl(std::span<const Vec2> points, int k, std::uint64_t seed, int max_iters, bool parallel);

}  // namespace

KMeansResult kmeans_xy(std::span<const Vec2> points, int k, std::uint64_t seed, int max_iters) {
  return kmeans_impl(points, k, seed, max_iters, true);
}

namespace reference {
KMeansResult kmeans_xy(std::span<const Vec2> points, int k, std::uint64_t seed, int max_iters) {
  return kmeans_impl(points, k, seed, max_iters, false);
}
}  // namespace reference

double KMeansResult::sse(std::span<const Vec2> points) const {
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) s += squared_distance(points[i], centroids[assignment[i]]);
  return s;
}

namespace {

KMeansResult kmeans_impl(std::span<const Vec2> points, int k, std::uint64_t seed, int max_iters, bool parallel) {
  if (points.empty()) throw DataError("kmeans: no observations");
  if (k < 1) throw ConfigError("kmeans: K must be >= 1");
  if (max_iters < 1) throw ConfigError("kmeans: max_iters must be >= 1");

  KMeansResult res;
  res.requested_k = k;
  const std::size_t distinct = count_distinct(points);
  if (static_cast<std::size_t>(k) > distinct) {
    res.warnings.push_back("K=" + std::to_string(k) + " exceeds " + std::to_string(distinct) +
                           " distinct positions; reduced");
    k = static_cast<int>(distinct);
  }
  res.effective_k = k;

  const std::size_t n = points.size();
  const auto sn = static_cast<std::ptrdiff_t>(n);
  Rng rng(seed);

  // k-means++ seeding
  std::vector<Vec2>& centroids = res.centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.index(n)]);
  std::vector<double> d2(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < sn; ++i) d2[i] = squared_distance(points[i], centroids[0]);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    const double target = rng.uniform01() * total;
    std::size_t pick = n;
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cum += d2[i];
      if (cum > target) {
        pick = i;
        break;
      }
    }
    if (pick == n) {  // rounding at the tail
      for (std::size_t i = n; i-- > 0;) {
        if (d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    const Vec2 c = points[pick];
    centroids.push_back(c);
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t i = 0; i < sn; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], c));
  }

  std::vector<int>& assignment = res.assignment;
  assignment.assign(n, 0);
  assign_all(points, centroids, assignment, parallel);
  std::vector<int> next(n, 0);
  std::vector<double> sx(k), sy(k);
  std::vector<std::size_t> count(k);

  while (res.iterations < max_iters) {
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t i = 0; i < n; ++i) ++count[assignment[i]];

    for (int c = 0; c < k; ++c) {
      if (count[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (count[assignment[i]] < 2) continue;
        const double d = squared_distance(points[i], centroids[assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == n) break;
      --count[assignment[far]];
      assignment[far] = c;
      count[c] = 1;
      res.warnings.push_back("empty cluster " + std::to_string(c) + " re-seeded");
    }

    std::fill(sx.begin(), sx.end(), 0.0);
    std::fill(sy.begin(), sy.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      sx[assignment[i]] += points[i].x;
      sy[assignment[i]] += points[i].y;
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] == 0) continue;
      centroids[c] = {sx[c] / static_cast<double>(count[c]), sy[c] / static_cast<double>(count[c])};
    }
    ++res.iterations;

    assign_all(points, centroids, next, parallel);
    if (next == assignment) {
      res.converged = true;
      break;
    }
    assignment.swap(next);
  }
  return res;
}

}  // namespace

SpatialIndex::SpatialIndex(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.empty()) return;
  double xmin = points_[0].x, xmax = xmin, ymin = points_[0].y, ymax = ymin;
  for (const Vec2& p : points_) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double w = std::max(xmax - xmin, 1e-9);
  const double h = std::max(ymax - ymin, 1e-9);
  // about one centroid per cell
  cell_ = std::max(std::sqrt(w * h / static_cast<double>(points_.size())), 1e-6);
  nx_ = std::clamp(static_cast<int>(w / cell_) + 1, 1, 2048);
  ny_ = std::clamp(static_cast<int>(h / cell_) + 1, 1, 2048);
  cell_ = std::max(w / nx_, h / ny_) * (1.0 + 1e-12);
  x0_ = xmin;
  y0_ = ymin;

  const std::size_t cells = static_cast<std::size_t>(nx_) * ny_;
  std::vector<int> cell_of(points_.size());
  cell_start_.assign(cells + 1, 0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const int ix = std::clamp(static_cast<int>(std::floor((points_[i].x - x0_) / cell_)), 0, nx_ - 1);
    const int iy = std::clamp(static_cast<int>(std::floor((points_[i].y - y0_) / cell_)), 0, ny_ - 1);
    cell_of[i] = iy * nx_ + ix;
    ++cell_start_[cell_of[i] + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
  cell_items_.resize(points_.size());
  std::vector<int> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) cell_items_[fill[cell_of[i]]++] = static_cast<int>(i);
}

SpatialIndex::Hit SpatialIndex::nearest(Vec2 q) const {
  Hit hit;
  if (points_.empty()) return hit;
  // virtual (unclamped) cell of the query
  const double fx = std::floor((q.x - x0_) / cell_);
  const double fy = std::floor((q.y - y0_) / cell_);
  const long long big = 1LL << 40;
  const long long cx = static_cast<long long>(std::clamp(fx, -static_cast<double>(big), static_cast<double>(big)));
  const long long cy = static_cast<long long>(std::clamp(fy, -static_cast<double>(big), static_cast<double>(big)));

  auto cheb_to_range = [](long long c, long long n) -> long long {
    if (c < 0) return -c;
    if (c >= n) return c - (n - 1);
    return 0;
  };
  const long long r0 = std::max(cheb_to_range(cx, nx_), cheb_to_range(cy, ny_));
  const long long r_max = std::max({cx, nx_ - 1 - cx, cy, ny_ - 1 - cy, r0});

  double best_d2 = std::numeric_limits<double>::infinity();
  int best = -1;
  auto visit_cell = [&](long long ix, long long iy) {
    const int c = static_cast<int>(iy) * nx_ + static_cast<int>(ix);
    for (int k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
      const int idx = cell_items_[k];
      const double d2 = squared_distance(q, points_[idx]);
      if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
        best_d2 = d2;
        best = idx;
      }
    }
  };

  for (long long r = r0; r <= r_max; ++r) {
    const long long x_lo = std::max(cx - r, 0LL), x_hi = std::min(cx + r, static_cast<long long>(nx_) - 1);
    const long long y_lo = std::max(cy - r, 0LL), y_hi = std::min(cy + r, static_cast<long long>(ny_) - 1);
    for (long long iy = y_lo; iy <= y_hi; ++iy) {
      const bool edge_row = (iy == cy - r || iy == cy + r);
      if (edge_row) {
        for (long long ix = x_lo; ix <= x_hi; ++ix) visit_cell(ix, iy);
      } else {
        if (cx - r >= 0 && cx - r < nx_) visit_cell(cx - r, iy);
        if (r > 0 && cx + r >= 0 && cx + r < nx_) visit_cell(cx + r, iy);
      }
    }
    if (best >= 0) {
      // every unvisited cell lies outside the (2r+1)^2 block around the query
      const double left = x0_ + static_cast<double>(cx - r) * cell_;
      const double right = x0_ + static_cast<double>(cx + r + 1) * cell_;
      const double bottom = y0_ + static_cast<double>(cy - r) * cell_;
      const double top = y0_ + static_cast<double>(cy + r + 1) * cell_;
      const double bound = std::min({q.x - left, right - q.x, q.y - bottom, top - q.y});
      const double best_d = std::sqrt(best_d2);
      if (bound > best_d * (1.0 + 1e-12) + 1e-12) break;
    }
  }
  hit.index = best;
  hit.distance = std::sqrt(best_d2);
  return hit;
}

}  // namespace lace
