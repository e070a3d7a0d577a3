#include "lace/reference.hpp"

#include <cmath>

#include "lace/error.hpp"

namespace lace::reference {

DSHistogram extract_laminar_dense(std::span<const DirectionSpeed> observations, const BinGeometry& geometry,
                                  const FilterParams& params) {
  if (observations.empty()) throw DataError("extract_laminar: empty cluster");
  const std::size_t n = static_cast<std::size_t>(geometry.size());
  std::vector<DirectionSpeed> centers(n);
  for (std::size_t j = 0; j < n; ++j) {
    const int idx = static_cast<int>(j);
    centers[j] = {geometry.direction_center(geometry.direction_of(idx)), geometry.speed_center(geometry.speed_of(idx))};
  }

  std::vector<double> c(n * n, 0.0);  // c[from * n + to]
  std::vector<double> m(n);
  std::vector<double> p(n, 1.0 / static_cast<double>(n));
  std::vector<double> pbar(n);
  std::vector<double> accum(p);

  for (const DirectionSpeed& z : observations) {
    double m_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = measurement_model(z, centers[j], params.sigma_omega, params.sigma_nu);
      m_sum += m[j];
    }
    const double scale = (params.normalize_increment && m_sum > 0.0) ? 1.0 / m_sum : 1.0;
    for (std::size_t from = 0; from < n; ++from)
      for (std::size_t to = 0; to < n; ++to) c[from * n + to] += m[to] * scale;

    std::fill(pbar.begin(), pbar.end(), 0.0);
    for (std::size_t from = 0; from < n; ++from) {
      double row = 0.0;
      for (std::size_t to = 0; to < n; ++to) row += c[from * n + to];
      for (std::size_t to = 0; to < n; ++to) {
        const double chat = row > 0.0 ? c[from * n + to] / row : 1.0 / static_cast<double>(n);
        pbar[to] += p[from] * chat;
      }
    }

    double post = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      p[j] = pbar[j] * m[j];
      post += p[j];
    }
    if (post > 0.0 && std::isfinite(post)) {
      for (double& v : p) v /= post;
    } else {
      double s = 0.0;
      for (double v : pbar) s += v;
      for (std::size_t j = 0; j < n; ++j) p[j] = pbar[j] / s;
    }
    for (std::size_t j = 0; j < n; ++j) accum[j] += p[j];
  }

  double total = 0.0;
  for (double a : accum) total += a;
  DSHistogram out;
  out.geometry = geometry;
  out.support_count = observations.size();
  out.probs.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.probs[j] = accum[j] / total;
  return out;
}

std::vector<std::vector<RolloutResult>> predict_batch(const LaceModel& model, std::span<const PredictionTask> tasks,
                                                      const PredictParams& params) {
  std::vector<std::vector<RolloutResult>> out;
  out.reserve(tasks.size());
  for (const PredictionTask& task : tasks) out.push_back(rank(predict_lace(model, task, params)));
  return out;
}

}  // namespace lace::reference
