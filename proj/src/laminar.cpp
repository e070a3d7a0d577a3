#include "lace/laminar.hpp"

#include <cmath>
#include <vector>

#include "lace/core.hpp"
#include "lace/error.hpp"

namespace lace {
namespace {

void check_sigmas(double sigma_omega, double sigma_nu) {
  if (!(sigma_omega > 0.0) || !(sigma_nu > 0.0) || !std::isfinite(sigma_omega) || !std::isfinite(sigma_nu))
    throw ConfigError("measurement model: sigmas must be positive");
}

}  // namespace

double measurement_model(DirectionSpeed z, DirectionSpeed state, double sigma_omega, double sigma_nu) {
  check_sigmas(sigma_omega, sigma_nu);
  const double dw = circular_distance(z.omega, state.omega);
  const double dv = std::fabs(z.nu - state.nu);
  const double exponent = dw * dw / (2.0 * sigma_omega * sigma_omega) + dv * dv / (2.0 * sigma_nu * sigma_nu);
  return std::exp(-exponent) / (2.0 * kPi * sigma_omega * sigma_nu);
}

DSHistogram extract_laminar(std::span<const DirectionSpeed> observations, const BinGeometry& geometry,
                            const FilterParams& params) {
  if (observations.empty()) throw DataError("extract_laminar: empty cluster");
  check_sigmas(params.sigma_omega, params.sigma_nu);

  const int n_dir = geometry.n_direction_bins();
  const int n_speed = geometry.n_speed_bins();
  const std::size_t n = static_cast<std::size_t>(geometry.size());
  const double norm = 1.0 / (2.0 * kPi * params.sigma_omega * params.sigma_nu);
  const double inv_2sw2 = 1.0 / (2.0 * params.sigma_omega * params.sigma_omega);
  const double inv_2sv2 = 1.0 / (2.0 * params.sigma_nu * params.sigma_nu);

  std::vector<double> dir_factor(n_dir);
  std::vector<double> speed_factor(n_speed);
  std::vector<double> m(n);
  std::vector<double> tally(n, 0.0);
  std::vector<double> pbar(n);
  std::vector<double> p(n, 1.0 / static_cast<double>(n));
  std::vector<double> accum(p);

  for (const DirectionSpeed& z : observations) {
    // M is separable: a direction factor times a speed factor.
    for (int d = 0; d < n_dir; ++d) {
      const double dw = circular_distance(z.omega, geometry.direction_center(d));
      dir_factor[d] = std::exp(-dw * dw * inv_2sw2);
    }
    for (int s = 0; s < n_speed; ++s) {
      const double dv = z.nu - geometry.speed_center(s);
      speed_factor[s] = std::exp(-dv * dv * inv_2sv2);
    }
    double m_sum = 0.0;
    for (int d = 0; d < n_dir; ++d) {
      const double fd = norm * dir_factor[d];
      double* row = m.data() + static_cast<std::size_t>(d) * n_speed;
      for (int s = 0; s < n_speed; ++s) {
        row[s] = fd * speed_factor[s];
        m_sum += row[s];
      }
    }

    const double inc_scale = (params.normalize_increment && m_sum > 0.0) ? 1.0 / m_sum : 1.0;
    double tally_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      tally[j] += m[j] * inc_scale;
      tally_sum += tally[j];
    }

    double p_mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) p_mass += p[j];

    // prediction through the (shared) row-normalised transition row
    if (tally_sum > 0.0) {
      for (std::size_t j = 0; j < n; ++j) pbar[j] = tally[j] / tally_sum * p_mass;
    } else {
      for (std::size_t j = 0; j < n; ++j) pbar[j] = p_mass / static_cast<double>(n);
    }

    // correction
    double post_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      p[j] = pbar[j] * m[j];
      post_sum += p[j];
    }
    if (post_sum > 0.0 && std::isfinite(post_sum)) {
      for (std::size_t j = 0; j < n; ++j) p[j] /= post_sum;
    } else {
      double pbar_sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) pbar_sum += pbar[j];
      for (std::size_t j = 0; j < n; ++j) p[j] = pbar[j] / pbar_sum;
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

KlResult kl_divergence(const DSHistogram& p, const DSHistogram& q, double epsilon) {
  if (!(p.geometry == q.geometry) || p.probs.size() != q.probs.size())
    throw DataError("kl_divergence: histograms use different bin geometries");
  if (!(epsilon > 0.0)) throw ConfigError("kl_divergence: epsilon must be positive");
  KlResult r;
  double sum = 0.0;
  for (std::size_t j = 0; j < p.probs.size(); ++j) {
    const double pj = p.probs[j];
    if (!(pj > 0.0)) continue;
    double qj = q.probs[j];
    if (qj < epsilon) {
      qj = epsilon;
      ++r.floored_bins;
    }
    sum += pj * std::log(pj / qj);
  }
  r.nats = sum > 0.0 ? sum : 0.0;
  return r;
}

}  // namespace lace
