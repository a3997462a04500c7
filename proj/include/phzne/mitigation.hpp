// Zero-noise extrapolation and the deferred-mitigation budget.
#pragma once

#include "phzne/schwinger.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace phzne {

/// Noise level produced by a half-wave plate at angle theta on one photon:
/// eps = 2 sin^2(2 theta) / (1 + sin^2(2 theta)).
inline double epsilon_of_theta(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("epsilon_of_theta: theta not finite");
  const double s = std::sin(2.0 * theta);
  const double s2 = s * s;
  return 2.0 * s2 / (1.0 + s2);
}

class NoiseLevels {
 public:
  explicit NoiseLevels(std::vector<double> levels) : levels_(std::move(levels)) {
    if (levels_.size() < 2) throw std::invalid_argument("NoiseLevels: need at least 2 levels");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      if (!(levels_[i] > 0.0 && levels_[i] <= 1.0)) {
        throw std::invalid_argument("NoiseLevels: levels must lie in (0, 1]");
      }
      if (i > 0 && !(levels_[i] > levels_[i - 1])) {
        throw std::invalid_argument("NoiseLevels: levels must be strictly increasing");
      }
    }
  }
  const std::vector<double>& values() const { return levels_; }

 private:
  std::vector<double> levels_;
};

struct ZneEstimate {
  double value = 0.0;
  double stddev = 0.0;
  double c1 = 0.0;  // intercept
  double c2 = 0.0;  // slope
};

/// Var[E_est] for the two-point estimator with independent inputs:
/// (eps2^2 var1 + eps1^2 var2) / (eps2 - eps1)^2.
inline double zne_variance(double var1, double var2, double eps1, double eps2) {
  if (!(var1 >= 0.0 && var2 >= 0.0)) throw std::invalid_argument("zne_variance: negative variance");
  if (eps1 == eps2) throw std::domain_error("zne_variance: eps1 == eps2");
  const double gap = eps2 - eps1;
  return (eps2 * eps2 * var1 + eps1 * eps1 * var2) / (gap * gap);
}

inline ZneEstimate linear_zne(const EnergyEstimate& e1, const EnergyEstimate& e2, double eps1,
                              double eps2) {
  if (!(eps1 > 0.0 && eps2 > 0.0)) throw std::invalid_argument("linear_zne: noise levels must be > 0");
  if (eps1 == eps2) throw std::domain_error("linear_zne: eps1 == eps2");
  ZneEstimate out;
  out.value = (eps2 * e1.value - eps1 * e2.value) / (eps2 - eps1);
  out.c1 = out.value;
  out.c2 = (e2.value - e1.value) / (eps2 - eps1);
  out.stddev = std::sqrt(zne_variance(e1.stddev * e1.stddev, e2.stddev * e2.stddev, eps1, eps2));
  return out;
}

struct ZnePoint {
  double epsilon;
  double energy;
  double variance;
};

/// Weighted least-squares line through the points, evaluated at eps = 0.
/// Weights are 1/variance when every variance is positive, uniform otherwise.
/// The intercept is written as sum_i a_i E_i, so its variance is
/// sum_i a_i^2 var_i regardless of the weighting.
inline ZneEstimate lsq_extrapolate(const std::vector<ZnePoint>& points) {
  if (points.size() < 2) throw std::invalid_argument("lsq_extrapolate: need at least 2 points");
  bool all_positive = true;
  for (const auto& p : points) {
    if (!(p.variance >= 0.0)) throw std::invalid_argument("lsq_extrapolate: negative variance");
    all_positive = all_positive && p.variance > 0.0;
  }
  double sw = 0.0, sx = 0.0, sxx = 0.0;
  std::vector<double> w(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    w[i] = all_positive ? 1.0 / points[i].variance : 1.0;
    sw += w[i];
    sx += w[i] * points[i].epsilon;
    sxx += w[i] * points[i].epsilon * points[i].epsilon;
  }
  const double det = sw * sxx - sx * sx;
  // Relative test: det is a weighted variance of eps times sw^2.
  if (!(det > 1e-14 * sw * sxx)) {
    throw std::domain_error("lsq_extrapolate: noise levels are not distinct");
  }
  ZneEstimate out;
  double var = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double a = w[i] * (sxx - sx * points[i].epsilon) / det;   // intercept weight
    const double b = w[i] * (sw * points[i].epsilon - sx) / det;     // slope weight
    out.c1 += a * points[i].energy;
    out.c2 += b * points[i].energy;
    var += a * a * points[i].variance;
  }
  out.value = out.c1;
  out.stddev = std::sqrt(var);
  return out;
}

inline constexpr std::uint32_t kBasesPerIteration = 6;

struct MitigationSchedule {
  std::uint32_t k0 = 0;  // unmitigated iterations
  std::uint32_t k1 = 0;  // mitigated iterations
  std::uint32_t n = kBasesPerIteration;

  std::uint32_t iterations() const { return k0 + k1; }
};

inline void validate(const MitigationSchedule& s) {
  if (s.k0 + s.k1 < 1) throw std::invalid_argument("MitigationSchedule: k0 + k1 must be >= 1");
  if (s.n < 1) throw std::invalid_argument("MitigationSchedule: n must be >= 1");
}

/// N = n k0 + 2 n k1.
inline std::uint64_t measurements_used(const MitigationSchedule& s) {
  validate(s);
  return static_cast<std::uint64_t>(s.n) * (s.k0 + 2ULL * s.k1);
}

/// Schedule spending exactly `budget` basis measurements after `k0`
/// unmitigated iterations, or nothing when no integer k1 >= min_k1 fits.
inline std::optional<MitigationSchedule> schedule_for_budget(std::uint64_t budget, std::uint32_t k0,
                                                             std::uint32_t n = kBasesPerIteration,
                                                             std::uint32_t min_k1 = 1) {
  if (n == 0 || budget % n != 0) return std::nullopt;
  const std::uint64_t units = budget / n;  // k0 + 2 k1
  if (units < k0 || (units - k0) % 2 != 0) return std::nullopt;
  const std::uint64_t k1 = (units - k0) / 2;
  if (k1 < min_k1 || k0 + k1 < 1) return std::nullopt;
  return MitigationSchedule{k0, static_cast<std::uint32_t>(k1), n};
}

}  // namespace phzne
