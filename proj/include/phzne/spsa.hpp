// Simultaneous perturbation stochastic approximation.
//
//   x_{k+1} = x_k - a_k g_k,   g_k,i = (f(x_k + c_k D) - f(x_k - c_k D)) / (2 c_k D_i)
//   a_k = a / (k + 1 + A)^alpha,   c_k = c / (k + 1)^gamma,   D_i = +-1
#pragma once

#include "phzne/processor.hpp"
#include "phzne/sampling.hpp"
#include "phzne/schwinger.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace phzne {

struct SpsaConfig {
  double a = 0.05;
  double c = 0.1;
  double alpha = 0.602;
  double gamma = 0.101;
  double A = 20.0;
  std::uint32_t max_iterations = 200;
  bool wrap_phases = true;

  /// Standard settings with A = 0.1 K.
  static SpsaConfig standard(std::uint32_t iterations, double a = 0.05) {
    SpsaConfig cfg;
    cfg.max_iterations = iterations;
    cfg.A = 0.1 * iterations;
    cfg.a = a;
    return cfg;
  }
};

inline void validate(const SpsaConfig& cfg) {
  if (!(cfg.a > 0.0) || !(cfg.c > 0.0)) throw std::invalid_argument("SpsaConfig: a and c must be > 0");
  if (!(cfg.gamma > 0.0 && cfg.gamma < cfg.alpha && cfg.alpha <= 1.0)) {
    throw std::invalid_argument("SpsaConfig: need 0 < gamma < alpha <= 1");
  }
  if (!(cfg.A >= 0.0)) throw std::invalid_argument("SpsaConfig: A must be >= 0");
  if (cfg.max_iterations < 1) throw std::invalid_argument("SpsaConfig: max_iterations must be >= 1");
}

inline double step_gain(const SpsaConfig& cfg, std::uint32_t k) {
  return cfg.a / std::pow(k + 1.0 + cfg.A, cfg.alpha);
}

inline double perturbation_gain(const SpsaConfig& cfg, std::uint32_t k) {
  return cfg.c / std::pow(k + 1.0, cfg.gamma);
}

/// Gain `a` giving a first step of `first_step` (per coordinate) when the
/// gradient components have magnitude `gradient_scale`.
inline double calibrated_gain(double first_step, double gradient_scale, double A, double alpha) {
  if (!(gradient_scale > 0.0)) throw std::invalid_argument("calibrated_gain: gradient scale must be > 0");
  return first_step * std::pow(1.0 + A, alpha) / gradient_scale;
}

struct SpsaIteration {
  std::uint32_t k = 0;
  std::vector<double> params;  // x_k, the centre of the perturbation
  EnergyEstimate plus;
  EnergyEstimate minus;
  std::uint32_t evaluations = 2;
};

struct OptimTrace {
  std::vector<SpsaIteration> iterations;
  std::vector<double> final_params;  // x after the last completed update
  bool aborted = false;
  std::string abort_reason;

  std::uint64_t evaluation_count() const {
    std::uint64_t n = 0;
    for (const auto& it : iterations) n += it.evaluations;
    return n;
  }
};

/// Runs up to cfg.max_iterations iterations. `objective` maps a parameter
/// vector to an EnergyEstimate and is called exactly twice per iteration.
/// A non-finite objective value stops the run; the trace keeps everything
/// completed before it.
template <typename Objective>
OptimTrace minimize(Objective&& objective, std::vector<double> x0, const SpsaConfig& cfg,
                    RngStream& rng) {
  validate(cfg);
  for (double v : x0) {
    if (!std::isfinite(v)) throw std::invalid_argument("spsa::minimize: x0 must be finite");
  }
  OptimTrace trace;
  trace.iterations.reserve(cfg.max_iterations);
  std::vector<double> x = std::move(x0);
  if (cfg.wrap_phases) {
    for (double& v : x) v = wrap_phase(v);
  }
  const std::size_t dim = x.size();
  std::vector<int> delta(dim);
  std::vector<double> probe(dim);

  for (std::uint32_t k = 0; k < cfg.max_iterations; ++k) {
    const double ak = step_gain(cfg, k);
    const double ck = perturbation_gain(cfg, k);
    for (auto& d : delta) d = rng.rademacher();

    for (std::size_t i = 0; i < dim; ++i) probe[i] = x[i] + ck * delta[i];
    const EnergyEstimate plus = objective(static_cast<const std::vector<double>&>(probe));
    for (std::size_t i = 0; i < dim; ++i) probe[i] = x[i] - ck * delta[i];
    const EnergyEstimate minus = objective(static_cast<const std::vector<double>&>(probe));

    if (!std::isfinite(plus.value) || !std::isfinite(minus.value)) {
      trace.aborted = true;
      trace.abort_reason = "objective returned a non-finite value at iteration " + std::to_string(k);
      break;
    }
    trace.iterations.push_back({k, x, plus, minus, 2});

    const double diff = (plus.value - minus.value) / (2.0 * ck);
    for (std::size_t i = 0; i < dim; ++i) {
      x[i] -= ak * diff / delta[i];
      if (cfg.wrap_phases) x[i] = wrap_phase(x[i]);
    }
  }
  trace.final_params = x;
  return trace;
}

struct RestartPoint {
  std::vector<double> x0;
  SpsaConfig config;  // iteration counter restarts at k = 0
};

/// Starting point for a fresh SPSA run continuing from the latest iterate.
inline RestartPoint restart(const OptimTrace& trace, const SpsaConfig& cfg) {
  if (trace.iterations.empty()) throw std::invalid_argument("spsa::restart: empty trace");
  return {trace.final_params, cfg};
}

}  // namespace phzne
