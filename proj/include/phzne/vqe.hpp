// Variational eigensolver runs on the simulated chip, with optional zero-noise
// extrapolation and the deferred schedule (k0 unmitigated iterations, then a
// fresh SPSA run of k1 mitigated iterations from the latest iterate).
#pragma once

#include "phzne/mitigation.hpp"
#include "phzne/processor.hpp"
#include "phzne/sampling.hpp"
#include "phzne/schwinger.hpp"
#include "phzne/spsa.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace phzne {

inline constexpr std::size_t kTrailingWindow = 10;
inline constexpr std::uint32_t kDefaultIterations = 200;
// First-step sizes (rad) for a fresh unmitigated run and for the mitigated
// stage, whose extrapolated objective carries amplified shot noise.
inline constexpr double kUnmitigatedFirstStep = 0.5;
inline constexpr double kMitigatedFirstStep = 0.1;

enum class Stage { Unmitigated, Mitigated };

inline const char* to_string(Stage s) { return s == Stage::Unmitigated ? "unmitigated" : "mitigated"; }

/// Stream channels within one (grid point, run) key. The SPSA and shot
/// channels are further offset per stage, so a deferred run reproduces the
/// plain unmitigated run of the same key for its first k0 iterations.
enum class Channel : std::uint64_t { Init = 0, Spsa = 1, Shots = 2 };

inline std::uint64_t channel_for(Channel c, Stage stage) {
  return static_cast<std::uint64_t>(c) + (stage == Stage::Mitigated ? 16u : 0u);
}

/// Stage objective: energy at one noise level, or the two-point
/// extrapolation when two levels are given.
inline double stage_objective(const std::vector<EnergyEstimate>& e, const std::vector<double>& levels) {
  if (levels.size() == 1) return e[0].value;
  return linear_zne(e[0], e[1], levels[0], levels[1]).value;
}

/// Median |g_i| of single SPSA gradient estimates of a stage objective over
/// `samples` random probe states. Draws from a private fixed stream, so it
/// neither depends on nor perturbs the run seeds, and its measurements are
/// not charged to any run.
inline double median_gradient_magnitude(const ChipLayout& layout, double m, const std::vector<double>& levels,
                                        std::optional<ShotScale> shots, double c = 0.1,
                                        std::size_t samples = 64);

/// SPSA settings for one stage: A = 0.1 * kDefaultIterations, c = 0.1, and
/// `a` chosen so that the median first step is `first_step` rad per
/// coordinate on that stage's objective.
inline SpsaConfig calibrated_spsa(const ChipLayout& layout, double m, const std::vector<double>& levels,
                                  std::optional<ShotScale> shots, double first_step) {
  SpsaConfig cfg;
  cfg.A = 0.1 * kDefaultIterations;
  cfg.a = calibrated_gain(first_step, median_gradient_magnitude(layout, m, levels, shots, cfg.c), cfg.A,
                          cfg.alpha);
  return cfg;
}

struct VqeSettings {
  double m = -10.0;
  double eps1 = 0.18;
  std::optional<double> eps2;       // required when k1 > 0
  MitigationSchedule schedule{kDefaultIterations, 0, kBasesPerIteration};
  std::optional<ShotScale> shots;   // nullopt: exact probabilities
  SpsaConfig spsa;                  // unmitigated stage
  std::optional<SpsaConfig> spsa_mitigated;  // mitigated stage; defaults to `spsa`
  std::uint64_t master_seed = 0;
  std::uint64_t grid_index = 0;
  std::uint64_t run_index = 0;
  std::optional<PrepPhases> initial;  // default: uniform on [0, 2 pi)^4
};

struct VqeIteration {
  std::uint32_t k = 0;        // global iteration index
  std::uint32_t stage_k = 0;  // index within the stage
  Stage stage = Stage::Unmitigated;
  PrepPhases params{};
  EnergyEstimate e1;          // mean over the two evaluations at eps1
  std::optional<EnergyEstimate> e2;
  EnergyEstimate estimate;    // what the optimiser saw (E(eps1) or E_est)
  std::uint64_t measurements = 0;  // cumulative basis measurements
};

struct VqeRunResult {
  EnergyEstimate final_energy;         // trailing-window mean of the final stage
  EnergyEstimate last_iterate_energy;  // estimate of the last iteration
  std::optional<ZneEstimate> mitigated;  // final-stage ZNE summary when mitigated
  std::vector<VqeIteration> iterations;
  PrepPhases initial_params{};
  PrepPhases converged_params{};
  std::uint64_t measurements = 0;
  MitigationSchedule schedule;
  std::uint64_t master_seed = 0;
  std::uint64_t run_index = 0;
  bool aborted = false;
  std::string abort_reason;
};

namespace detail {

inline EnergyEstimate mean_of(const EnergyEstimate& a, const EnergyEstimate& b) {
  return {(a.value + b.value) / 2.0, std::sqrt(a.stddev * a.stddev + b.stddev * b.stddev) / 2.0};
}

inline PrepPhases to_prep(const std::vector<double>& x) { return {x[0], x[1], x[2], x[3]}; }

}  // namespace detail

/// Three-basis energy estimator at fixed noise levels. Counts every basis
/// measurement it performs.
class EnergyEvaluator {
 public:
  EnergyEvaluator(const ChipLayout& layout, double m, std::optional<ShotScale> shots, RngStream* rng)
      : layout_(layout), m_(m), shots_(shots), rng_(rng) {}

  void set_rng(RngStream* rng) { rng_ = rng; }

  struct Result {
    std::vector<EnergyEstimate> energies;  // one per requested noise level
  };

  /// Energies at each noise level for the probe state `prep`. The chip is
  /// evaluated once per basis; each noise level is a separate measurement.
  Result evaluate(const PrepPhases& prep, const std::vector<double>& levels) {
    std::array<BasisResponse, 3> resp;
    for (std::size_t b = 0; b < 3; ++b) resp[b] = basis_response(layout_, prep, kAllBases[b]);
    Result out;
    out.energies.reserve(levels.size());
    for (double eps : levels) {
      std::array<PostSelected, 3> ps;
      for (std::size_t b = 0; b < 3; ++b) ps[b] = post_select(resp[b], eps);
      measurements_ += 3;
      if (!shots_) {
        out.energies.push_back({energy_from_probs(ps[0].probs, ps[1].probs, ps[2].probs, m_), 0.0});
        continue;
      }
      if (rng_ == nullptr) throw std::logic_error("EnergyEvaluator: sampling needs an RNG");
      std::array<CountRecord, 3> rec;
      for (std::size_t b = 0; b < 3; ++b) {
        rec[b] = sample_counts(kAllBases[b], ps[b].probs, ps[b].success_prob, *shots_, *rng_);
      }
      try {
        out.energies.push_back(energy_from_counts(rec[0].counts, rec[1].counts, rec[2].counts, m_));
      } catch (const std::domain_error&) {
        // Empty basis: no estimate. SPSA stops on the non-finite value.
        out.energies.push_back({std::numeric_limits<double>::quiet_NaN(), 0.0});
      }
    }
    return out;
  }

  std::uint64_t measurements() const { return measurements_; }
  double m() const { return m_; }

 private:
  const ChipLayout& layout_;
  double m_;
  std::optional<ShotScale> shots_;
  RngStream* rng_;
  std::uint64_t measurements_ = 0;
};

inline double median_gradient_magnitude(const ChipLayout& layout, double m, const std::vector<double>& levels,
                                        std::optional<ShotScale> shots, double c, std::size_t samples) {
  if (levels.empty() || levels.size() > 2) {
    throw std::invalid_argument("median_gradient_magnitude: need one or two noise levels");
  }
  if (samples == 0) throw std::invalid_argument("median_gradient_magnitude: samples must be >= 1");
  RngStream probe_rng(0x63616c6962ULL, 1);
  RngStream shot_rng(0x63616c6962ULL, 2);
  EnergyEvaluator ev(layout, m, shots, &shot_rng);
  std::vector<double> mags;
  mags.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    PrepPhases plus{}, minus{};
    for (std::size_t j = 0; j < 4; ++j) {
      const double x = probe_rng.uniform(0.0, 2.0 * kPi);
      const double d = c * probe_rng.rademacher();
      plus[j] = x + d;
      minus[j] = x - d;
    }
    const double ep = stage_objective(ev.evaluate(plus, levels).energies, levels);
    const double em = stage_objective(ev.evaluate(minus, levels).energies, levels);
    if (std::isfinite(ep) && std::isfinite(em)) mags.push_back(std::abs(ep - em) / (2.0 * c));
  }
  if (mags.empty()) throw std::domain_error("median_gradient_magnitude: no finite probe energies");
  const auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
  std::nth_element(mags.begin(), mid, mags.end());
  return *mid;
}

inline void validate(const VqeSettings& s) {
  validate(s.schedule);
  check_noise_level(s.eps1, "VqeSettings.eps1");
  if (s.schedule.n != kBasesPerIteration) {
    throw std::invalid_argument("VqeSettings: this estimator uses n = 6 bases per iteration");
  }
  if (s.schedule.k1 > 0) {
    if (!s.eps2) throw std::invalid_argument("VqeSettings: mitigation needs a second noise level");
    check_noise_level(*s.eps2, "VqeSettings.eps2");
    if (!(s.eps1 > 0.0) || !(*s.eps2 > s.eps1)) {
      throw std::invalid_argument("VqeSettings: need 0 < eps1 < eps2 for extrapolation");
    }
  }
}

inline VqeRunResult run_vqe(const ChipLayout& layout, const VqeSettings& s) {
  validate(s);
  const auto stream = [&](Channel c, Stage stage) {
    return RngStream(s.master_seed, stream_id(s.grid_index, s.run_index, channel_for(c, stage)));
  };
  RngStream init_rng = stream(Channel::Init, Stage::Unmitigated);

  VqeRunResult result;
  result.schedule = s.schedule;
  result.master_seed = s.master_seed;
  result.run_index = s.run_index;
  if (s.initial) {
    result.initial_params = *s.initial;
  } else {
    for (double& v : result.initial_params) v = init_rng.uniform(0.0, 2.0 * kPi);
  }

  EnergyEvaluator evaluator(layout, s.m, s.shots, nullptr);
  std::vector<double> x(result.initial_params.begin(), result.initial_params.end());

  // Per-evaluation records, paired into iterations after each stage.
  struct EvalRecord {
    EnergyEstimate e1;
    std::optional<EnergyEstimate> e2;
    EnergyEstimate seen;
    std::uint64_t measurements;
  };

  std::uint32_t global_k = 0;
  auto run_stage = [&](Stage stage, std::uint32_t iterations) {
    if (iterations == 0) return;
    RngStream spsa_rng = stream(Channel::Spsa, stage);
    RngStream shot_rng = stream(Channel::Shots, stage);
    evaluator.set_rng(&shot_rng);
    std::vector<EvalRecord> evals;
    evals.reserve(2 * iterations);
    std::vector<double> levels{s.eps1};
    if (stage == Stage::Mitigated) levels.push_back(*s.eps2);

    auto objective = [&](const std::vector<double>& phases) -> EnergyEstimate {
      const auto r = evaluator.evaluate(detail::to_prep(phases), levels);
      EvalRecord rec{r.energies[0], std::nullopt, r.energies[0], 0};
      if (stage == Stage::Mitigated) {
        rec.e2 = r.energies[1];
        const ZneEstimate z = linear_zne(r.energies[0], r.energies[1], s.eps1, *s.eps2);
        rec.seen = {z.value, z.stddev};
      }
      rec.measurements = evaluator.measurements();
      evals.push_back(rec);
      return rec.seen;
    };

    SpsaConfig cfg = (stage == Stage::Mitigated && s.spsa_mitigated) ? *s.spsa_mitigated : s.spsa;
    cfg.max_iterations = iterations;
    const OptimTrace trace = minimize(objective, x, cfg, spsa_rng);
    evaluator.set_rng(nullptr);

    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
      const auto& plus = evals[2 * i];
      const auto& minus = evals[2 * i + 1];
      VqeIteration it;
      it.k = global_k++;
      it.stage_k = static_cast<std::uint32_t>(i);
      it.stage = stage;
      it.params = detail::to_prep(trace.iterations[i].params);
      it.e1 = detail::mean_of(plus.e1, minus.e1);
      if (plus.e2) it.e2 = detail::mean_of(*plus.e2, *minus.e2);
      it.estimate = detail::mean_of(plus.seen, minus.seen);
      it.measurements = minus.measurements;
      result.iterations.push_back(it);
    }
    if (trace.aborted) {
      result.aborted = true;
      result.abort_reason = trace.abort_reason;
      return;
    }
    x = restart(trace, cfg).x0;
  };

  run_stage(Stage::Unmitigated, s.schedule.k0);
  if (!result.aborted) run_stage(Stage::Mitigated, s.schedule.k1);

  result.converged_params = detail::to_prep(x);
  result.measurements = evaluator.measurements();
  if (result.iterations.empty()) {
    result.final_energy = {std::numeric_limits<double>::quiet_NaN(), 0.0};
    result.last_iterate_energy = result.final_energy;
    return result;
  }

  const Stage final_stage = result.iterations.back().stage;
  std::vector<const VqeIteration*> window;
  for (auto it = result.iterations.rbegin(); it != result.iterations.rend() && window.size() < kTrailingWindow; ++it) {
    if (it->stage != final_stage) break;
    window.push_back(&*it);
  }
  double sum = 0.0, var = 0.0, sum1 = 0.0, var1 = 0.0, sum2 = 0.0, var2 = 0.0;
  for (const auto* it : window) {
    sum += it->estimate.value;
    var += it->estimate.stddev * it->estimate.stddev;
    sum1 += it->e1.value;
    var1 += it->e1.stddev * it->e1.stddev;
    if (it->e2) {
      sum2 += it->e2->value;
      var2 += it->e2->stddev * it->e2->stddev;
    }
  }
  const double n = static_cast<double>(window.size());
  result.final_energy = {sum / n, std::sqrt(var) / n};
  result.last_iterate_energy = result.iterations.back().estimate;
  if (final_stage == Stage::Mitigated) {
    result.mitigated = linear_zne({sum1 / n, std::sqrt(var1) / n}, {sum2 / n, std::sqrt(var2) / n},
                                  s.eps1, *s.eps2);
  }
  return result;
}

/// Exact (noise-model, no shot noise) energy of a probe state at one level.
inline double exact_energy(const ChipLayout& layout, const PrepPhases& prep, double m, double eps) {
  EnergyEvaluator ev(layout, m, std::nullopt, nullptr);
  return ev.evaluate(prep, {eps}).energies[0].value;
}

}  // namespace phzne
