// Experiment drivers behind the command-line tool: batches of seeded VQE
// runs, parameter sweeps, the deferred-mitigation heatmap and the HOM scan.
#pragma once

#include "phzne/config.hpp"
#include "phzne/mitigation.hpp"
#include "phzne/optics.hpp"
#include "phzne/parallel.hpp"
#include "phzne/processor.hpp"
#include "phzne/sampling.hpp"
#include "phzne/schwinger.hpp"
#include "phzne/vqe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace phzne {

struct Aggregate {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();  // sample std over runs
  double sem = std::numeric_limits<double>::quiet_NaN();     // std of the mean
  std::size_t count = 0;
};

/// Summary of finite values in index order.
inline Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    sum += v;
    ++a.count;
  }
  if (a.count == 0) return a;
  a.mean = sum / static_cast<double>(a.count);
  if (a.count < 2) {
    a.stddev = a.sem = 0.0;
    return a;
  }
  double ss = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) ss += (v - a.mean) * (v - a.mean);
  }
  a.stddev = std::sqrt(ss / static_cast<double>(a.count - 1));
  a.sem = a.stddev / std::sqrt(static_cast<double>(a.count));
  return a;
}

inline std::optional<ShotScale> pair_scale(const ExperimentConfig& cfg) {
  if (!cfg.shot_scale) return std::nullopt;
  return pairs_for_coincidences(*cfg.shot_scale);
}

/// Run settings for one grid point with stage gains calibrated on the
/// stage objectives at this (m, eps) and shot scale.
inline VqeSettings grid_settings(const ChipLayout& layout, const ExperimentConfig& cfg, double m,
                                 const NoisePair& noise, MitigationSchedule schedule,
                                 std::uint64_t grid_index) {
  VqeSettings s;
  s.m = m;
  s.eps1 = noise.eps1;
  s.eps2 = noise.eps2;
  s.schedule = schedule;
  s.shots = pair_scale(cfg);
  s.master_seed = cfg.master_seed.value_or(0);
  s.grid_index = grid_index;
  s.spsa = calibrated_spsa(layout, m, {noise.eps1}, s.shots, kUnmitigatedFirstStep);
  if (schedule.k1 > 0 && noise.eps2) {
    s.spsa_mitigated = calibrated_spsa(layout, m, {noise.eps1, *noise.eps2}, s.shots, kMitigatedFirstStep);
  }
  return s;
}

/// Final energies of `runs` runs sharing `base` except for the run index.
inline std::vector<double> final_energies(const ChipLayout& layout, const VqeSettings& base, std::uint32_t runs,
                                          unsigned threads) {
  return parallel_map(runs, threads, [&](std::size_t r) {
    VqeSettings s = base;
    s.run_index = r;
    return run_vqe(layout, s).final_energy.value;
  });
}

struct StrategyComparison {
  Aggregate unmitigated;
  std::optional<Aggregate> mitigated;
  std::vector<double> unmitigated_runs;
  std::vector<double> mitigated_runs;
};

/// Both strategies at one grid point. The unmitigated arm spends all
/// k0 + k1 iterations at eps1; the mitigated arm follows the configured
/// schedule. Without eps2 there is no mitigated arm; at eps1 = 0 there is
/// nothing to extrapolate and the mitigated arm repeats the unmitigated one.
inline StrategyComparison compare_strategies(const ChipLayout& layout, const ExperimentConfig& cfg, double m,
                                             const NoisePair& noise, std::uint64_t grid_index) {
  StrategyComparison out;
  const MitigationSchedule plain{cfg.schedule.iterations(), 0, cfg.schedule.n};
  out.unmitigated_runs = final_energies(layout, grid_settings(layout, cfg, m, noise, plain, grid_index),
                                        cfg.runs, cfg.threads);
  out.unmitigated = aggregate(out.unmitigated_runs);
  if (!noise.eps2) return out;
  if (noise.eps1 == 0.0 || cfg.schedule.k1 == 0) {
    out.mitigated_runs = out.unmitigated_runs;
  } else {
    out.mitigated_runs = final_energies(layout, grid_settings(layout, cfg, m, noise, cfg.schedule, grid_index),
                                        cfg.runs, cfg.threads);
  }
  out.mitigated = aggregate(out.mitigated_runs);
  return out;
}

struct SweepMRow {
  double m;
  Aggregate unmitigated;
  std::optional<Aggregate> mitigated;
  double e0;
};

inline std::vector<SweepMRow> sweep_m(const ChipLayout& layout, const ExperimentConfig& cfg) {
  validate(cfg);
  const NoisePair noise = noise_pairs(cfg).front();
  std::vector<SweepMRow> rows;
  for (std::size_t i = 0; i < cfg.m.size(); ++i) {
    const auto cmp = compare_strategies(layout, cfg, cfg.m[i], noise, i);
    rows.push_back({cfg.m[i], cmp.unmitigated, cmp.mitigated, exact_ground_energy(cfg.m[i])});
  }
  return rows;
}

struct SweepNoiseRow {
  double eps1;
  std::optional<double> eps2;
  Aggregate unmitigated;
  Aggregate mitigated;
};

/// Noise sweep at the first configured m. The config's epsilon_levels are
/// the eps1 grid; eps2 = t eps1 with t = ratio (default 1.61).
inline std::vector<SweepNoiseRow> sweep_noise(const ChipLayout& layout, ExperimentConfig cfg) {
  if (!cfg.ratio) cfg.ratio = kDefaultRatio;
  validate(cfg);
  const auto pairs = noise_pairs(cfg);
  std::vector<SweepNoiseRow> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    NoisePair p = pairs[i];
    // eps1 = 0 carries no eps2; give it one so the fallback arm is reported.
    if (!p.eps2) p.eps2 = 0.0;
    const auto cmp = compare_strategies(layout, cfg, cfg.m.front(), p, i);
    rows.push_back({pairs[i].eps1, pairs[i].eps2, cmp.unmitigated, *cmp.mitigated});
  }
  return rows;
}

struct HeatmapCell {
  std::uint64_t budget = 0;  // N
  std::uint32_t k0 = 0;
  std::uint32_t k1 = 0;
  bool feasible = false;
  double mean_energy = std::numeric_limits<double>::quiet_NaN();
  double delta_e = std::numeric_limits<double>::quiet_NaN();  // |mean E - E0|
  double relative_error = std::numeric_limits<double>::quiet_NaN();  // R(N, k0)
  std::uint32_t runs = 0;
  bool budget_audit_ok = true;
};

struct RelativeErrorGrid {
  std::vector<std::uint64_t> budgets;
  std::vector<std::uint32_t> k0s;
  std::vector<HeatmapCell> cells;  // row-major over (budget, k0)

  const HeatmapCell& at(std::uint64_t budget, std::uint32_t k0) const {
    for (const auto& c : cells) {
      if (c.budget == budget && c.k0 == k0) return c;
    }
    throw std::out_of_range("RelativeErrorGrid: no cell (" + std::to_string(budget) + ", " + std::to_string(k0) + ")");
  }
};

inline std::vector<std::uint64_t> default_budget_grid(std::uint32_t n = kBasesPerIteration) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t u = 2; u <= 40; u += 2) out.push_back(n * u);
  return out;
}

inline std::vector<std::uint32_t> default_k0_grid() {
  std::vector<std::uint32_t> out;
  for (std::uint32_t k = 0; k <= 30; ++k) out.push_back(k);
  return out;
}

/// Trailing-window mean of the mitigated-stage estimates after the first
/// `k1` mitigated iterations.
inline double mitigated_prefix_energy(const VqeRunResult& r, std::uint32_t k1) {
  std::vector<double> est;
  for (const auto& it : r.iterations) {
    if (it.stage == Stage::Mitigated) est.push_back(it.estimate.value);
  }
  if (k1 == 0 || est.size() < k1) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t w = std::min<std::size_t>(kTrailingWindow, k1);
  double s = 0.0;
  for (std::size_t i = k1 - w; i < k1; ++i) s += est[i];
  return s / static_cast<double>(w);
}

/// Measurements spent after the first k1 mitigated iterations of `r`.
inline std::uint64_t measurements_after(const VqeRunResult& r, std::uint32_t k0, std::uint32_t k1) {
  const std::size_t idx = static_cast<std::size_t>(k0) + k1 - 1;
  if (idx >= r.iterations.size()) return 0;
  return r.iterations[idx].measurements;
}

/// R(N, k0) over the budget and k0 grids at the first configured m and the
/// (eps1, eps2) pair. Each (k0, run) is simulated once with the largest k1
/// any budget needs; a run truncated after k1 mitigated iterations is the
/// run with schedule (k0, k1), because the gain schedule does not depend
/// on the stage length. All k0 share grid index 0, so every run with the
/// same index starts from the same point and shares its unmitigated prefix.
inline RelativeErrorGrid deferred_heatmap(const ChipLayout& layout, const ExperimentConfig& cfg) {
  validate(cfg);
  const NoisePair noise = noise_pairs(cfg).front();
  if (!noise.eps2 || !(noise.eps1 > 0.0)) {
    throw ConfigError("deferred: needs 0 < eps1 < eps2 in epsilon_levels");
  }
  const std::uint32_t n = cfg.schedule.n;
  RelativeErrorGrid grid;
  grid.budgets = cfg.budget_grid.empty() ? default_budget_grid(n) : cfg.budget_grid;
  grid.k0s = cfg.k0_grid.empty() ? default_k0_grid() : cfg.k0_grid;
  std::sort(grid.k0s.begin(), grid.k0s.end());
  grid.k0s.erase(std::unique(grid.k0s.begin(), grid.k0s.end()), grid.k0s.end());
  if (grid.k0s.empty() || grid.k0s.front() != 0) grid.k0s.insert(grid.k0s.begin(), 0);

  const double m = cfg.m.front();
  const double e0 = exact_ground_energy(m);

  // Largest k1 needed per k0.
  std::vector<std::uint32_t> k1max(grid.k0s.size(), 0);
  for (std::size_t j = 0; j < grid.k0s.size(); ++j) {
    for (auto budget : grid.budgets) {
      if (auto s = schedule_for_budget(budget, grid.k0s[j], n)) k1max[j] = std::max(k1max[j], s->k1);
    }
  }

  const VqeSettings base = grid_settings(layout, cfg, m, noise, {0, 1, n}, 0);
  std::vector<std::vector<double>> sums(grid.k0s.size(), std::vector<double>(grid.budgets.size(), 0.0));
  std::vector<std::vector<std::uint32_t>> counts(grid.k0s.size(),
                                                 std::vector<std::uint32_t>(grid.budgets.size(), 0));
  std::vector<std::vector<bool>> audits(grid.k0s.size(), std::vector<bool>(grid.budgets.size(), true));

  for (std::size_t j = 0; j < grid.k0s.size(); ++j) {
    if (k1max[j] == 0) continue;
    VqeSettings s = base;
    s.schedule = {grid.k0s[j], k1max[j], n};
    // Per run: prefix energy and measurement count for every budget.
    struct PerRun {
      std::vector<double> energy;
      std::vector<std::uint64_t> spent;
    };
    const auto per_run = parallel_map(cfg.runs, cfg.threads, [&](std::size_t r) {
      VqeSettings sr = s;
      sr.run_index = r;
      const VqeRunResult res = run_vqe(layout, sr);
      PerRun out;
      for (auto budget : grid.budgets) {
        const auto sched = schedule_for_budget(budget, grid.k0s[j], n);
        if (!sched) {
          out.energy.push_back(std::numeric_limits<double>::quiet_NaN());
          out.spent.push_back(0);
          continue;
        }
        out.energy.push_back(mitigated_prefix_energy(res, sched->k1));
        out.spent.push_back(measurements_after(res, sched->k0, sched->k1));
      }
      return out;
    });
    for (const auto& pr : per_run) {
      for (std::size_t b = 0; b < grid.budgets.size(); ++b) {
        const auto sched = schedule_for_budget(grid.budgets[b], grid.k0s[j], n);
        if (!sched) continue;
        if (pr.spent[b] != measurements_used(*sched)) audits[j][b] = false;
        if (std::isfinite(pr.energy[b])) {
          sums[j][b] += pr.energy[b];
          ++counts[j][b];
        }
      }
    }
  }

  for (std::size_t b = 0; b < grid.budgets.size(); ++b) {
    const double ref_delta =
        counts[0][b] > 0 ? std::abs(sums[0][b] / counts[0][b] - e0) : std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j < grid.k0s.size(); ++j) {
      HeatmapCell c;
      c.budget = grid.budgets[b];
      c.k0 = grid.k0s[j];
      const auto sched = schedule_for_budget(c.budget, c.k0, n);
      c.feasible = sched.has_value();
      if (c.feasible) {
        c.k1 = sched->k1;
        c.runs = counts[j][b];
        c.budget_audit_ok = audits[j][b];
        if (c.runs > 0) {
          c.mean_energy = sums[j][b] / c.runs;
          c.delta_e = std::abs(c.mean_energy - e0);
          c.relative_error = c.k0 == 0 ? 1.0 : c.delta_e / ref_delta;
        }
      }
      grid.cells.push_back(c);
    }
  }
  return grid;
}

struct HomRow {
  double theta_deg;
  double epsilon;
  double visibility;
  double p_coincidence;
};

/// Coincidence probability of one photon pair on a balanced coupler.
inline double balanced_coupler_coincidence(double epsilon) {
  const ModeUnitary bs = directional_coupler(0.5, {0, 1}, 2);
  return coincidence_probability(bs, {0, 1, epsilon}, OutputPattern(0, 1));
}

inline std::vector<HomRow> hom_scan(const ChipLayout& layout, const std::vector<double>& theta_deg) {
  if (theta_deg.empty()) throw std::invalid_argument("hom_scan: empty theta grid");
  std::vector<HomRow> rows;
  for (double t : theta_deg) {
    const double eps = epsilon_of_theta(t * kPi / 180.0);
    rows.push_back({t, eps, hom_visibility(layout, eps), balanced_coupler_coincidence(eps)});
  }
  return rows;
}

inline std::vector<double> theta_grid_deg(std::uint32_t points) {
  if (points < 2) throw std::invalid_argument("theta grid needs at least 2 points");
  std::vector<double> out;
  for (std::uint32_t i = 0; i < points; ++i) out.push_back(90.0 * i / (points - 1));
  return out;
}

struct DiagResult {
  double m;
  double e0;
  std::array<double, 4> ground_state;
};

inline DiagResult diag(double m) { return {m, exact_ground_energy(m), ground_state(m)}; }

}  // namespace phzne
