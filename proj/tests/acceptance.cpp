// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit
// status is nonzero when any criterion fails.
#include "oracles.hpp"
#include "phzne/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace phzne;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failures;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures += " [failed: " + what + "]";
    }
  }
};

const ChipLayout& chip() {
  static const ChipLayout layout = build_chip();
  return layout;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

double mean_abs_gap(const std::vector<double>& v, double e0) {
  double s = 0;
  for (double x : v) s += std::abs(x - e0);
  return s / static_cast<double>(v.size());
}

// 1. ground energies against dense diagonalization
void c1(Outcome& o) {
  double worst = 0;
  for (double m = -10; m <= 10; m += 0.5) {
    worst = std::max(worst, std::abs(diag(m).e0 - oracle::ground_energy(m)));
  }
  const double e = diag(-10).e0;
  o.require(worst < 1e-6, "diag vs dense eigensolver");
  o.require(std::round(e * 10) / 10 == -9.2, "E0(-10) rounds to -9.2");
  o.detail << "max |diff| " << worst << ", E0(-10) = " << e;
}

// 2. HOM law on the balanced coupler and the chip monitor
void c2(Outcome& o) {
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const double th = 45.0 * i / 99.0;
    const auto row = hom_scan(chip(), {th}).front();
    const double s = std::sin(2 * th * kPi / 180);
    worst = std::max(worst, std::abs(row.p_coincidence - s * s / 2));
  }
  const auto ends = hom_scan(chip(), {0.0, 45.0});
  o.require(worst < 1e-12, "p(theta) = sin^2(2 theta)/2");
  o.require(std::abs(ends[0].visibility - 1) < 1e-12, "V(0) = 1");
  o.require(std::abs(ends[1].visibility) < 1e-12, "V(45) = 0");
  const double e10 = epsilon_of_theta(10 * kPi / 180);
  o.require(std::abs(e10 - 0.2095) < 1e-4, "eps(10 deg) = 0.2095");
  o.detail << "max |diff| " << worst << ", eps(10) = " << e10;
}

// 3. affine dependence on 2 eps / (2 - eps)
void c3(Outcome& o) {
  std::mt19937_64 g(3);
  std::uniform_int_distribution<int> mode(0, 5);
  double worst_pattern = 0;
  for (int t = 0; t < 50; ++t) {
    const oracle::Mat um = oracle::haar_unitary(6, g);
    const ModeUnitary u(um, 1e-10);
    int a = mode(g), b = mode(g);
    while (b == a) b = mode(g);
    int j = mode(g), k = mode(g);
    while (k == j) k = mode(g);
    std::vector<double> xs, ys;
    for (int i = 0; i <= 10; ++i) {
      const double eps = i / 10.0;
      xs.push_back(2 * eps / (2 - eps));
      ys.push_back(coincidence_probability(u, {static_cast<std::size_t>(a), static_cast<std::size_t>(b), eps},
                                           OutputPattern(static_cast<std::size_t>(j), static_cast<std::size_t>(k))));
    }
    worst_pattern = std::max(worst_pattern, oracle::affine_fit_residual(xs, ys));
  }
  std::uniform_real_distribution<double> ph(0, 2 * kPi);
  double worst_energy = 0;
  for (int t = 0; t < 20; ++t) {
    const PrepPhases prep{ph(g), ph(g), ph(g), ph(g)};
    std::vector<double> xs, ys;
    for (int i = 0; i <= 10; ++i) {
      const double eps = i / 10.0;
      xs.push_back(2 * eps / (2 - eps));
      ys.push_back(exact_energy(chip(), prep, -10.0, eps));
    }
    worst_energy = std::max(worst_energy, oracle::affine_fit_residual(xs, ys));
  }
  o.require(worst_pattern < 1e-10, "unbunched pattern affine fit");
  o.require(worst_energy < 1e-10, "chip energy affine fit");
  o.detail << "pattern residual " << worst_pattern << ", energy residual " << worst_energy;
}

// 4. post-selected CNOT at zero noise
void c4(Outcome& o) {
  std::mt19937_64 g(4);
  std::vector<std::pair<oracle::Vec2, oracle::Vec2>> states;
  for (int c = 0; c < 2; ++c)
    for (int t = 0; t < 2; ++t) {
      oracle::Vec2 vc(1 - c, c), vt(1 - t, t);
      states.push_back({vc, vt});
    }
  for (int i = 0; i < 20; ++i) states.push_back({oracle::random_qubit(g), oracle::random_qubit(g)});
  const char pauli[3] = {'X', 'Y', 'Z'};
  double worst = 0, worst_succ = 0;
  for (const auto& [c, t] : states) {
    const auto prep = product_state_phases(c(0), c(1), t(0), t(1));
    const oracle::Vec4 want = oracle::cnot(oracle::kron(c, t));
    for (std::size_t b = 0; b < 3; ++b) {
      const auto ps = outcome_probabilities(chip(), prep, kAllBases[b], 0.0);
      const auto ref = oracle::basis_probabilities(want, pauli[b]);
      for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(ps.probs.p[k] - ref[k]));
      worst_succ = std::max(worst_succ, std::abs(ps.success_prob - 1.0 / 9.0));
    }
  }
  o.require(worst < 1e-10, "basis probabilities equal CNOT output");
  o.require(worst_succ < 1e-9, "success probability 1/9");
  o.detail << "max prob diff " << worst << ", max success diff " << worst_succ;
}

// 5. energy identity and variational bound on random states
void c5(Outcome& o) {
  std::mt19937_64 g(5);
  const char pauli[3] = {'X', 'Y', 'Z'};
  double worst = 0, worst_bound = 0;
  for (double m : {-10.0, -5.0, 0.0, 5.0, 10.0}) {
    for (int i = 0; i < 50; ++i) {
      const oracle::Vec4 psi = oracle::random_state(g);
      std::array<OutcomeProbs, 3> p;
      for (int b = 0; b < 3; ++b) p[b].p = oracle::basis_probabilities(psi, pauli[b]);
      const double e = energy_from_probs(p[0], p[1], p[2], m);
      worst = std::max(worst, std::abs(e - oracle::expectation(psi, m)));
      worst_bound = std::max(worst_bound, oracle::ground_energy(m) - e);
    }
  }
  o.require(worst < 1e-10, "energy equals <psi|H|psi>");
  o.require(worst_bound <= 1e-10, "energy >= E0");
  o.detail << "max identity diff " << worst;
}

// 6. two-point extrapolation and its variance
void c6(Outcome& o) {
  std::mt19937_64 g(6);
  std::uniform_real_distribution<double> u(-10, 10);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double c1 = u(g), c2 = u(g);
    const double z = linear_zne({c1 + c2 * 0.18, 0}, {c1 + c2 * 0.29, 0}, 0.18, 0.29).value;
    worst = std::max(worst, std::abs(z - c1));
  }
  const double v = zne_variance(1, 1, 0.18, 0.29);
  std::normal_distribution<double> n(0, 1);
  double s = 0, sq = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    const double z = linear_zne({-7 + n(g), 0}, {-6 + n(g), 0}, 0.18, 0.29).value;
    s += z;
    sq += z * z;
  }
  const double var = sq / trials - (s / trials) * (s / trials);
  o.require(worst < 1e-12, "exact on linear data");
  o.require(std::abs(v - 9.628) < 1e-3, "variance factor 9.628");
  o.require(std::abs(var / v - 1) < 0.03, "Monte Carlo variance within 3%");
  o.detail << "max err " << worst << ", factor " << v << ", MC ratio " << var / v;
}

// 7. noise-free convergence
void c7(Outcome& o) {
  ExperimentConfig cfg;
  cfg.shot_scale.reset();
  cfg.master_seed = 7;
  const auto s = grid_settings(chip(), cfg, -10.0, {0.0, std::nullopt}, {200, 0, kBasesPerIteration}, 0);
  const auto e = final_energies(chip(), s, 20, 0);
  const double e0 = exact_ground_energy(-10);
  std::vector<double> gaps;
  double lowest = 1e9;
  for (double v : e) {
    gaps.push_back(std::abs(v - e0));
    lowest = std::min(lowest, v);
  }
  const double med = median(gaps);
  o.require(med < 0.05, "median |E - E0| < 0.05");
  o.require(lowest >= e0 - 1e-6, "no run below E0");
  o.detail << "median gap " << med << ", lowest " << lowest;
}

// 8. mitigation trades variance for bias at the reference noise pair
void c8(Outcome& o) {
  ExperimentConfig cfg;
  cfg.runs = 100;
  cfg.master_seed = 8;
  const auto cmp = compare_strategies(chip(), cfg, -10.0, {0.18, 0.29}, 0);
  const double e0 = exact_ground_energy(-10);
  const double bu = mean_abs_gap(cmp.unmitigated_runs, e0);
  const double bm = mean_abs_gap(cmp.mitigated_runs, e0);
  o.require(bm < bu, "mean |E_est - E0| < mean |E1 - E0|");
  o.require(cmp.unmitigated.mean >= e0 + 0.5, "unmitigated mean >= E0 + 0.5");
  o.require(std::abs(cmp.mitigated->mean - e0) < std::abs(cmp.unmitigated.mean - e0), "mitigated mean closer");
  o.require(cmp.mitigated->stddev > cmp.unmitigated.stddev, "mitigated std larger");
  o.detail << "unmitigated " << cmp.unmitigated.mean << " +- " << cmp.unmitigated.stddev << ", mitigated "
           << cmp.mitigated->mean << " +- " << cmp.mitigated->stddev << ", E0 " << e0;
}

// 9. noise sweeps in exact mode
void c9(Outcome& o) {
  std::vector<double> means;
  for (double e : {0.1, 0.3, 0.5, 0.7}) {
    ExperimentConfig cfg;
    cfg.shot_scale.reset();
    cfg.epsilon_levels = {e};
    cfg.runs = 20;
    cfg.master_seed = 9;
    means.push_back(sweep_m(chip(), cfg)[0].unmitigated.mean);
  }
  bool increasing = true;
  for (std::size_t i = 0; i + 1 < means.size(); ++i) increasing = increasing && means[i] < means[i + 1];
  o.require(increasing, "unmitigated energy strictly increasing in eps1");

  ExperimentConfig cfg;
  cfg.shot_scale.reset();
  cfg.epsilon_levels = {0.1, 0.2, 0.3, 0.4};
  cfg.ratio = 1.61;
  cfg.runs = 20;
  cfg.master_seed = 9;
  const double e0 = exact_ground_energy(-10);
  bool wins = true;
  for (const auto& r : sweep_noise(chip(), cfg)) {
    const bool w = std::abs(r.mitigated.mean - e0) < std::abs(r.unmitigated.mean - e0);
    wins = wins && w;
    o.detail << "eps1 " << r.eps1 << ": " << r.unmitigated.mean << " vs " << r.mitigated.mean << "; ";
  }
  o.require(wins, "mitigated closer at every eps1");
  o.detail << "unmitigated means";
  for (double v : means) o.detail << ' ' << v;
}

// 10. deferred mitigation heatmap
void c10(Outcome& o) {
  ExperimentConfig cfg;
  cfg.runs = 100;
  cfg.master_seed = 10;
  const auto grid = deferred_heatmap(chip(), cfg);
  bool ref_one = true, below_one = true, audits = true;
  for (const auto& c : grid.cells) {
    audits = audits && c.budget_audit_ok;
    if (c.k0 == 0 && c.feasible) ref_one = ref_one && c.relative_error == 1.0;
    if (c.k0 > 0 && c.feasible) below_one = below_one && c.relative_error < 1.0;
  }
  const double r = grid.at(120, 18).relative_error;
  o.require(ref_one, "R(N, 0) = 1");
  o.require(below_one, "R < 1 for every feasible k0 > 0");
  o.require(r < 0.5, "R(120, 18) < 0.5");
  o.require(audits, "budget audits");
  o.detail << "R(120, 18) = " << r;
}

}  // namespace

int main() {
  const std::vector<std::function<void(Outcome&)>> checks{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10};
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Outcome o;
    try {
      checks[i](o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.failures += std::string(" [exception: ") + e.what() + "]";
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu: %s\n", o.pass ? "PASS" : "FAIL", i + 1, (o.detail.str() + o.failures).c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
