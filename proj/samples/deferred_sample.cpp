// Small deferred-mitigation run: a few seeded VQE runs at m = -10 with
// 12 unmitigated iterations followed by 6 extrapolated ones.
#include "phzne/experiments.hpp"

#include <cstdio>

int main() {
  using namespace phzne;
  const ChipLayout chip = build_chip();

  ExperimentConfig cfg;
  cfg.master_seed = 2024;
  cfg.runs = 8;
  cfg.schedule = {12, 6, kBasesPerIteration};

  const NoisePair noise{0.18, 0.29};
  const VqeSettings base = grid_settings(chip, cfg, -10.0, noise, cfg.schedule, 0);
  const auto energies = final_energies(chip, base, cfg.runs, 0);
  const Aggregate a = aggregate(energies);

  std::printf("E0            %.4f\n", exact_ground_energy(-10.0));
  std::printf("E (deferred)  %.4f +- %.4f over %zu runs\n", a.mean, a.sem, a.count);
  std::printf("measurements  %llu per run\n", static_cast<unsigned long long>(measurements_used(cfg.schedule)));
  return 0;
}
