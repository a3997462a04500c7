#include "phzne/config.hpp"
#include "phzne/experiments.hpp"
#include "phzne/io.hpp"
#include "phzne/vqe.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace phzne;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool exact = false;
  std::optional<double> shots;
  std::optional<std::uint32_t> runs;
  std::optional<std::vector<double>> m;
  std::optional<std::vector<double>> eps;
  std::optional<double> ratio;
  std::optional<std::vector<std::uint32_t>> schedule;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config_path, "key = value config file");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--out", f.out, "output directory");
  app->add_flag("--exact", f.exact, "analytic probabilities, no shot noise");
  app->add_option("--shots", f.shots, "expected coincidences per basis measurement");
  app->add_option("--runs", f.runs, "runs per grid point");
  app->add_option("-m,--m", f.m, "Hamiltonian parameter(s)")->delimiter(',');
  app->add_option("--eps", f.eps, "eps1,eps2 or an eps1 grid with --ratio")->delimiter(',');
  app->add_option("--ratio", f.ratio, "t in eps2 = t eps1");
  app->add_option("--schedule", f.schedule, "k0,k1")->delimiter(',')->expected(2);
  app->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

ExperimentConfig resolve(const CommonFlags& f, std::optional<double> default_ratio = std::nullopt) {
  ExperimentConfig cfg = f.config_path.empty() ? ExperimentConfig{} : load_config(f.config_path);
  if (f.seed) cfg.master_seed = *f.seed;
  if (f.out) cfg.output = *f.out;
  if (f.shots) cfg.shot_scale = *f.shots;
  if (f.exact) cfg.shot_scale.reset();
  if (f.runs) cfg.runs = *f.runs;
  if (f.m) cfg.m = *f.m;
  if (f.eps) cfg.epsilon_levels = *f.eps;
  if (f.ratio) cfg.ratio = *f.ratio;
  if (f.schedule) {
    cfg.schedule.k0 = (*f.schedule)[0];
    cfg.schedule.k1 = (*f.schedule)[1];
  }
  if (f.threads) cfg.threads = *f.threads;
  if (!cfg.ratio) cfg.ratio = default_ratio;
  validate(cfg);
  return cfg;
}

void require_seed(const CommonFlags& f, const char* command) {
  if (!f.seed) throw ConfigError(std::string(command) + ": --seed is required");
}

json config_echo(const ExperimentConfig& cfg) {
  json j;
  j["m"] = cfg.m;
  j["epsilon_levels"] = cfg.epsilon_levels;
  j["ratio"] = cfg.ratio ? json(*cfg.ratio) : json(nullptr);
  j["shot_scale"] = cfg.shot_scale ? json(*cfg.shot_scale) : json("exact");
  j["schedule"] = {cfg.schedule.k0, cfg.schedule.k1};
  j["runs"] = cfg.runs;
  j["master_seed"] = cfg.master_seed ? json(*cfg.master_seed) : json(nullptr);
  j["output"] = cfg.output;
  return j;
}

json aggregate_json(const Aggregate& a) {
  return {{"mean", a.mean}, {"std", a.stddev}, {"sem", a.sem}, {"count", a.count}};
}

void write_summary(const ExperimentConfig& cfg, const std::string& command, const json& headline) {
  json j;
  j["command"] = command;
  j["config"] = config_echo(cfg);
  j["master_seed"] = cfg.master_seed ? json(*cfg.master_seed) : json(nullptr);
  j["headline"] = headline;
  write_atomic(fs::path(cfg.output) / (command + ".json"), j.dump(2) + "\n");
}

std::optional<double> mean_of(const std::optional<Aggregate>& a) {
  if (!a) return std::nullopt;
  return a->mean;
}
std::optional<double> sem_of(const std::optional<Aggregate>& a) {
  if (!a) return std::nullopt;
  return a->sem;
}

int cmd_diag(const CommonFlags& f) {
  ExperimentConfig cfg = resolve(f);
  CsvTable table({"m", "E0", "amp00", "amp01", "amp10", "amp11"});
  json rows = json::array();
  std::cout << std::setprecision(10);
  for (double m : cfg.m) {
    const DiagResult d = diag(m);
    std::cout << "m = " << d.m << "\nE0 = " << d.e0 << "\nground state (|00>, |01>, |10>, |11>) = ("
              << d.ground_state[0] << ", " << d.ground_state[1] << ", " << d.ground_state[2] << ", "
              << d.ground_state[3] << ")\n";
    CsvTable::Row r;
    r.add(d.m).add(d.e0);
    for (double a : d.ground_state) r.add(a);
    table.push(r);
    rows.push_back({{"m", d.m}, {"E0", d.e0}, {"ground_state", d.ground_state}});
  }
  write_atomic(fs::path(cfg.output) / "diag.csv", table.str());
  write_summary(cfg, "diag", rows);
  return 0;
}

int cmd_hom_scan(const CommonFlags& f, std::optional<std::uint32_t> points) {
  ExperimentConfig cfg = resolve(f);
  if (points) cfg.theta_points = *points;
  const auto rows = hom_scan(build_chip(), theta_grid_deg(cfg.theta_points));
  CsvTable table({"theta", "epsilon", "V", "p_coincidence"});
  for (const auto& r : rows) table.push(CsvTable::Row().add(r.theta_deg).add(r.epsilon).add(r.visibility).add(r.p_coincidence));
  write_atomic(fs::path(cfg.output) / "hom_scan.csv", table.str());
  write_summary(cfg, "hom_scan", {{"points", rows.size()}, {"theta_unit", "degree"}});
  std::cout << "wrote " << (fs::path(cfg.output) / "hom_scan.csv").string() << " (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_vqe(const CommonFlags& f) {
  ExperimentConfig cfg = resolve(f);
  if (!cfg.master_seed) cfg.master_seed = 0;
  const ChipLayout layout = build_chip();
  const NoisePair noise = noise_pairs(cfg).front();
  MitigationSchedule schedule = cfg.schedule;
  if (!noise.eps2 || noise.eps1 == 0.0) schedule = {schedule.iterations(), 0, schedule.n};
  const VqeSettings base = grid_settings(layout, cfg, cfg.m.front(), noise, schedule, 0);

  const auto results = parallel_map(cfg.runs, cfg.threads, [&](std::size_t r) {
    VqeSettings s = base;
    s.run_index = r;
    return run_vqe(layout, s);
  });

  CsvTable trace({"run", "k", "stage", "N", "phi1", "phi2", "phi3", "phi4", "E_eps1", "E_eps1_std", "E_eps2",
                  "E_eps2_std", "estimate", "estimate_std"});
  CsvTable finals({"run", "final_energy", "final_energy_std", "last_iterate_energy", "N", "aborted", "phi1",
                   "phi2", "phi3", "phi4"});
  json runs = json::array();
  std::vector<double> energies;
  bool audit_ok = true;
  for (const auto& res : results) {
    for (const auto& it : res.iterations) {
      CsvTable::Row row;
      row.add(res.run_index).add(it.k).add(to_string(it.stage)).add(it.measurements);
      for (double p : it.params) row.add(p);
      row.add(it.e1.value).add(it.e1.stddev);
      row.add(it.e2 ? std::optional<double>(it.e2->value) : std::nullopt);
      row.add(it.e2 ? std::optional<double>(it.e2->stddev) : std::nullopt);
      row.add(it.estimate.value).add(it.estimate.stddev);
      trace.push(row);
    }
    CsvTable::Row row;
    row.add(res.run_index).add(res.final_energy.value).add(res.final_energy.stddev).add(res.last_iterate_energy.value)
        .add(res.measurements).add(res.aborted);
    for (double p : res.converged_params) row.add(p);
    finals.push(row);
    if (!res.aborted) audit_ok = audit_ok && res.measurements == measurements_used(schedule);
    energies.push_back(res.final_energy.value);
    runs.push_back({{"run", res.run_index},
                    {"final_energy", res.final_energy.value},
                    {"last_iterate_energy", res.last_iterate_energy.value},
                    {"measurements", res.measurements},
                    {"aborted", res.aborted}});
  }
  const Aggregate agg = aggregate(energies);
  write_atomic(fs::path(cfg.output) / "vqe_trace.csv", trace.str());
  write_atomic(fs::path(cfg.output) / "vqe_runs.csv", finals.str());
  json headline = {{"m", cfg.m.front()},
                   {"E0", exact_ground_energy(cfg.m.front())},
                   {"schedule", {schedule.k0, schedule.k1}},
                   {"measurements_per_run", measurements_used(schedule)},
                   {"budget_audit_ok", audit_ok},
                   {"final_energy", aggregate_json(agg)},
                   {"runs", runs}};
  write_summary(cfg, "vqe", headline);
  std::cout << std::setprecision(6) << "E = " << agg.mean << " +- " << agg.sem << " over " << agg.count
            << " runs (E0 = " << exact_ground_energy(cfg.m.front()) << ")\n";
  return audit_ok ? 0 : 3;
}

int cmd_sweep_m(const CommonFlags& f) {
  require_seed(f, "sweep-m");
  const ExperimentConfig cfg = resolve(f);
  const auto rows = sweep_m(build_chip(), cfg);
  CsvTable table({"m", "E_unmitigated", "E_mitigated", "E0", "E_unmitigated_sem", "E_mitigated_sem"});
  json out = json::array();
  for (const auto& r : rows) {
    table.push(CsvTable::Row().add(r.m).add(r.unmitigated.mean).add(mean_of(r.mitigated)).add(r.e0)
                   .add(r.unmitigated.sem).add(sem_of(r.mitigated)));
    out.push_back({{"m", r.m},
                   {"E_unmitigated", aggregate_json(r.unmitigated)},
                   {"E_mitigated", r.mitigated ? aggregate_json(*r.mitigated) : json(nullptr)},
                   {"E0", r.e0}});
  }
  write_atomic(fs::path(cfg.output) / "sweep_m.csv", table.str());
  write_summary(cfg, "sweep_m", out);
  std::cout << "wrote " << (fs::path(cfg.output) / "sweep_m.csv").string() << "\n";
  return 0;
}

int cmd_sweep_noise(const CommonFlags& f) {
  require_seed(f, "sweep-noise");
  const ExperimentConfig cfg = resolve(f, kDefaultRatio);
  const auto rows = sweep_noise(build_chip(), cfg);
  CsvTable table({"epsilon1", "E_unmitigated", "E_mitigated", "epsilon2", "E_unmitigated_sem", "E_mitigated_sem"});
  json out = json::array();
  for (const auto& r : rows) {
    table.push(CsvTable::Row().add(r.eps1).add(r.unmitigated.mean).add(r.mitigated.mean).add(r.eps2)
                   .add(r.unmitigated.sem).add(r.mitigated.sem));
    out.push_back({{"epsilon1", r.eps1},
                   {"epsilon2", r.eps2 ? json(*r.eps2) : json(nullptr)},
                   {"E_unmitigated", aggregate_json(r.unmitigated)},
                   {"E_mitigated", aggregate_json(r.mitigated)}});
  }
  write_atomic(fs::path(cfg.output) / "sweep_noise.csv", table.str());
  write_summary(cfg, "sweep_noise", {{"m", cfg.m.front()}, {"E0", exact_ground_energy(cfg.m.front())}, {"rows", out}});
  std::cout << "wrote " << (fs::path(cfg.output) / "sweep_noise.csv").string() << "\n";
  return 0;
}

int cmd_deferred(const CommonFlags& f) {
  require_seed(f, "deferred");
  const ExperimentConfig cfg = resolve(f);
  const RelativeErrorGrid grid = deferred_heatmap(build_chip(), cfg);
  CsvTable table({"N", "k0", "k1", "R", "delta_E", "E_mean", "runs", "feasible"});
  bool audit_ok = true;
  for (const auto& c : grid.cells) {
    CsvTable::Row row;
    row.add(c.budget).add(c.k0);
    if (c.feasible) {
      row.add(c.k1).add(c.relative_error).add(c.delta_e).add(c.mean_energy).add(c.runs);
    } else {
      row.add("").add("").add("").add("").add("");
    }
    row.add(c.feasible);
    table.push(row);
    audit_ok = audit_ok && c.budget_audit_ok;
  }
  write_atomic(fs::path(cfg.output) / "deferred.csv", table.str());
  json headline = {{"budgets", grid.budgets}, {"k0", grid.k0s}, {"budget_audit_ok", audit_ok}};
  for (const auto& c : grid.cells) {
    if (c.budget == 120 && c.k0 == 18 && c.feasible) headline["R_120_18"] = c.relative_error;
  }
  write_summary(cfg, "deferred", headline);
  std::cout << "wrote " << (fs::path(cfg.output) / "deferred.csv").string() << "\n";
  return audit_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photonic VQE with zero-noise extrapolation"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::optional<std::uint32_t> points;
  auto* diag_cmd = app.add_subcommand("diag", "exact ground energy and ground state");
  auto* hom_cmd = app.add_subcommand("hom-scan", "HOM visibility and coincidence vs wave-plate angle");
  auto* vqe_cmd = app.add_subcommand("vqe", "seeded VQE runs with the configured schedule");
  auto* sweep_m_cmd = app.add_subcommand("sweep-m", "ground energy vs m, both strategies");
  auto* sweep_noise_cmd = app.add_subcommand("sweep-noise", "ground energy vs eps1, both strategies");
  auto* deferred_cmd = app.add_subcommand("deferred", "relative error R(N, k0) of deferred mitigation");
  for (auto* sub : {diag_cmd, hom_cmd, vqe_cmd, sweep_m_cmd, sweep_noise_cmd, deferred_cmd}) add_common(sub, flags);
  hom_cmd->add_option("--points", points, "theta grid size over [0, 90] degrees");

  CLI11_PARSE(app, argc, argv);

  try {
    if (diag_cmd->parsed()) return cmd_diag(flags);
    if (hom_cmd->parsed()) return cmd_hom_scan(flags, points);
    if (vqe_cmd->parsed()) return cmd_vqe(flags);
    if (sweep_m_cmd->parsed()) return cmd_sweep_m(flags);
    if (sweep_noise_cmd->parsed()) return cmd_sweep_noise(flags);
    if (deferred_cmd->parsed()) return cmd_deferred(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
