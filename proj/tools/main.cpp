// Command-line front end: one-shot planning, receding-horizon simulation,
// and Monte Carlo benchmarking over the built-in intersection scenarios.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "fairplan/config.hpp"
#include "fairplan/export.hpp"

namespace fs = std::filesystem;
using namespace fairplan;

namespace {

struct CommonArgs {
  std::string scenario = "straight-2"; // kind name or config file path
  std::uint64_t seed = 0;
  std::string algorithm = "coordinated";
  std::string out;
  std::vector<std::string> params;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--scenario", a.scenario,
                  "Scenario kind (straight-2/3/4, merging-3) or config file path");
  cmd->add_option("--seed", a.seed, "Base random seed");
  cmd->add_option("--algorithm", a.algorithm, "coordinated | uncoordinated")
      ->check(CLI::IsMember({"coordinated", "uncoordinated"}));
  cmd->add_option("--out", a.out, "Output directory (created if missing)");
  cmd->add_option("--param", a.params, "key=value config overrides (repeatable)");
  cmd->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
}

ConfigMap resolve_config(const CommonArgs& a) {
  ConfigMap cfg;
  if (fs::exists(a.scenario) && fs::is_regular_file(a.scenario)) {
    cfg = load_config(a.scenario);
  } else {
    cfg.values["kind"] = a.scenario;
  }
  if (!cfg.has("seed") || a.seed != 0) cfg.values["seed"] = std::to_string(a.seed);
  cfg.values["params.threads"] = std::to_string(a.threads);
  cfg.apply_overrides(a.params);
  return cfg;
}

fs::path ensure_out(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

int cmd_plan(const CommonArgs& a) {
  ScenarioInstance sc = scenario_from_config(resolve_config(a));
  PlanOutcome out = plan_once(sc, a.algorithm);
  ValidationResult val = validate_ground_truth(out.executed, sc);
  std::cout << "scenario=" << sc.kind << " seed=" << sc.seed
            << " algorithm=" << out.algorithm
            << " converged=" << (out.converged ? "yes" : "no")
            << " iterations=" << out.iterations
            << " valid=" << (val.success ? "yes" : "no")
            << " concordance=" << out.concordance
            << " fairness_gap=" << out.fairness_gap
            << " total_time=" << out.total_time << "s\n";
  if (!val.success) std::cout << "validation: " << val.detail << '\n';
  if (!out.failure.empty()) std::cout << "failure: " << out.failure << '\n';
  if (!a.out.empty()) {
    fs::path dir = ensure_out(a.out);
    write_trajectories_csv((dir / "trajectories.csv").string(),
                           {{0, out.executed}});
    write_arrow_series_csv((dir / "arrows.csv").string(), out.executed);
    write_plan_json((dir / "plan.json").string(), out);
  }
  return out.converged && val.success ? 0 : 1;
}

int cmd_simulate(const CommonArgs& a, int steps) {
  ScenarioInstance sc = scenario_from_config(resolve_config(a));
  SimulationLog log = run_receding_horizon(sc, steps, a.algorithm);
  std::cout << "scenario=" << sc.kind << " seed=" << sc.seed
            << " steps=" << log.steps_run
            << " goals_reached=" << (log.all_goals_reached ? "yes" : "no")
            << " failed=" << (log.failed ? "yes" : "no") << '\n';
  if (log.failed) std::cout << "failure: " << log.failure << '\n';
  if (!a.out.empty())
    write_simulation_csv((ensure_out(a.out) / "simulation.csv").string(), log);
  return log.failed ? 1 : 0;
}

int cmd_bench(const CommonArgs& a, int runs, bool full) {
  ConfigMap cfg = resolve_config(a);
  const std::string kind = cfg.get_string("kind", "straight-2");
  AlgorithmParams params = params_from_config(cfg);
  params.threads = 1; // runs are the parallel unit here
  if (full) runs = 500;
  MonteCarloReport rep = run_monte_carlo(kind, runs, a.algorithm,
                                         cfg.get_u64("seed", 0), params, a.threads);
  std::cout << "kind=" << rep.kind << " algorithm=" << rep.algorithm
            << " runs=" << rep.runs << " success_rate=" << rep.success_rate
            << " convergence_rate=" << rep.convergence_rate
            << " concordance_mean=" << rep.concordance_mean
            << " fairness_gap_max=" << rep.fairness_gap_max
            << " vehicle_time_median=" << rep.vehicle_time_median << "s"
            << " coordinator_time_mean=" << rep.coordinator_time_mean << "s\n";
  for (const MonteCarloRecord& rec : rep.records)
    if (!rec.success)
      std::cout << "failed run seed=" << rec.seed << ": "
                << (rec.failure.empty() ? "validation" : rec.failure) << '\n';
  if (!a.out.empty()) {
    fs::path dir = ensure_out(a.out);
    write_report_json((dir / "report.json").string(), rep);
    write_timing_csv((dir / "timings.csv").string(), rep);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-vehicle interaction-fair trajectory planner"};
  app.require_subcommand(1);

  CommonArgs plan_args, sim_args, bench_args;
  int steps = 60, runs = 100;
  bool full = false;

  CLI::App* plan = app.add_subcommand("plan", "Plan one horizon");
  add_common(plan, plan_args);
  CLI::App* simulate = app.add_subcommand("simulate", "Receding-horizon replay");
  add_common(simulate, sim_args);
  simulate->add_option("--steps", steps, "Replan steps")->check(CLI::PositiveNumber);
  CLI::App* bench = app.add_subcommand("bench", "Monte Carlo benchmark");
  add_common(bench, bench_args);
  bench->add_option("--runs", runs, "Number of runs")->check(CLI::PositiveNumber);
  bench->add_flag("--full", full, "Use 500 runs");

  try {
    app.parse(argc, argv);
    if (plan->parsed()) return cmd_plan(plan_args);
    if (simulate->parsed()) return cmd_simulate(sim_args, steps);
    if (bench->parsed()) return cmd_bench(bench_args, runs, full);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "planner failure: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
