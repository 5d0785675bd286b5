#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fairplan/analysis.hpp"
#include "fairplan/baseline.hpp"

namespace fairplan {

/// Builds a concrete randomized instance of one of the benchmark situations
/// at a two-way two-lane intersection (lane width 3.5 m, arms 60 m):
///   straight-2: eastbound + northbound through traffic
///   straight-3: + westbound
///   straight-4: + southbound
///   merging-3:  two eastbound vehicles + one right-turning merger
/// Initial route distances are sampled uniformly in per-kind rectangles and
/// initial speeds in [5, 15] m/s; deterministic per seed.  Samples violating
/// the pairwise initial-clearance requirement are redrawn (bounded retries).
ScenarioInstance generate_scenario(const std::string& kind, std::uint64_t seed,
                                   const AlgorithmParams& params = {});

/// Single vehicle on one of the intersection routes ("east", "north", "west",
/// "south", or "merge-east") starting `distance` metres before the centre,
/// for hand-assembled custom scenarios.
VehicleSpec make_intersection_vehicle(int id, const std::string& route,
                                      double distance, double speed,
                                      const AlgorithmParams& params);

/// One planning pass with either the coordinated game solve ("coordinated")
/// or the uncoordinated per-vehicle baseline ("uncoordinated"), plus the
/// derived agreement metrics.
struct PlanOutcome {
  std::string algorithm;
  bool converged = false;
  StrategyProfile executed;
  std::vector<StrategyProfile> predicted; // per vehicle: its view of everyone
  double concordance = 1.0;
  double fairness_gap = 0.0;
  int iterations = 0;
  std::vector<double> vehicle_time; // seconds per vehicle
  double coordinator_time = 0.0;
  double total_time = 0.0;
  std::vector<double> violation_history;
  std::string failure;
  std::optional<PlanResult> game;     // coordinated run only
  std::vector<LocalGameSolve> locals; // uncoordinated run only
};

PlanOutcome plan_once(const ScenarioInstance& scenario, const std::string& algorithm);

/// Closed-loop replay: apply each vehicle's first control, advance one
/// period, shift the plans as the next warm start, and replan.
struct SimulationLog {
  std::string kind;
  std::string algorithm;
  int steps_run = 0;
  bool all_goals_reached = false;
  bool failed = false;
  std::string failure;
  std::vector<std::vector<VehicleState>> states;   // [vehicle][time 0..steps]
  std::vector<std::vector<ControlInput>> controls; // [vehicle][time 0..steps-1]
  std::vector<double> plan_time;                   // per replan
  std::vector<bool> converged;                     // per replan
};

SimulationLog run_receding_horizon(const ScenarioInstance& scenario, int steps,
                                   const std::string& algorithm);

struct MonteCarloRecord {
  std::uint64_t seed = 0;
  bool converged = false;
  bool success = false;
  double concordance = 0.0;
  double fairness_gap = 0.0;
  int iterations = 0;
  std::vector<double> vehicle_time;
  double coordinator_time = 0.0;
  double total_time = 0.0;
  double worst_collision = 0.0;
  std::vector<double> violation_history; // per-iteration v, kept for replay
  std::string failure;
};

struct MonteCarloReport {
  std::string kind;
  std::string algorithm;
  int runs = 0;
  double success_rate = 0.0;
  double convergence_rate = 0.0;
  double concordance_mean = 0.0;
  double concordance_min = 1.0;
  double fairness_gap_max = 0.0;
  double vehicle_time_mean = 0.0;   // seconds, over (run, vehicle)
  double vehicle_time_median = 0.0;
  double coordinator_time_mean = 0.0;
  double coordinator_time_std = 0.0;
  double coordinator_share_max = 0.0; // max over runs of coordinator/total
  std::vector<MonteCarloRecord> records;
};

/// Runs seeds seed0 .. seed0 + n_runs - 1, optionally in parallel; the
/// aggregate rates and per-run records are independent of the worker count
/// (timing fields measure wall clock and are exempt).
MonteCarloReport run_monte_carlo(const std::string& kind, int n_runs,
                                 const std::string& algorithm, std::uint64_t seed0,
                                 const AlgorithmParams& params = {},
                                 int workers = 1);

} // namespace fairplan
