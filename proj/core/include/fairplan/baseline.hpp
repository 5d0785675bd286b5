#pragma once

#include "fairplan/planner.hpp"

namespace fairplan {

/// Outcome of one vehicle independently solving the whole game: its
/// prediction of every vehicle's plan, of which only its own is executed.
struct LocalGameSolve {
  int owner = -1;
  PlanResult result;
};

/// Uncoordinated comparison planner: vehicle `i` runs the full
/// augmented-Lagrangian game solve by itself, with its own penalty draws and
/// its own (jittered) initialization, applying consensus internally so its
/// local fixed point is well defined.
LocalGameSolve uncoordinated_solve(int i, const ScenarioInstance& scenario,
                                   const AlgorithmParams& params);

/// All vehicles' local solves plus the profile actually driven (each
/// vehicle's own plan from its own solve).
struct UncoordinatedOutcome {
  std::vector<LocalGameSolve> solves;
  StrategyProfile executed;
  bool all_converged = false;
};

UncoordinatedOutcome uncoordinated_plan(const ScenarioInstance& scenario);

} // namespace fairplan
