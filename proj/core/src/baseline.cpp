#include "fairplan/baseline.hpp"

#include <random>

namespace fairplan {

LocalGameSolve uncoordinated_solve(int i, const ScenarioInstance& scenario,
                                   const AlgorithmParams& params) {
  LocalGameSolve out;
  out.owner = i;
  const std::uint64_t owner_seed =
      derive_seed(scenario.seed ^ 0xB45EULL, static_cast<std::uint64_t>(i));

  // The owner guesses everyone's nominal on its own: without coordination the
  // initialization (and hence the linearized game) differs between vehicles.
  std::mt19937_64 rng(owner_seed);
  std::uniform_real_distribution<double> jitter(1.0 - params.baseline_init_jitter,
                                                1.0 + params.baseline_init_jitter);
  std::vector<Trajectory> nominals;
  nominals.reserve(scenario.size());
  for (const VehicleSpec& v : scenario.vehicles) {
    const double scale = (v.id == i) ? 1.0 : jitter(rng);
    nominals.push_back(make_initial_nominal(v, params, scale));
  }

  AlgorithmParams local = params;
  local.threads = 1; // the whole game runs inside one vehicle
  out.result = plan_game(scenario, nominals, local, owner_seed);
  return out;
}

UncoordinatedOutcome uncoordinated_plan(const ScenarioInstance& scenario) {
  UncoordinatedOutcome out;
  out.solves.reserve(scenario.size());
  for (int i = 0; i < scenario.size(); ++i)
    out.solves.push_back(uncoordinated_solve(i, scenario, scenario.params));
  out.all_converged = true;
  for (int i = 0; i < scenario.size(); ++i) {
    out.executed.push_back(out.solves[i].result.profile[i]);
    out.all_converged = out.all_converged && out.solves[i].result.report.converged;
  }
  return out;
}

} // namespace fairplan
