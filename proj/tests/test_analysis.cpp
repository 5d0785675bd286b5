#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fairplan/analysis.hpp"
#include "fairplan/harness.hpp"
#include "oracles.hpp"

using namespace fairplan;

namespace {

PlanResult& solved_straight2() {
  static ScenarioInstance sc = generate_scenario("straight-2", 6);
  static PlanResult res = plan_game(sc);
  return res;
}

ScenarioInstance& scenario_straight2() {
  static ScenarioInstance sc = generate_scenario("straight-2", 6);
  return sc;
}

} // namespace

TEST_CASE("a converged solve passes the equilibrium certificate") {
  PlanResult& res = solved_straight2();
  REQUIRE(res.report.converged);
  KktReport rep = ve_kkt_check(res, scenario_straight2());
  CHECK(rep.ve_certified);
  CHECK(rep.fairness_gap == 0.0);
  CHECK(rep.max_residual() <= 1e-3);
  for (double s : rep.stationarity) CHECK(s <= 1e-3);
  for (double d : rep.dual_negativity) CHECK(d == 0.0);
}

TEST_CASE("breaking multiplier symmetry voids the certificate") {
  PlanResult res = solved_straight2();
  REQUIRE_FALSE(res.graph.edges.empty());
  auto [i, j] = res.graph.edges.front();
  res.multipliers.lambda[{i, j}].array() += 0.1;
  KktReport rep = ve_kkt_check(res, scenario_straight2());
  CHECK_FALSE(rep.ve_certified);
  CHECK(rep.fairness_gap == doctest::Approx(0.1));
}

TEST_CASE("a perturbed profile fails the stationarity residual") {
  ScenarioInstance sc = scenario_straight2();
  PlanResult res = solved_straight2();
  res.profile[0].decision().array() += 1e-2; // push off the optimum
  KktReport rep = gne_kkt_residual(res, sc);
  KktReport clean = gne_kkt_residual(solved_straight2(), sc);
  CHECK(rep.stationarity[0] > 1e-3);
  CHECK(rep.stationarity[0] > clean.stationarity[0]);
}

TEST_CASE("multipliers predict the optimal-value slope of their row") {
  // Probes need settled multiplier estimates; runs whose penalties hit the
  // cap recover them too noisily and are skipped.
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 25 && checked < 6; ++seed) {
    ScenarioInstance sc = generate_scenario("merging-3", seed);
    PlanResult res = plan_game(sc);
    if (!res.report.converged || res.multipliers.penalty_capped) continue;
    for (const auto& [i, j, k] : active_coupled_rows(res, sc.params.horizon)) {
      SensitivityProbe p = sensitivity_probe(res, i, j, k, 1e-4, sc);
      if (!p.feasible) continue;
      CHECK(p.matches());
      CHECK(p.convexity_bound_ok);
      ++checked;
    }
  }
  CHECK(checked >= 2);
}

TEST_CASE("concordance counts matching first controls") {
  Trajectory a(3, 0.1, {0, 0, 10, 0}), b(3, 0.1, {5, 5, 10, 0});
  a.set_control(1, {0.5, 0.0});
  b.set_control(1, {-0.5, 0.0});
  StrategyProfile actual = {a, b};

  // Vehicle 0 predicts vehicle 1 exactly; vehicle 1 is off by 1.0 on accel.
  StrategyProfile pred0 = actual;
  StrategyProfile pred1 = actual;
  pred1[0].set_control(1, {1.5, 0.0});
  CHECK(equilibrium_concordance({pred0, pred1}, actual) == doctest::Approx(0.5));
  CHECK(equilibrium_concordance({actual, actual}, actual) == doctest::Approx(1.0));
}

TEST_CASE("validator flags an exact pairwise overlap") {
  ScenarioInstance sc = scenario_straight2();
  // Two head-on straight-line rollouts through the same point.
  StrategyProfile bad;
  for (int i = 0; i < 2; ++i) {
    Trajectory t(sc.params.horizon, sc.params.ts,
                 {i == 0 ? -5.0 : 5.0, -1.75, 10.0, i == 0 ? 0.0 : M_PI});
    for (int k = 2; k <= sc.params.horizon; ++k) {
      VehicleState x = t.initial_state();
      x.px += x.v * sc.params.ts * (k - 1) * std::cos(x.psi);
      t.set_state(k, x);
    }
    bad.push_back(t);
  }
  ValidationResult r = validate_ground_truth(bad, sc);
  CHECK_FALSE(r.success);
  CHECK_FALSE(r.collision_free);
  CHECK(r.worst_collision > 0.0);
  CHECK(r.offending_i == 0);
  CHECK(r.offending_j == 1);
  CHECK(r.offending_step >= 2);
  CHECK_FALSE(r.detail.empty());
}

TEST_CASE("validator flags a vehicle that stops short of its goal") {
  ScenarioInstance sc = scenario_straight2();
  StrategyProfile still;
  for (const VehicleSpec& v : sc.vehicles) {
    VehicleState x = v.start;
    x.v = 0.0;
    Trajectory t(sc.params.horizon, sc.params.ts, x);
    for (int k = 2; k <= sc.params.horizon; ++k) t.set_state(k, x);
    still.push_back(t);
  }
  ValidationResult r = validate_ground_truth(still, sc);
  CHECK_FALSE(r.goals_ok);
  CHECK_FALSE(r.success);
}

TEST_CASE("validator accepts the planner output") {
  PlanResult& res = solved_straight2();
  ValidationResult r = validate_ground_truth(res.profile, scenario_straight2());
  CHECK(r.success);
  CHECK(r.collision_free);
  CHECK(r.lanes_ok);
  CHECK(r.box_ok);
  CHECK(r.goals_ok);
}

TEST_CASE("validator flags a control outside its box") {
  ScenarioInstance sc = scenario_straight2();
  PlanResult res = solved_straight2();
  StrategyProfile p = res.profile;
  ControlInput u = p[0].control(1);
  u.a = sc.vehicles[0].params.a_max + 1.0;
  p[0].set_control(1, u);
  ValidationResult r = validate_ground_truth(p, sc);
  CHECK_FALSE(r.box_ok);
  CHECK_FALSE(r.success);
}
