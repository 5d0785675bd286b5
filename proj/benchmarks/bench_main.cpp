// Microbenchmarks for the planner hot path: the per-vehicle QP solve, the
// pairwise collision-constraint linearization, and the full game solve on
// each generated situation.

#include <benchmark/benchmark.h>

#include "fairplan/constraints.hpp"
#include "fairplan/harness.hpp"
#include "fairplan/planner.hpp"
#include "fairplan/qp.hpp"

namespace {

using namespace fairplan;

const PlanResult& solved_straight2() {
  static PlanResult plan = [] {
    ScenarioInstance sc = generate_scenario("straight-2", 6);
    return plan_game(sc);
  }();
  return plan;
}

void BM_SubproblemQp(benchmark::State& state) {
  const QuadraticProgram& qp = solved_straight2().details[0].qp;
  for (auto _ : state) {
    QpSolution sol = solve_qp(qp);
    benchmark::DoNotOptimize(sol.z);
  }
}
BENCHMARK(BM_SubproblemQp)->Unit(benchmark::kMicrosecond);

void BM_PairLinearization(benchmark::State& state) {
  ScenarioInstance sc = generate_scenario("straight-2", 6);
  const PlanResult& plan = solved_straight2();
  for (auto _ : state) {
    CollisionPairLin lin = linearize_collision_pair(
        0, 1, plan.profile[0], plan.profile[1], sc.vehicles[0].params);
    benchmark::DoNotOptimize(lin.value);
  }
}
BENCHMARK(BM_PairLinearization)->Unit(benchmark::kMicrosecond);

void BM_PlanGame(benchmark::State& state, const char* kind) {
  ScenarioInstance sc = generate_scenario(kind, 6);
  sc.params.threads = 1;
  for (auto _ : state) {
    PlanResult res = plan_game(sc);
    benchmark::DoNotOptimize(res.report);
  }
}
BENCHMARK_CAPTURE(BM_PlanGame, straight2, "straight-2")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PlanGame, straight3, "straight-3")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PlanGame, straight4, "straight-4")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PlanGame, merging3, "merging-3")->Unit(benchmark::kMillisecond);

void BM_UncoordinatedPass(benchmark::State& state) {
  ScenarioInstance sc = generate_scenario("merging-3", 6);
  sc.params.threads = 1;
  for (auto _ : state) {
    PlanOutcome out = plan_once(sc, "uncoordinated");
    benchmark::DoNotOptimize(out.concordance);
  }
}
BENCHMARK(BM_UncoordinatedPass)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
