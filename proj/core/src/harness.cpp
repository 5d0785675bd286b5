#include "fairplan/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <random>

namespace fairplan {

namespace {

constexpr double kLaneWidth = 3.5;
constexpr double kArmLength = 60.0;
constexpr double kCenter = kLaneWidth / 2.0; // centerline offset, 1.75 m
constexpr double kMergeRadius = 7.0;
constexpr double kGoalFraction = 0.5; // goal progress per v0 * horizon length
constexpr double kMinClearance = 8.0; // center distance between initial poses

enum class Arm { east, north, west, south };

Route through_route(Arm arm) {
  switch (arm) {
    case Arm::east: return Route::straight(-kArmLength, -kCenter, 0.0);
    case Arm::north: return Route::straight(kCenter, -kArmLength, M_PI / 2.0);
    case Arm::west: return Route::straight(kArmLength, kCenter, M_PI);
    case Arm::south: return Route::straight(-kCenter, kArmLength, -M_PI / 2.0);
  }
  throw InternalError("unknown arm");
}

std::vector<ScopedLaneLine> lane_pair(double ax, double ay, double inner_c,
                                      double outer_c, double s_begin = -1e18,
                                      double s_end = 1e18) {
  // Two parallel boundaries; the interior side of each is <= 0.
  std::vector<ScopedLaneLine> out;
  out.push_back({LaneLine::normalized(ax, ay, inner_c), s_begin, s_end});
  out.push_back({LaneLine::normalized(-ax, -ay, outer_c), s_begin, s_end});
  return out;
}

std::vector<ScopedLaneLine> through_lanes(Arm arm) {
  switch (arm) {
    case Arm::east: return lane_pair(0, 1, 0.0, -kLaneWidth);   // y in [-3.5, 0]
    case Arm::west: return lane_pair(0, 1, -kLaneWidth, 0.0);   // y in [0, 3.5]
    case Arm::north: return lane_pair(1, 0, -kLaneWidth, 0.0);  // x in [0, 3.5]
    case Arm::south: return lane_pair(1, 0, 0.0, -kLaneWidth);  // x in [-3.5, 0]
  }
  throw InternalError("unknown arm");
}

struct VehicleDraw {
  Arm arm;
  bool merging = false;
  double dist_lo = 25.0, dist_hi = 35.0; // initial distance range to the center
};

std::vector<VehicleDraw> kind_layout(const std::string& kind) {
  if (kind == "straight-2") return {{Arm::east}, {Arm::north}};
  if (kind == "straight-3") return {{Arm::east}, {Arm::north}, {Arm::west}};
  if (kind == "straight-4")
    return {{Arm::east}, {Arm::north}, {Arm::west}, {Arm::south}};
  if (kind == "merging-3")
    return {{Arm::east, false, 22.0, 30.0},
            {Arm::north, true, 25.0, 35.0},
            {Arm::east, false, 46.0, 54.0}};
  throw InvalidInput("unknown scenario kind: " + kind);
}

VehicleSpec make_vehicle(int id, const VehicleDraw& d, double dist, double speed,
                         const AlgorithmParams& params) {
  VehicleSpec v;
  v.id = id;
  v.params = VehicleParams{};
  v.ellipse = EllipseParams::circumscribe(v.params);
  if (d.merging) {
    // Northbound approach turning right onto the eastbound lane.
    const double turn_y = -kCenter - kMergeRadius;
    const double approach = kArmLength + turn_y; // 60 - 8.75 = 51.25
    v.route = Route::straight(kCenter, -kArmLength, M_PI / 2.0, approach);
    v.route.then_arc(kMergeRadius, M_PI / 2.0, false).then_straight(300.0);
    const double arc_len = kMergeRadius * M_PI / 2.0;
    v.lanes = lane_pair(1, 0, -kLaneWidth, 0.0, -1e18, approach);
    auto after = lane_pair(0, 1, 0.0, -kLaneWidth, approach + arc_len, 1e18);
    v.lanes.insert(v.lanes.end(), after.begin(), after.end());
  } else {
    v.route = through_route(d.arm);
    v.lanes = through_lanes(d.arm);
  }
  v.start_progress = kArmLength - dist;
  v.ref_speed = speed;
  v.start = v.route.state_at(v.start_progress, speed);
  v.goal.progress =
      v.start_progress + kGoalFraction * speed * (params.horizon - 1) * params.ts;
  v.goal.lateral_tol = 1.0;
  return v;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

ScenarioInstance generate_scenario(const std::string& kind, std::uint64_t seed,
                                   const AlgorithmParams& params) {
  const std::vector<VehicleDraw> layout = kind_layout(kind);
  ScenarioInstance sc;
  sc.kind = kind;
  sc.seed = seed;
  sc.params = params;

  std::mt19937_64 rng(derive_seed(seed, 0x5CE42ULL));
  std::uniform_real_distribution<double> speed_dist(5.0, 15.0);

  for (int attempt = 0; attempt < 100; ++attempt) {
    sc.vehicles.clear();
    for (int i = 0; i < static_cast<int>(layout.size()); ++i) {
      std::uniform_real_distribution<double> dist_dist(layout[i].dist_lo,
                                                       layout[i].dist_hi);
      const double dist = dist_dist(rng);
      const double speed = speed_dist(rng);
      sc.vehicles.push_back(make_vehicle(i, layout[i], dist, speed, params));
    }
    bool clear = true;
    for (size_t a = 0; a < sc.vehicles.size() && clear; ++a)
      for (size_t b = a + 1; b < sc.vehicles.size() && clear; ++b) {
        const VehicleState& xa = sc.vehicles[a].start;
        const VehicleState& xb = sc.vehicles[b].start;
        clear = std::hypot(xa.px - xb.px, xa.py - xb.py) >= kMinClearance;
      }
    if (clear) return sc;
  }
  throw InvalidInput("could not sample a clear initial configuration for " + kind);
}

VehicleSpec make_intersection_vehicle(int id, const std::string& route,
                                      double distance, double speed,
                                      const AlgorithmParams& params) {
  VehicleDraw d;
  if (route == "east") d.arm = Arm::east;
  else if (route == "north") d.arm = Arm::north;
  else if (route == "west") d.arm = Arm::west;
  else if (route == "south") d.arm = Arm::south;
  else if (route == "merge-east") { d.arm = Arm::north; d.merging = true; }
  else throw InvalidInput("unknown route: " + route);
  return make_vehicle(id, d, distance, speed, params);
}

PlanOutcome plan_once(const ScenarioInstance& scenario, const std::string& algorithm) {
  PlanOutcome out;
  out.algorithm = algorithm;
  const int n = scenario.size();
  if (algorithm == "coordinated") {
    PlanResult res = plan_game(scenario);
    out.converged = res.report.converged;
    out.executed = res.profile;
    out.predicted.assign(n, res.profile); // everyone shares the same solution
    out.fairness_gap = res.report.fairness_gap;
    out.iterations = res.report.iterations;
    out.vehicle_time = res.report.vehicle_time;
    out.coordinator_time = res.report.coordinator_time;
    out.total_time = res.report.total_time;
    out.violation_history = res.report.violation_history;
    out.failure = res.report.failure;
    out.game = std::move(res);
  } else if (algorithm == "uncoordinated") {
    UncoordinatedOutcome un = uncoordinated_plan(scenario);
    out.converged = un.all_converged;
    out.executed = un.executed;
    for (const LocalGameSolve& s : un.solves) {
      out.predicted.push_back(s.result.profile);
      out.vehicle_time.push_back(s.result.report.total_time);
      out.total_time += s.result.report.total_time;
      out.iterations = std::max(out.iterations, s.result.report.iterations);
      if (!s.result.report.failure.empty() && out.failure.empty())
        out.failure = s.result.report.failure;
    }
    // Each local solve is internally consensused, so the meaningful gap is
    // across owners: i's multiplier for the pair (i, j) vs j's.
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const auto& li = un.solves[i].result.multipliers;
        const auto& lj = un.solves[j].result.multipliers;
        auto it_i = li.lambda.find({i, j});
        auto it_j = lj.lambda.find({i, j});
        if (it_i == li.lambda.end() || it_j == lj.lambda.end()) continue;
        out.fairness_gap = std::max(
            out.fairness_gap,
            (it_i->second - it_j->second).lpNorm<Eigen::Infinity>());
      }
    if (!un.solves.empty())
      out.violation_history = un.solves.front().result.report.violation_history;
    out.locals = std::move(un.solves);
  } else {
    throw InvalidInput("unknown algorithm: " + algorithm);
  }
  out.concordance = equilibrium_concordance(out.predicted, out.executed);
  return out;
}

namespace {

// Shift a plan one period forward from the measured state for the next warm
// start: drop step 1, extend the tail with the last control.
Trajectory shift_plan(const Trajectory& prev, const VehicleState& x1,
                      const VehicleParams& p) {
  const int T = prev.horizon();
  Trajectory next(T, prev.ts(), x1);
  for (int k = 2; k <= T - 1; ++k) next.set_state(k, prev.state(k + 1));
  for (int k = 1; k <= T - 2; ++k) next.set_control(k, prev.control(k + 1));
  ControlInput tail = prev.control(T - 1);
  next.set_control(T - 1, tail);
  next.set_state(T, step_discrete(prev.state(T), tail, prev.ts(), p));
  return next;
}

} // namespace

SimulationLog run_receding_horizon(const ScenarioInstance& scenario, int steps,
                                   const std::string& algorithm) {
  if (steps < 1) throw InvalidInput("steps must be >= 1");
  SimulationLog log;
  log.kind = scenario.kind;
  log.algorithm = algorithm;
  const int n = scenario.size();
  log.states.resize(n);
  log.controls.resize(n);

  ScenarioInstance current = scenario;
  for (int i = 0; i < n; ++i) log.states[i].push_back(current.vehicles[i].start);
  std::vector<Trajectory> warm;

  for (int step = 0; step < steps; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    PlanOutcome out;
    try {
      if (algorithm == "coordinated" && !warm.empty()) {
        PlanResult res = plan_game(current, warm, current.params,
                                   derive_seed(current.seed, 0xD1CEULL));
        out.algorithm = algorithm;
        out.converged = res.report.converged;
        out.executed = res.profile;
        out.failure = res.report.failure;
      } else {
        out = plan_once(current, algorithm);
      }
    } catch (const std::exception& e) {
      log.failed = true;
      log.failure = e.what();
      return log;
    }
    log.plan_time.push_back(seconds_since(t0));
    log.converged.push_back(out.converged);
    if (!out.failure.empty()) {
      log.failed = true;
      log.failure = out.failure;
      return log;
    }

    warm.clear();
    bool all_goals = true;
    for (int i = 0; i < n; ++i) {
      VehicleSpec& v = current.vehicles[i];
      const ControlInput u = out.executed[i].control(1);
      const VehicleState x = step_discrete(v.start, u, current.params.ts, v.params);
      log.controls[i].push_back(u);
      log.states[i].push_back(x);
      v.start = x;
      v.start_progress = v.route.project(x.px, x.py);
      warm.push_back(shift_plan(out.executed[i], x, v.params));
      const bool reached = v.start_progress >= v.goal.progress &&
                           v.route.lateral_offset(x.px, x.py) <= v.goal.lateral_tol;
      all_goals = all_goals && reached;
    }
    log.steps_run = step + 1;
    if (all_goals) {
      log.all_goals_reached = true;
      break;
    }
  }
  return log;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

MonteCarloRecord run_one(const std::string& kind, std::uint64_t seed,
                         const std::string& algorithm, const AlgorithmParams& params) {
  MonteCarloRecord rec;
  rec.seed = seed;
  try {
    ScenarioInstance sc = generate_scenario(kind, seed, params);
    PlanOutcome out = plan_once(sc, algorithm);
    rec.converged = out.converged;
    rec.concordance = out.concordance;
    rec.fairness_gap = out.fairness_gap;
    rec.iterations = out.iterations;
    rec.vehicle_time = out.vehicle_time;
    rec.coordinator_time = out.coordinator_time;
    rec.total_time = out.total_time;
    rec.violation_history = out.violation_history;
    rec.failure = out.failure;
    ValidationResult val = validate_ground_truth(out.executed, sc);
    rec.worst_collision = val.worst_collision;
    rec.success = out.converged && val.success;
    if (!val.success && rec.failure.empty()) rec.failure = val.detail;
  } catch (const std::exception& e) {
    rec.failure = e.what();
  }
  return rec;
}

} // namespace

MonteCarloReport run_monte_carlo(const std::string& kind, int n_runs,
                                 const std::string& algorithm, std::uint64_t seed0,
                                 const AlgorithmParams& params, int workers) {
  if (n_runs < 1) throw InvalidInput("n_runs must be >= 1");
  MonteCarloReport rep;
  rep.kind = kind;
  rep.algorithm = algorithm;
  rep.runs = n_runs;
  rep.records.resize(n_runs);

  workers = std::max(1, workers);
  if (workers == 1) {
    for (int r = 0; r < n_runs; ++r)
      rep.records[r] = run_one(kind, seed0 + r, algorithm, params);
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int r = next.fetch_add(1); r < n_runs; r = next.fetch_add(1))
        rep.records[r] = run_one(kind, seed0 + r, algorithm, params);
    };
    std::vector<std::future<void>> futs;
    for (int w = 0; w < workers; ++w)
      futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
  }

  std::vector<double> all_vehicle_times, coord_times;
  int successes = 0, convergences = 0;
  double conc_sum = 0.0;
  for (const MonteCarloRecord& rec : rep.records) {
    successes += rec.success ? 1 : 0;
    convergences += rec.converged ? 1 : 0;
    conc_sum += rec.concordance;
    rep.concordance_min = std::min(rep.concordance_min, rec.concordance);
    rep.fairness_gap_max = std::max(rep.fairness_gap_max, rec.fairness_gap);
    for (double t : rec.vehicle_time) all_vehicle_times.push_back(t);
    coord_times.push_back(rec.coordinator_time);
    if (rec.total_time > 0.0)
      rep.coordinator_share_max = std::max(rep.coordinator_share_max,
                                           rec.coordinator_time / rec.total_time);
  }
  rep.success_rate = static_cast<double>(successes) / n_runs;
  rep.convergence_rate = static_cast<double>(convergences) / n_runs;
  rep.concordance_mean = conc_sum / n_runs;
  if (!all_vehicle_times.empty()) {
    rep.vehicle_time_mean =
        std::accumulate(all_vehicle_times.begin(), all_vehicle_times.end(), 0.0) /
        all_vehicle_times.size();
    rep.vehicle_time_median = median(all_vehicle_times);
  }
  if (!coord_times.empty()) {
    rep.coordinator_time_mean =
        std::accumulate(coord_times.begin(), coord_times.end(), 0.0) /
        coord_times.size();
    double sq = 0.0;
    for (double t : coord_times) sq += (t - rep.coordinator_time_mean) *
                                       (t - rep.coordinator_time_mean);
    rep.coordinator_time_std = std::sqrt(sq / coord_times.size());
  }
  return rep;
}

} // namespace fairplan
