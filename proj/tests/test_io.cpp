#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fairplan/config.hpp"
#include "fairplan/export.hpp"

using namespace fairplan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fairplan_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

StrategyProfile random_profile(int n, int T, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  StrategyProfile p;
  for (int i = 0; i < n; ++i) {
    Trajectory t(T, 0.1, {u(rng), u(rng), std::abs(u(rng)) / 2, u(rng) / 20});
    for (int c = 0; c < t.decision().size(); ++c) t.decision()(c) = u(rng);
    p.push_back(t);
  }
  return p;
}

} // namespace

TEST_CASE("trajectory table round-trips and has the fixed 9 columns") {
  TempDir dir;
  std::map<int, StrategyProfile> runs;
  runs[0] = random_profile(2, 20, 1);
  runs[3] = random_profile(3, 20, 2);
  const std::string path = dir.file("traj.csv");
  write_trajectories_csv(path, runs);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "run_id,vehicle_id,k,px,py,v,psi,a,delta");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 8);
    ++rows;
  }
  CHECK(rows == (2 + 3) * 20);

  std::map<int, StrategyProfile> back = read_trajectories_csv(path, 0.1);
  REQUIRE(back.size() == 2);
  for (const auto& [run, profile] : runs) {
    REQUIRE(back.count(run) == 1);
    REQUIRE(back[run].size() == profile.size());
    for (size_t i = 0; i < profile.size(); ++i) {
      CHECK((back[run][i].decision() - profile[i].decision())
                .lpNorm<Eigen::Infinity>() <= 1e-12);
      CHECK(back[run][i].initial_state().px ==
            doctest::Approx(profile[i].initial_state().px).epsilon(1e-12));
      CHECK(back[run][i].horizon() == 20);
    }
  }
}

TEST_CASE("arrow series keeps every fourth step") {
  TempDir dir;
  StrategyProfile p = random_profile(2, 20, 3);
  const std::string path = dir.file("arrows.csv");
  write_arrow_series_csv(path, p);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "vehicle_id,k,px,py,psi,v");
  std::string line;
  std::vector<int> ks;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string vid, k;
    std::getline(row, vid, ',');
    std::getline(row, k, ',');
    ks.push_back(std::stoi(k));
  }
  // Steps 1, 5, 9, 13, 17 per vehicle.
  REQUIRE(ks.size() == 10);
  CHECK(ks[0] == 1);
  CHECK(ks[1] == 5);
  CHECK(ks[4] == 17);
}

TEST_CASE("benchmark report JSON round-trips") {
  TempDir dir;
  MonteCarloReport rep;
  rep.kind = "straight-2";
  rep.algorithm = "coordinated";
  rep.runs = 2;
  rep.success_rate = 0.5;
  rep.convergence_rate = 1.0;
  rep.concordance_mean = 0.75;
  rep.concordance_min = 0.5;
  rep.fairness_gap_max = 1.25;
  rep.vehicle_time_mean = 0.01;
  rep.vehicle_time_median = 0.009;
  rep.coordinator_time_mean = 1e-4;
  rep.coordinator_time_std = 2e-5;
  rep.coordinator_share_max = 0.03;
  for (int r = 0; r < 2; ++r) {
    MonteCarloRecord rec;
    rec.seed = 100 + r;
    rec.converged = true;
    rec.success = r == 0;
    rec.concordance = 0.5 + 0.5 * r;
    rec.fairness_gap = 1.25 * r;
    rec.iterations = 7 + r;
    rec.vehicle_time = {0.01, 0.02};
    rec.coordinator_time = 1e-4;
    rec.total_time = 0.05;
    rec.worst_collision = -0.3;
    rec.violation_history = {0.5, 0.01, 1e-4};
    rec.failure = r == 1 ? "did not converge" : "";
    rep.records.push_back(rec);
  }
  const std::string path = dir.file("report.json");
  write_report_json(path, rep);
  MonteCarloReport back = read_report_json(path);
  CHECK(back.kind == rep.kind);
  CHECK(back.algorithm == rep.algorithm);
  CHECK(back.runs == rep.runs);
  CHECK(back.success_rate == rep.success_rate);
  CHECK(back.fairness_gap_max == rep.fairness_gap_max);
  CHECK(back.coordinator_share_max == rep.coordinator_share_max);
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[0].seed == 100);
  CHECK(back.records[1].failure == "did not converge");
  CHECK(back.records[0].vehicle_time == rep.records[0].vehicle_time);
  CHECK(back.records[0].violation_history == rep.records[0].violation_history);
  CHECK(back.records[0].worst_collision == rep.records[0].worst_collision);
}

TEST_CASE("timing table marks the coordinator with vehicle_id -1") {
  TempDir dir;
  MonteCarloReport rep;
  MonteCarloRecord rec;
  rec.seed = 0;
  rec.vehicle_time = {0.01, 0.02};
  rec.coordinator_time = 1e-3;
  rep.records.push_back(rec);
  const std::string path = dir.file("timing.csv");
  write_timing_csv(path, rep);
  std::ifstream in(path);
  std::string header, l1, l2, l3;
  std::getline(in, header);
  CHECK(header == "run_id,vehicle_id,seconds");
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  CHECK(l1.rfind("0,0,", 0) == 0);
  CHECK(l2.rfind("0,1,", 0) == 0);
  CHECK(l3.rfind("0,-1,", 0) == 0);
}

TEST_CASE("writers reject unopenable paths") {
  CHECK_THROWS_AS(write_trajectories_csv("/nonexistent_dir_xyz/a.csv", {}),
                  InvalidInput);
  CHECK_THROWS_AS(read_report_json("/nonexistent_dir_xyz/a.json"), InvalidInput);
}

TEST_CASE("config parsing: nesting, comments, overrides, errors") {
  ConfigMap cfg = parse_config(
      "# benchmark setup\n"
      "kind = merging-3\n"
      "seed = 42\n"
      "params.horizon = 20\n"
      "params.epsilon = 1e-3   # convergence threshold\n"
      "\n"
      "params.rho = 4\n");
  CHECK(cfg.get_string("kind", "") == "merging-3");
  CHECK(cfg.get_u64("seed", 0) == 42);
  CHECK(cfg.get_int("params.horizon", 0) == 20);
  CHECK(cfg.get_double("params.epsilon", 0.0) == 1e-3);
  CHECK(cfg.get_double("missing.key", 7.5) == 7.5);

  cfg.apply_overrides({"params.rho=8", "seed=1"});
  CHECK(cfg.get_double("params.rho", 0.0) == 8.0);
  CHECK(cfg.get_u64("seed", 0) == 1);

  CHECK_THROWS_AS(parse_config("no_equals_sign_here\n"), InvalidInput);
  CHECK_THROWS_AS(cfg.apply_overrides({"missing_equals"}), InvalidInput);
}

TEST_CASE("algorithm params come from the params.* keys with defaults") {
  ConfigMap cfg = parse_config("params.max_iterations = 25\n"
                               "params.fixed_penalty = 1.0\n"
                               "params.threads = 3\n");
  AlgorithmParams p = params_from_config(cfg);
  CHECK(p.max_iterations == 25);
  REQUIRE(p.fixed_penalty.has_value());
  CHECK(*p.fixed_penalty == 1.0);
  CHECK(p.threads == 3);
  CHECK(p.horizon == 20);
  CHECK(p.ts == 0.1);
  CHECK(p.rho == 4.0);

  ConfigMap bad = parse_config("params.horizon = 1\n");
  CHECK_THROWS_AS(params_from_config(bad), InvalidInput);
}

TEST_CASE("custom scenario assembles vehicles from the config") {
  ConfigMap cfg = parse_config(
      "kind = custom\n"
      "seed = 5\n"
      "vehicle.count = 2\n"
      "vehicle.0.route = east\n"
      "vehicle.0.distance = 30\n"
      "vehicle.0.speed = 10\n"
      "vehicle.1.route = merge-east\n"
      "vehicle.1.distance = 28\n"
      "vehicle.1.speed = 8\n");
  ScenarioInstance sc = scenario_from_config(cfg);
  CHECK(sc.kind == "custom");
  CHECK(sc.seed == 5);
  REQUIRE(sc.size() == 2);
  CHECK(sc.vehicles[0].start.v == 10.0);
  CHECK(sc.vehicles[1].start.v == 8.0);
  CHECK(sc.vehicles[0].id == 0);

  ConfigMap named = parse_config("kind = straight-3\nseed = 2\n");
  CHECK(scenario_from_config(named).size() == 3);
}
