#include "fairplan/export.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace fairplan {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot open for writing: " + path);
  os << std::setprecision(17);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open for reading: " + path);
  return is;
}

} // namespace

void append_trajectories_csv(std::ostream& os, int run_id,
                             const StrategyProfile& profile) {
  for (size_t i = 0; i < profile.size(); ++i) {
    const Trajectory& tr = profile[i];
    const int T = tr.horizon();
    for (int k = 1; k <= T; ++k) {
      const VehicleState x = tr.state(k);
      const ControlInput u = k <= T - 1 ? tr.control(k) : ControlInput{};
      os << run_id << ',' << i << ',' << k << ',' << x.px << ',' << x.py << ','
         << x.v << ',' << x.psi << ',' << u.a << ',' << u.delta << '\n';
    }
  }
}

void write_trajectories_csv(const std::string& path,
                            const std::map<int, StrategyProfile>& runs) {
  std::ofstream os = open_out(path);
  os << "run_id,vehicle_id,k,px,py,v,psi,a,delta\n";
  for (const auto& [run_id, profile] : runs) append_trajectories_csv(os, run_id, profile);
}

std::map<int, StrategyProfile> read_trajectories_csv(const std::string& path,
                                                     double ts) {
  std::ifstream is = open_in(path);
  std::string line;
  std::getline(is, line); // header

  struct Row {
    int k;
    VehicleState x;
    ControlInput u;
  };
  std::map<int, std::map<int, std::vector<Row>>> table; // run -> vehicle -> rows
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    int run, veh;
    Row r;
    char c;
    ss >> run >> c >> veh >> c >> r.k >> c >> r.x.px >> c >> r.x.py >> c >> r.x.v >>
        c >> r.x.psi >> c >> r.u.a >> c >> r.u.delta;
    if (!ss) throw InvalidInput("malformed trajectory row: " + line);
    table[run][veh].push_back(r);
  }

  std::map<int, StrategyProfile> out;
  for (auto& [run, vehicles] : table) {
    StrategyProfile profile;
    for (auto& [veh, rows] : vehicles) {
      std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.k < b.k;
      });
      const int T = rows.back().k;
      Trajectory tr(T, ts, rows.front().x);
      for (const Row& r : rows) {
        if (r.k >= 2) tr.set_state(r.k, r.x);
        if (r.k <= T - 1) tr.set_control(r.k, r.u);
      }
      profile.push_back(std::move(tr));
    }
    out.emplace(run, std::move(profile));
  }
  return out;
}

void write_arrow_series_csv(const std::string& path, const StrategyProfile& profile,
                            int stride) {
  if (stride < 1) throw InvalidInput("stride must be >= 1");
  std::ofstream os = open_out(path);
  os << "vehicle_id,k,px,py,psi,v\n";
  for (size_t i = 0; i < profile.size(); ++i)
    for (int k = 1; k <= profile[i].horizon(); k += stride) {
      const VehicleState x = profile[i].state(k);
      os << i << ',' << k << ',' << x.px << ',' << x.py << ',' << x.psi << ','
         << x.v << '\n';
    }
}

void write_timing_csv(const std::string& path, const MonteCarloReport& report) {
  std::ofstream os = open_out(path);
  os << "run_id,vehicle_id,seconds\n";
  for (size_t r = 0; r < report.records.size(); ++r) {
    const MonteCarloRecord& rec = report.records[r];
    for (size_t i = 0; i < rec.vehicle_time.size(); ++i)
      os << r << ',' << i << ',' << rec.vehicle_time[i] << '\n';
    os << r << ",-1," << rec.coordinator_time << '\n';
  }
}

namespace {

using nlohmann::json;

json record_to_json(const MonteCarloRecord& rec) {
  return json{{"seed", rec.seed},
              {"converged", rec.converged},
              {"success", rec.success},
              {"concordance", rec.concordance},
              {"fairness_gap", rec.fairness_gap},
              {"iterations", rec.iterations},
              {"vehicle_time", rec.vehicle_time},
              {"coordinator_time", rec.coordinator_time},
              {"total_time", rec.total_time},
              {"worst_collision", rec.worst_collision},
              {"violation_history", rec.violation_history},
              {"failure", rec.failure}};
}

MonteCarloRecord record_from_json(const json& j) {
  MonteCarloRecord rec;
  rec.seed = j.at("seed").get<std::uint64_t>();
  rec.converged = j.at("converged").get<bool>();
  rec.success = j.at("success").get<bool>();
  rec.concordance = j.at("concordance").get<double>();
  rec.fairness_gap = j.at("fairness_gap").get<double>();
  rec.iterations = j.at("iterations").get<int>();
  rec.vehicle_time = j.at("vehicle_time").get<std::vector<double>>();
  rec.coordinator_time = j.at("coordinator_time").get<double>();
  rec.total_time = j.at("total_time").get<double>();
  rec.worst_collision = j.at("worst_collision").get<double>();
  rec.violation_history = j.at("violation_history").get<std::vector<double>>();
  rec.failure = j.at("failure").get<std::string>();
  return rec;
}

} // namespace

void write_report_json(const std::string& path, const MonteCarloReport& report) {
  json j{{"kind", report.kind},
         {"algorithm", report.algorithm},
         {"runs", report.runs},
         {"success_rate", report.success_rate},
         {"convergence_rate", report.convergence_rate},
         {"concordance_mean", report.concordance_mean},
         {"concordance_min", report.concordance_min},
         {"fairness_gap_max", report.fairness_gap_max},
         {"vehicle_time_mean", report.vehicle_time_mean},
         {"vehicle_time_median", report.vehicle_time_median},
         {"coordinator_time_mean", report.coordinator_time_mean},
         {"coordinator_time_std", report.coordinator_time_std},
         {"coordinator_share_max", report.coordinator_share_max}};
  json recs = json::array();
  for (const MonteCarloRecord& rec : report.records) recs.push_back(record_to_json(rec));
  j["records"] = std::move(recs);
  std::ofstream os = open_out(path);
  os << j.dump(2) << '\n';
}

MonteCarloReport read_report_json(const std::string& path) {
  std::ifstream is = open_in(path);
  json j = json::parse(is);
  MonteCarloReport rep;
  rep.kind = j.at("kind").get<std::string>();
  rep.algorithm = j.at("algorithm").get<std::string>();
  rep.runs = j.at("runs").get<int>();
  rep.success_rate = j.at("success_rate").get<double>();
  rep.convergence_rate = j.at("convergence_rate").get<double>();
  rep.concordance_mean = j.at("concordance_mean").get<double>();
  rep.concordance_min = j.at("concordance_min").get<double>();
  rep.fairness_gap_max = j.at("fairness_gap_max").get<double>();
  rep.vehicle_time_mean = j.at("vehicle_time_mean").get<double>();
  rep.vehicle_time_median = j.at("vehicle_time_median").get<double>();
  rep.coordinator_time_mean = j.at("coordinator_time_mean").get<double>();
  rep.coordinator_time_std = j.at("coordinator_time_std").get<double>();
  rep.coordinator_share_max = j.at("coordinator_share_max").get<double>();
  for (const json& r : j.at("records")) rep.records.push_back(record_from_json(r));
  return rep;
}

void write_plan_json(const std::string& path, const PlanOutcome& outcome) {
  json j{{"algorithm", outcome.algorithm},
         {"converged", outcome.converged},
         {"concordance", outcome.concordance},
         {"fairness_gap", outcome.fairness_gap},
         {"iterations", outcome.iterations},
         {"vehicle_time", outcome.vehicle_time},
         {"coordinator_time", outcome.coordinator_time},
         {"total_time", outcome.total_time},
         {"violation_history", outcome.violation_history},
         {"failure", outcome.failure}};
  std::ofstream os = open_out(path);
  os << j.dump(2) << '\n';
}

void write_simulation_csv(const std::string& path, const SimulationLog& log) {
  std::ofstream os = open_out(path);
  os << "run_id,vehicle_id,k,px,py,v,psi,a,delta\n";
  for (size_t i = 0; i < log.states.size(); ++i)
    for (size_t t = 0; t < log.states[i].size(); ++t) {
      const VehicleState& x = log.states[i][t];
      const ControlInput u =
          t < log.controls[i].size() ? log.controls[i][t] : ControlInput{};
      os << 0 << ',' << i << ',' << t + 1 << ',' << x.px << ',' << x.py << ','
         << x.v << ',' << x.psi << ',' << u.a << ',' << u.delta << '\n';
    }
}

} // namespace fairplan
