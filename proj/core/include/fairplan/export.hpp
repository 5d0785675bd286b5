#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "fairplan/harness.hpp"

namespace fairplan {

/// Trajectory table, one row per vehicle per step, fixed 9 columns:
/// run_id, vehicle_id, k, px, py, v, psi, a, delta.  Controls of the final
/// step (which has none) are written as zero.
void write_trajectories_csv(const std::string& path,
                            const std::map<int, StrategyProfile>& runs);
void append_trajectories_csv(std::ostream& os, int run_id,
                             const StrategyProfile& profile);

/// Inverse of write_trajectories_csv; ts and the horizon are recovered from
/// the row structure (ts must be supplied, it is not stored in the table).
std::map<int, StrategyProfile> read_trajectories_csv(const std::string& path,
                                                     double ts);

/// Decimated pose sequence for arrow-style trajectory plots: every
/// `stride`-th step (default 4, i.e. 0.4 s at the 0.1 s period).
/// Columns: vehicle_id, k, px, py, psi, v.
void write_arrow_series_csv(const std::string& path, const StrategyProfile& profile,
                            int stride = 4);

/// Box-plot-ready timing table.  Columns: run_id, vehicle_id, seconds; the
/// coordinator's time is written with vehicle_id = -1.
void write_timing_csv(const std::string& path, const MonteCarloReport& report);

void write_report_json(const std::string& path, const MonteCarloReport& report);
MonteCarloReport read_report_json(const std::string& path);

void write_plan_json(const std::string& path, const PlanOutcome& outcome);
void write_simulation_csv(const std::string& path, const SimulationLog& log);

} // namespace fairplan
