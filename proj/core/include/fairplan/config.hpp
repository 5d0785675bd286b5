#pragma once

#include <map>
#include <string>
#include <vector>

#include "fairplan/harness.hpp"

namespace fairplan {

/// Flat view of the nested key/value scenario config format: one
/// `dotted.key = value` entry per line, `#` comments.
struct ConfigMap {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  /// Applies `key=value` command-line overrides on top of the file content.
  void apply_overrides(const std::vector<std::string>& overrides);
};

ConfigMap load_config(const std::string& path);
ConfigMap parse_config(const std::string& text);

/// Reads the params.* keys (horizon, ts, max_iterations, rho, epsilon, eta,
/// interaction_radius, lane_active_dist, penalty_cap, fixed_penalty,
/// baseline_init_jitter, threads), defaulting to the benchmark values.
AlgorithmParams params_from_config(const ConfigMap& cfg);

/// Builds the scenario named by `kind` (plus `seed`); `custom` assembles
/// vehicles from vehicle.<i>.route / .distance / .speed entries instead.
ScenarioInstance scenario_from_config(const ConfigMap& cfg);

} // namespace fairplan
