#include "fairplan/config.hpp"

#include <fstream>
#include <sstream>

namespace fairplan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

} // namespace

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  size_t pos = 0;
  double v = std::stod(it->second, &pos);
  if (pos != it->second.size())
    throw InvalidInput("bad numeric value for " + key + ": " + it->second);
  return v;
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  size_t pos = 0;
  int v = std::stoi(it->second, &pos);
  if (pos != it->second.size())
    throw InvalidInput("bad integer value for " + key + ": " + it->second);
  return v;
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  return std::stoull(it->second);
}

void ConfigMap::apply_overrides(const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InvalidInput("override must be key=value: " + o);
    values[trim(o.substr(0, eq))] = trim(o.substr(eq + 1));
  }
}

ConfigMap parse_config(const std::string& text) {
  ConfigMap cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InvalidInput("config line " + std::to_string(lineno) +
                         " is not key = value: " + line);
    cfg.values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

ConfigMap load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open config: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

AlgorithmParams params_from_config(const ConfigMap& cfg) {
  AlgorithmParams p;
  p.horizon = cfg.get_int("params.horizon", p.horizon);
  p.ts = cfg.get_double("params.ts", p.ts);
  p.max_iterations = cfg.get_int("params.max_iterations", p.max_iterations);
  p.rho = cfg.get_double("params.rho", p.rho);
  p.epsilon = cfg.get_double("params.epsilon", p.epsilon);
  p.eta = cfg.get_double("params.eta", p.eta);
  p.interaction_radius =
      cfg.get_double("params.interaction_radius", p.interaction_radius);
  p.lane_active_dist = cfg.get_double("params.lane_active_dist", p.lane_active_dist);
  p.penalty_cap = cfg.get_double("params.penalty_cap", p.penalty_cap);
  if (cfg.has("params.fixed_penalty"))
    p.fixed_penalty = cfg.get_double("params.fixed_penalty", 1.0);
  p.baseline_init_jitter =
      cfg.get_double("params.baseline_init_jitter", p.baseline_init_jitter);
  p.threads = cfg.get_int("params.threads", p.threads);
  if (p.horizon < 2 || p.ts <= 0.0 || p.max_iterations < 1 || p.rho <= 1.0 ||
      p.epsilon <= 0.0 || p.eta <= 0.0 || p.threads < 1)
    throw InvalidInput("invalid algorithm parameters in config");
  return p;
}

ScenarioInstance scenario_from_config(const ConfigMap& cfg) {
  const std::string kind = cfg.get_string("kind", "straight-2");
  const std::uint64_t seed = cfg.get_u64("seed", 0);
  const AlgorithmParams params = params_from_config(cfg);
  if (kind != "custom") return generate_scenario(kind, seed, params);

  ScenarioInstance sc;
  sc.kind = kind;
  sc.seed = seed;
  sc.params = params;
  const int count = cfg.get_int("vehicle.count", 0);
  if (count < 1) throw InvalidInput("custom scenario needs vehicle.count >= 1");
  for (int i = 0; i < count; ++i) {
    const std::string prefix = "vehicle." + std::to_string(i) + ".";
    if (!cfg.has(prefix + "route"))
      throw InvalidInput("missing " + prefix + "route");
    sc.vehicles.push_back(make_intersection_vehicle(
        i, cfg.get_string(prefix + "route", ""),
        cfg.get_double(prefix + "distance", 30.0),
        cfg.get_double(prefix + "speed", 10.0), params));
  }
  return sc;
}

} // namespace fairplan
