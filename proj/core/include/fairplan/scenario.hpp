#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fairplan/constraints.hpp"
#include "fairplan/objective.hpp"

namespace fairplan {

/// A driving route made of straight and circular-arc segments, parametrized
/// by arc length.  Routes extend indefinitely along the heading of the last
/// segment.
class Route {
 public:
  struct Segment {
    bool is_arc = false;
    // straight: start point + unit heading; arc: center, radius, start
    // angle (from center to start point) and signed sweep direction.
    double x0 = 0, y0 = 0, heading = 0, length = 0;
    double cx = 0, cy = 0, radius = 0, angle0 = 0, sweep_sign = 1;
  };

  static Route straight(double x0, double y0, double heading, double length = 400.0);
  Route& then_arc(double radius, double sweep, bool left);
  Route& then_straight(double length);

  /// Position, heading, and curvature at progress s.
  void sample(double s, double& x, double& y, double& heading) const;
  VehicleState state_at(double s, double speed) const;
  /// Progress of the nearest route point (monotone along the route for
  /// points near it).
  double project(double x, double y) const;
  double lateral_offset(double x, double y) const;
  double total_length() const { return total_length_; }

 private:
  std::vector<Segment> segments_;
  double total_length_ = 0.0;
};

struct GoalSpec {
  double progress = 0.0;     // route progress the vehicle must reach
  double lateral_tol = 1.0;  // max lateral offset from the route when reaching it
};

struct VehicleSpec {
  int id = -1;
  VehicleParams params;
  EllipseParams ellipse;
  CostWeights weights;
  Route route;
  VehicleState start;      // sampled initial state
  double start_progress = 0.0;
  double ref_speed = 10.0; // constant reference speed along the route
  GoalSpec goal;
  std::vector<ScopedLaneLine> lanes;
};

/// Algorithm and model parameters (defaults reproduce the benchmark setup).
struct AlgorithmParams {
  int horizon = 20;               // T
  double ts = 0.1;                // discrete period [s]
  int max_iterations = 40;        // k_max
  double rho = 4.0;               // penalty update factor
  double epsilon = 1e-3;          // constraint-violation threshold
  double eta = 1e-8;              // QP precision threshold
  double interaction_radius = 30.0;
  double lane_active_dist = 10.0;
  double penalty_cap = 1e12;
  std::optional<double> fixed_penalty; // overrides the U[0.5, 1.5] draw
  double baseline_init_jitter = 0.1;   // relative speed jitter of the
                                       // uncoordinated planners' own nominals
  int threads = 1;
};

struct ScenarioInstance {
  std::string kind;
  std::uint64_t seed = 0;
  std::vector<VehicleSpec> vehicles;
  AlgorithmParams params;

  int size() const { return static_cast<int>(vehicles.size()); }
};

/// Constant-speed rollout along the vehicle's route from its start state,
/// used both as reference and as the initialization nominal.
ReferenceTrajectory make_reference(const VehicleSpec& v, const AlgorithmParams& p);
Trajectory make_initial_nominal(const VehicleSpec& v, const AlgorithmParams& p,
                                double speed_scale = 1.0);

} // namespace fairplan
