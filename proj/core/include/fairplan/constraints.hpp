#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "fairplan/dynamics.hpp"

namespace fairplan {

/// World-frame line a*px + b*py + c = 0 with a^2 + b^2 = 1; the interior
/// (allowed) side is a*px + b*py + c <= 0.
struct LaneLine {
  double a = 0.0, b = 0.0, c = 0.0;

  static LaneLine normalized(double a, double b, double c);
  double side(double px, double py) const { return a * px + b * py + c; }
};

/// Semi-axes of the ellipse circumscribing the vehicle's rectangular plan
/// view, in the vehicle frame.
struct EllipseParams {
  double U = 0.0; // longitudinal semi-axis
  double V = 0.0; // lateral semi-axis

  static EllipseParams circumscribe(const VehicleParams& p) {
    return {p.length / 2.0 * std::sqrt(2.0), p.width / 2.0 * std::sqrt(2.0)};
  }
};

enum class ConstraintFamily {
  dynamics,
  box_velocity,
  box_acceleration,
  box_steering,
  lane_discriminant,
  lane_side,
  lane_heading,
  collision,
};

struct RowLabel {
  ConstraintFamily family;
  int step = 0;      // time index k the row refers to
  int neighbor = -1; // neighbor vehicle id for collision rows
  int line = -1;     // lane line index for lane rows
};

enum class ConstraintKind { equality, inequality };

/// Affine constraint rows over a decision vector: value(z) = J z + b, with
/// J z + b = 0 (equality) or J z + b <= 0 (inequality).
struct LinearConstraintBlock {
  ConstraintKind kind = ConstraintKind::inequality;
  AffineMap map;
  std::vector<RowLabel> labels;

  int rows() const { return static_cast<int>(map.J.rows()); }
  void append(const LinearConstraintBlock& other);
  static LinearConstraintBlock empty(ConstraintKind kind, int cols);
};

/// The same line expressed in the pose's vehicle frame (rotate by -psi,
/// translate by -(px, py)); returns (d, e, f) with d^2 + e^2 = 1.
Eigen::Vector3d line_in_vehicle_frame(const LaneLine& line, const VehicleState& pose);

/// Discriminant-based off-lane indicator: <= 0 iff the circumscribed ellipse
/// does not cross the line.
double lane_discriminant(const VehicleState& pose, const LaneLine& line,
                         const EllipseParams& e);

/// d(lane_discriminant)/d(px, py, psi).
Eigen::Vector3d lane_discriminant_gradient(const VehicleState& pose,
                                           const LaneLine& line,
                                           const EllipseParams& e);

/// Degree-6 keep-out indicator with pose_j's position expressed in pose_i's
/// frame: > 0 inside the keep-out region, 0 on its boundary, < 0 outside.
double superellipse_value(const VehicleState& pose_i, const VehicleState& pose_j,
                          const VehicleParams& p);

/// Symmetrized pair value: the superellipse evaluated in the frame of the
/// lower-id vehicle, so value(i, j) == value(j, i) exactly.
double collision_pair_value(int i, int j, const VehicleState& pose_i,
                            const VehicleState& pose_j, const VehicleParams& p);

/// Gradient of the canonical-frame superellipse w.r.t.
/// (px_lo, py_lo, psi_lo, px_hi, py_hi), where "lo" is the frame vehicle.
Eigen::Matrix<double, 5, 1> superellipse_gradient(const VehicleState& pose_lo,
                                                  const VehicleState& pose_hi,
                                                  const VehicleParams& p);

/// Per-step linearization of the symmetrized collision constraint for one
/// pair, for k = 2..T (row r holds step k = r + 2).  grad_i / grad_j are the
/// rows of the Jacobian w.r.t. vehicle i's / j's full decision vector.
struct CollisionPairLin {
  int i = -1, j = -1;
  Eigen::VectorXd value;  // h at the nominals, per step
  Eigen::MatrixXd grad_i; // (T-1) x dim
  Eigen::MatrixXd grad_j; // (T-1) x dim

  int steps() const { return static_cast<int>(value.size()); }
};

CollisionPairLin linearize_collision_pair(int i, int j, const Trajectory& nominal_i,
                                          const Trajectory& nominal_j,
                                          const VehicleParams& p);

/// Box rows on v(k), k = 2..T and a(k), delta(k), k = 1..T-1.
LinearConstraintBlock box_rows(const VehicleParams& p, int T);

/// A lane line together with an optional route-progress window outside of
/// which it is not applied (used for turning routes through an intersection).
struct ScopedLaneLine {
  LaneLine line;
  double s_begin = -1e18;
  double s_end = 1e18;
};

/// Private constraints of one vehicle: linearized dynamics equalities plus
/// box, lane-discriminant, and lane-side inequality rows.  A lane row is
/// generated only when the nominal position is within `lane_active_dist` of
/// the line and, when the line is scoped, the nominal progress is inside the
/// window.
struct PrivateSet {
  LinearConstraintBlock equalities;
  LinearConstraintBlock inequalities;
};

PrivateSet build_private_set(const Trajectory& nominal,
                             const std::vector<ScopedLaneLine>& lanes,
                             const VehicleParams& p, const EllipseParams& e,
                             double lane_active_dist,
                             const std::vector<double>* nominal_progress = nullptr);

/// Coupled rows for vehicle i over its own decision vector: the pair
/// linearizations restricted to s_i's columns, with the neighbor terms folded
/// into the offset at the neighbors' linearization points.  Pairs must be
/// ordered by neighbor id ascending.
LinearConstraintBlock build_coupled_block(int i,
                                          const std::vector<const CollisionPairLin*>& pairs,
                                          const Eigen::VectorXd& nominal_i, int T);

} // namespace fairplan
