#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "fairplan/common.hpp"

namespace fairplan {

inline constexpr int kStateDim = 4;   // px, py, v, psi
inline constexpr int kControlDim = 2; // a, delta

struct VehicleParams {
  double length = 4.0;
  double width = 1.8;
  double diag = std::sqrt(4.0 * 4.0 + 1.8 * 1.8);
  double v_min = 0.0, v_max = 20.0;
  double a_min = -5.0, a_max = 3.0;
  double delta_min = -0.6, delta_max = 0.6;

  void validate() const;
  static VehicleParams with_size(double L, double W);
};

struct VehicleState {
  double px = 0.0, py = 0.0, v = 0.0, psi = 0.0;

  Eigen::Vector4d vec() const { return {px, py, v, psi}; }
  static VehicleState from_vec(const Eigen::Vector4d& x) {
    return {x(0), x(1), x(2), x(3)};
  }
  bool finite() const {
    return std::isfinite(px) && std::isfinite(py) && std::isfinite(v) &&
           std::isfinite(psi);
  }
};

struct ControlInput {
  double a = 0.0, delta = 0.0;

  Eigen::Vector2d vec() const { return {a, delta}; }
  static ControlInput from_vec(const Eigen::Vector2d& u) { return {u(0), u(1)}; }
  bool finite() const { return std::isfinite(a) && std::isfinite(delta); }
};

/// Index arithmetic for the flattened per-vehicle decision vector
/// [u(1), x(2), u(2), ..., x(T-1), u(T-1), x(T)].  x(1) is a fixed
/// parameter and u(T) does not exist, so the length is
/// (kStateDim + kControlDim) * (T - 1).
struct DecisionLayout {
  int horizon; // T

  explicit DecisionLayout(int T) : horizon(T) {
    if (T < 2) throw InvalidInput("horizon must be >= 2");
  }
  int dim() const { return (kStateDim + kControlDim) * (horizon - 1); }
  // k in [2, T]
  int state_offset(int k) const {
    if (k < 2 || k > horizon) throw InvalidInput("state index out of range");
    return kControlDim + (k - 2) * (kStateDim + kControlDim);
  }
  // k in [1, T-1]
  int control_offset(int k) const {
    if (k < 1 || k > horizon - 1) throw InvalidInput("control index out of range");
    return k == 1 ? 0 : state_offset(k) + kStateDim;
  }
};

/// A vehicle trajectory over the planning horizon: the fixed initial state
/// plus the stacked decision vector of states x(2..T) and controls u(1..T-1).
class Trajectory {
 public:
  Trajectory(int T, double ts, const VehicleState& x1)
      : layout_(T), ts_(ts), x1_(x1),
        z_(Eigen::VectorXd::Zero(layout_.dim())) {
    if (ts <= 0.0) throw InvalidInput("ts must be positive");
  }

  int horizon() const { return layout_.horizon; }
  double ts() const { return ts_; }
  const DecisionLayout& layout() const { return layout_; }

  const VehicleState& initial_state() const { return x1_; }
  void set_initial_state(const VehicleState& x1) { x1_ = x1; }

  const Eigen::VectorXd& decision() const { return z_; }
  Eigen::VectorXd& decision() { return z_; }

  // k in [1, T]
  VehicleState state(int k) const {
    if (k == 1) return x1_;
    return VehicleState::from_vec(z_.segment<kStateDim>(layout_.state_offset(k)));
  }
  void set_state(int k, const VehicleState& x) {
    z_.segment<kStateDim>(layout_.state_offset(k)) = x.vec();
  }
  // k in [1, T-1]
  ControlInput control(int k) const {
    return ControlInput::from_vec(z_.segment<kControlDim>(layout_.control_offset(k)));
  }
  void set_control(int k, const ControlInput& u) {
    z_.segment<kControlDim>(layout_.control_offset(k)) = u.vec();
  }

 private:
  DecisionLayout layout_;
  double ts_;
  VehicleState x1_;
  Eigen::VectorXd z_;
};

/// value(z) = J * z + b over a flattened decision vector.
struct AffineMap {
  Eigen::MatrixXd J;
  Eigen::VectorXd b;

  Eigen::VectorXd value(const Eigen::VectorXd& z) const { return J * z + b; }
};

/// Kinematic bicycle model, (dpx, dpy, dv, dpsi).
Eigen::Vector4d continuous_derivative(const VehicleState& x, const ControlInput& u,
                                      const VehicleParams& p);

/// Explicit Euler step x + Ts * f(x, u).
VehicleState step_discrete(const VehicleState& x, const ControlInput& u, double ts,
                           const VehicleParams& p);

/// Jacobians of the Euler step w.r.t. state and control.
void step_jacobians(const VehicleState& x, const ControlInput& u, double ts,
                    const VehicleParams& p, Eigen::Matrix4d& dx,
                    Eigen::Matrix<double, 4, 2>& du);

/// Stacked residuals x(k+1) - step(x(k), u(k)), k = 1..T-1.  Zero iff the
/// trajectory is a feasible rollout of the discrete model.
Eigen::VectorXd dynamics_residual(const Trajectory& traj, const VehicleParams& p);

/// First-order expansion of dynamics_residual around the nominal trajectory,
/// as an affine map over the decision vector.
AffineMap linearize_dynamics(const Trajectory& nominal, const VehicleParams& p);

/// Rolls the controls of `traj` forward from its initial state with the exact
/// discrete model, overwriting the states.
void rollout(Trajectory& traj, const VehicleParams& p);

} // namespace fairplan
