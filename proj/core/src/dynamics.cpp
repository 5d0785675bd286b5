#include "fairplan/dynamics.hpp"

namespace fairplan {

void VehicleParams::validate() const {
  if (!(length > 0.0) || !(width > 0.0)) throw InvalidInput("vehicle size must be positive");
  const double d = std::sqrt(length * length + width * width);
  if (diag != d) throw InvalidInput("diag must equal sqrt(L^2 + W^2)");
  if (!(v_min < v_max) || !(a_min < a_max) || !(delta_min < delta_max))
    throw InvalidInput("bound intervals must be non-empty");
  if (!(std::abs(delta_max) < M_PI / 2.0) || !(std::abs(delta_min) < M_PI / 2.0))
    throw InvalidInput("steering bounds must stay clear of the tan singularity");
}

VehicleParams VehicleParams::with_size(double L, double W) {
  VehicleParams p;
  p.length = L;
  p.width = W;
  p.diag = std::sqrt(L * L + W * W);
  return p;
}

Eigen::Vector4d continuous_derivative(const VehicleState& x, const ControlInput& u,
                                      const VehicleParams& p) {
  if (!x.finite() || !u.finite()) throw InvalidInput("non-finite state or control");
  if (!(std::abs(u.delta) < M_PI / 2.0)) throw InvalidInput("|delta| must be < pi/2");
  return {x.v * std::cos(x.psi), x.v * std::sin(x.psi), u.a,
          x.v * std::tan(u.delta) / p.length};
}

VehicleState step_discrete(const VehicleState& x, const ControlInput& u, double ts,
                           const VehicleParams& p) {
  if (ts <= 0.0) throw InvalidInput("ts must be positive");
  return VehicleState::from_vec(x.vec() + ts * continuous_derivative(x, u, p));
}

void step_jacobians(const VehicleState& x, const ControlInput& u, double ts,
                    const VehicleParams& p, Eigen::Matrix4d& dx,
                    Eigen::Matrix<double, 4, 2>& du) {
  const double c = std::cos(x.psi), s = std::sin(x.psi);
  const double t = std::tan(u.delta);
  const double sec2 = 1.0 + t * t;
  dx.setIdentity();
  dx(0, 2) = ts * c;
  dx(0, 3) = -ts * x.v * s;
  dx(1, 2) = ts * s;
  dx(1, 3) = ts * x.v * c;
  dx(3, 2) = ts * t / p.length;
  du.setZero();
  du(2, 0) = ts;
  du(3, 1) = ts * x.v * sec2 / p.length;
}

Eigen::VectorXd dynamics_residual(const Trajectory& traj, const VehicleParams& p) {
  const int T = traj.horizon();
  Eigen::VectorXd r(kStateDim * (T - 1));
  for (int k = 1; k <= T - 1; ++k) {
    const VehicleState next = step_discrete(traj.state(k), traj.control(k), traj.ts(), p);
    r.segment<kStateDim>(kStateDim * (k - 1)) = traj.state(k + 1).vec() - next.vec();
  }
  return r;
}

AffineMap linearize_dynamics(const Trajectory& nominal, const VehicleParams& p) {
  const int T = nominal.horizon();
  const DecisionLayout& L = nominal.layout();
  AffineMap map;
  map.J = Eigen::MatrixXd::Zero(kStateDim * (T - 1), L.dim());
  Eigen::Matrix4d dx;
  Eigen::Matrix<double, 4, 2> du;
  for (int k = 1; k <= T - 1; ++k) {
    const int row = kStateDim * (k - 1);
    step_jacobians(nominal.state(k), nominal.control(k), nominal.ts(), p, dx, du);
    map.J.block<kStateDim, kStateDim>(row, L.state_offset(k + 1)).setIdentity();
    if (k >= 2)
      map.J.block<kStateDim, kStateDim>(row, L.state_offset(k)) = -dx;
    map.J.block<kStateDim, kControlDim>(row, L.control_offset(k)) = -du;
  }
  map.b = dynamics_residual(nominal, p) - map.J * nominal.decision();
  return map;
}

void rollout(Trajectory& traj, const VehicleParams& p) {
  VehicleState x = traj.initial_state();
  for (int k = 1; k <= traj.horizon() - 1; ++k) {
    x = step_discrete(x, traj.control(k), traj.ts(), p);
    traj.set_state(k + 1, x);
  }
}

} // namespace fairplan
