#include "fairplan/objective.hpp"

namespace fairplan {

namespace {
void check_horizons(const Trajectory& traj, const ReferenceTrajectory& ref) {
  if (ref.horizon() != traj.horizon())
    throw InvalidInput("reference horizon does not match trajectory horizon");
}
} // namespace

double cost_value(const Trajectory& traj, const ReferenceTrajectory& ref,
                  const CostWeights& w) {
  check_horizons(traj, ref);
  const int T = traj.horizon();
  double c = 0.0;
  for (int k = 2; k <= T; ++k) {
    const Eigen::Vector4d e = traj.state(k).vec() - ref.at(k).vec();
    const Eigen::Vector4d& q = (k == T) ? w.Qf : w.Q;
    c += 0.5 * e.dot(q.asDiagonal() * e);
  }
  for (int k = 1; k <= T - 1; ++k) {
    const Eigen::Vector2d u = traj.control(k).vec();
    c += 0.5 * u.dot(w.R.asDiagonal() * u);
  }
  return c;
}

Eigen::VectorXd cost_gradient(const Trajectory& traj, const ReferenceTrajectory& ref,
                              const CostWeights& w) {
  check_horizons(traj, ref);
  const int T = traj.horizon();
  const Eigen::VectorXd h = cost_hessian_diagonal(w, T);
  const Eigen::VectorXd r = reference_vector(ref, T);
  return h.asDiagonal() * (traj.decision() - r);
}

Eigen::VectorXd cost_hessian_diagonal(const CostWeights& w, int T) {
  const DecisionLayout L(T);
  Eigen::VectorXd h(L.dim());
  for (int k = 2; k <= T; ++k)
    h.segment<kStateDim>(L.state_offset(k)) = (k == T) ? w.Qf : w.Q;
  for (int k = 1; k <= T - 1; ++k)
    h.segment<kControlDim>(L.control_offset(k)) = w.R;
  return h;
}

Eigen::VectorXd reference_vector(const ReferenceTrajectory& ref, int T) {
  const DecisionLayout L(T);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(L.dim());
  for (int k = 2; k <= T; ++k)
    r.segment<kStateDim>(L.state_offset(k)) = ref.at(k).vec();
  return r;
}

} // namespace fairplan
