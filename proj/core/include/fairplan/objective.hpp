#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fairplan/dynamics.hpp"

namespace fairplan {

/// Diagonal tracking-cost weights.  Qf applies to the terminal state only.
struct CostWeights {
  Eigen::Vector4d Q{1.0, 1.0, 0.5, 0.5};
  Eigen::Vector2d R{0.1, 1.0};
  Eigen::Vector4d Qf{5.0, 5.0, 2.5, 2.5};

  void validate() const {
    if ((Q.array() <= 0).any() || (R.array() <= 0).any() || (Qf.array() <= 0).any())
      throw InvalidInput("cost weights must be positive");
  }
};

/// Reference states x_ref(k) for k = 2..T (index 0 holds k = 2).
struct ReferenceTrajectory {
  std::vector<VehicleState> states;

  const VehicleState& at(int k) const { return states.at(k - 2); }
  int horizon() const { return static_cast<int>(states.size()) + 1; }
};

double cost_value(const Trajectory& traj, const ReferenceTrajectory& ref,
                  const CostWeights& w);

Eigen::VectorXd cost_gradient(const Trajectory& traj, const ReferenceTrajectory& ref,
                              const CostWeights& w);

/// Constant diagonal Hessian over the decision vector.
Eigen::VectorXd cost_hessian_diagonal(const CostWeights& w, int T);

/// The reference stacked into decision-vector order (controls zero), so that
/// J(z) = 1/2 (z - r)' H (z - r).
Eigen::VectorXd reference_vector(const ReferenceTrajectory& ref, int T);

} // namespace fairplan
