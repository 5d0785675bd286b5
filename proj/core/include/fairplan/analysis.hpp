#pragma once

#include "fairplan/planner.hpp"

namespace fairplan {

struct KktReport {
  std::vector<double> stationarity;    // per vehicle, inf-norm
  std::vector<double> feasibility;     // per vehicle, max positive violation
  std::vector<double> complementarity; // per vehicle, max |lambda .* h|
  std::vector<double> dual_negativity; // per vehicle, max(0, -min lambda)
  double fairness_gap = 0.0;
  bool ve_certified = false;

  double max_residual() const;
};

/// KKT residuals of the coupled game at the returned profile, using the final
/// subproblem duals for the private normal-cone term and the consensus
/// multipliers for the coupled rows.
KktReport gne_kkt_residual(const PlanResult& plan, const ScenarioInstance& scenario,
                           double tolerance = 1e-3);

/// gne_kkt_residual plus the fairness gap; certifies a variational
/// equilibrium iff all residuals pass and the gap is exactly zero.
KktReport ve_kkt_check(const PlanResult& plan, const ScenarioInstance& scenario,
                       double tolerance = 1e-3);

struct SensitivityProbe {
  int vehicle = -1, neighbor = -1, step = -1;
  double alpha = 0.0;
  double slope = 0.0;            // (p(+a) - p(-a)) / (2a)
  double lambda = 0.0;           // the probed vehicle's dual of that row
  double p0 = 0.0, p_plus = 0.0, p_minus = 0.0;
  bool feasible = true;          // both perturbed solves succeeded
  bool convexity_bound_ok = false; // p(0) <= p(w) + alpha*lambda, both signs

  bool matches(double rel_tol = 5e-2, double abs_tol = 1e-3) const {
    if (!feasible) return false;
    if (lambda < 1e-3) return std::abs(slope + lambda) <= abs_tol;
    return std::abs(slope + lambda) <= rel_tol * std::max(lambda, 1.0);
  }
};

/// Re-solves vehicle i's best response with neighbors frozen and the probed
/// coupled row relaxed by +/- alpha, measuring the optimal-value slope that
/// the multiplier predicts.
SensitivityProbe sensitivity_probe(const PlanResult& plan, int vehicle, int neighbor,
                                   int step, double alpha,
                                   const ScenarioInstance& scenario);

/// Active coupled rows worth probing: lambda > 1e-4 or |h| < 1e-4.
std::vector<std::tuple<int, int, int>> active_coupled_rows(const PlanResult& plan,
                                                           int T);

/// Fraction of ordered pairs (i, j) whose predicted u_j(1) lies within 1e-1
/// of vehicle j's actual first control.
double equilibrium_concordance(const std::vector<StrategyProfile>& predicted,
                               const StrategyProfile& actual,
                               double threshold = 1e-1);

struct ValidationResult {
  bool success = true;
  bool collision_free = true;
  bool lanes_ok = true;
  bool box_ok = true;
  bool goals_ok = true;
  double worst_collision = -std::numeric_limits<double>::infinity();
  int offending_i = -1, offending_j = -1, offending_step = -1;
  std::string detail;
};

struct ValidationTolerances {
  double collision = 5e-2; // exact superellipse allowance for linearization error
  double lane = 1e-3;
  double box = 1e-6;
};

/// Ground-truth validator on the exact (non-linearized) constraint functions
/// plus the goal criterion.
ValidationResult validate_ground_truth(const StrategyProfile& profile,
                                       const ScenarioInstance& scenario,
                                       const ValidationTolerances& tol = {});

} // namespace fairplan
