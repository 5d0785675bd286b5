#pragma once

#include <map>
#include <utility>
#include <vector>

#include "fairplan/qp.hpp"
#include "fairplan/scenario.hpp"

namespace fairplan {

struct InteractionGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;        // i < j
  std::vector<std::vector<int>> neighbors;       // sorted ascending

  bool has_edge(int i, int j) const;
  void validate() const;
};

using StrategyProfile = std::vector<Trajectory>;

/// Per-ordered-pair multipliers lambda_{i,j}(k), k = 2..T, and per-vehicle
/// penalty diagonals (one entry per coupled row, neighbor-major order).
struct MultiplierState {
  std::map<std::pair<int, int>, Eigen::VectorXd> lambda;
  std::vector<Eigen::VectorXd> penalty;
  bool penalty_capped = false;

  Eigen::VectorXd stacked_lambda(int i, const InteractionGraph& g) const;
  Eigen::VectorXd stacked_penalty(int i) const { return penalty[i]; }
  /// max over ordered pairs and steps of |lambda_{i,j}(k) - lambda_{j,i}(k)|.
  double fairness_gap(const InteractionGraph& g) const;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> violation_history;
  bool converged = false;
  std::vector<double> vehicle_time;   // seconds, per vehicle, whole solve
  double coordinator_time = 0.0;      // seconds, multiplier update + consensus
  double total_time = 0.0;
  double fairness_gap = 0.0;
  std::vector<double> kkt_residuals;  // filled by analysis when requested
  std::string failure;                // diagnostic when a subproblem fails
};

/// Snapshot of one vehicle's final subproblem, kept for verification.
struct VehicleSolveDetail {
  QuadraticProgram qp;               // over (s_i, w_i)
  QpSolution solution;
  LinearConstraintBlock equalities;  // private, over s_i
  LinearConstraintBlock private_ineq;
  LinearConstraintBlock coupled;     // h rows over s_i, neighbor terms folded
  Eigen::VectorXd lambda_used;       // lambda_i^k entering the last QP
  Eigen::VectorXd penalty_used;
  Eigen::VectorXd mu_coupled;        // QP duals of the -w + h <= 0 rows
  Eigen::VectorXd h_at_solution;     // coupled rows at own new iterate, neighbors old
  Eigen::VectorXd h_joint;           // coupled rows with every vehicle at its new iterate
  int n_coupled = 0;
};

struct PlanResult {
  StrategyProfile profile;
  InteractionGraph graph;
  MultiplierState multipliers;       // final consensus estimate
  SolveReport report;
  std::vector<VehicleSolveDetail> details;
  std::vector<Trajectory> nominals;  // dynamics linearization points
};

/// Interaction edge (i, j) iff the nominal center distance drops below the
/// radius at some step.
InteractionGraph determine_interaction(const std::vector<Trajectory>& nominals,
                                       double radius);

/// lambda = 0; penalty d_i ~ U[0.5, 1.5] per vehicle (or the configured
/// fixed value), replicated over that vehicle's coupled rows.
MultiplierState initialize_parameters(const InteractionGraph& graph, int T,
                                      const AlgorithmParams& params,
                                      std::uint64_t seed);

/// Optimal eliminated slack gamma = max(-D^{-1} lambda - h, 0).
Eigen::VectorXd slack_optimal(const Eigen::VectorXd& h, const Eigen::VectorXd& lambda,
                              const Eigen::VectorXd& penalty);

/// Elementwise multiplier candidate max(lambda + D h, 0).
Eigen::VectorXd update_multiplier_local(const Eigen::VectorXd& lambda,
                                        const Eigen::VectorXd& penalty,
                                        const Eigen::VectorXd& h);

/// Averages the two directional estimates of every edge; afterwards
/// lambda_{i,j}(k) == lambda_{j,i}(k) exactly.
void consensus(MultiplierState& m, const InteractionGraph& g);

/// Multiplies every penalty entry by rho, capping at `cap`.
void update_penalty(MultiplierState& m, double rho, double cap);

/// || vec over i of max(h_i(new profile), -D^{-1} lambda_i) ||_2 evaluated on
/// the iteration's linearization.
double constraint_violation(const std::vector<Eigen::VectorXd>& h_new,
                            const MultiplierState& m, const InteractionGraph& g);

/// The per-vehicle QP of one iteration: variables (s_i, w_i), tracking cost
/// plus lambda' w + 1/2 w' D w, private rows on s_i, and the two coupled row
/// families -w + h <= 0 and -w <= D^{-1} lambda.
QuadraticProgram build_subproblem(const Eigen::VectorXd& hessian_diag,
                                  const Eigen::VectorXd& gradient_at_zero,
                                  const PrivateSet& private_set,
                                  const LinearConstraintBlock& coupled,
                                  const Eigen::VectorXd& lambda,
                                  const Eigen::VectorXd& penalty);

/// Runs the semi-decentralized augmented-Lagrangian game solve on one
/// scenario: parallel per-vehicle QP solves, a coordinator consensus step on
/// the multipliers, and geometric penalty growth until the constraint
/// violation drops below epsilon.
PlanResult plan_game(const ScenarioInstance& scenario,
                     const std::vector<Trajectory>& initial_nominals,
                     const AlgorithmParams& params, std::uint64_t penalty_seed);

/// Convenience entry: nominals from constant-speed initialization.
PlanResult plan_game(const ScenarioInstance& scenario);

/// Splitmix64 seed derivation for per-vehicle / per-run streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

} // namespace fairplan
