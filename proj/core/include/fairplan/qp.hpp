#pragma once

#include <Eigen/Dense>
#include <optional>

namespace fairplan {

/// min 1/2 z'Hz + g'z  s.t.  A_eq z = b_eq,  C_in z <= d_in.
struct QuadraticProgram {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd C_in;
  Eigen::VectorXd d_in;

  int vars() const { return static_cast<int>(g.size()); }
};

enum class QpStatus { optimal, infeasible, iteration_limit };

struct QpSolution {
  Eigen::VectorXd z;
  Eigen::VectorXd mu_eq;
  Eigen::VectorXd mu_in; // >= 0 when status == optimal
  QpStatus status = QpStatus::iteration_limit;
  double kkt_residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

/// Primal/dual hint.  The solver is deterministic and its result does not
/// depend on the hint beyond tolerance; it is accepted for interface
/// stability and may be ignored.
struct QpWarmStart {
  Eigen::VectorXd z;
  Eigen::VectorXd mu_in;
};

struct QpOptions {
  double eta = 1e-8;       // KKT precision threshold
  double feas_tol = 1e-9;  // violation at which a row is considered active
  double reg = 1e-10;      // Tikhonov term added to H before factorization
  int max_iterations = 0;  // 0 -> automatic from problem size
};

/// Dense dual active-set solve.  Equalities are eliminated through a
/// null-space basis; inequalities are activated most-violated-first (index
/// order on ties).
QpSolution solve_qp(const QuadraticProgram& qp,
                    const std::optional<QpWarmStart>& warm_start = std::nullopt,
                    const QpOptions& options = {});

/// Max of stationarity, primal feasibility, complementary slackness, and
/// dual-nonnegativity violations at (z, mu).
double kkt_residual(const QuadraticProgram& qp, const QpSolution& sol);

} // namespace fairplan
