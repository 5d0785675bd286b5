#include "fairplan/qp.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <vector>

#include "fairplan/common.hpp"

namespace fairplan {

namespace {

double stationarity_residual(const QuadraticProgram& qp, const QpSolution& sol) {
  Eigen::VectorXd r = qp.H * sol.z + qp.g;
  if (qp.A_eq.rows() > 0) r += qp.A_eq.transpose() * sol.mu_eq;
  if (qp.C_in.rows() > 0) r += qp.C_in.transpose() * sol.mu_in;
  return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

} // namespace

double kkt_residual(const QuadraticProgram& qp, const QpSolution& sol) {
  double res = stationarity_residual(qp, sol);
  if (qp.A_eq.rows() > 0) {
    const Eigen::VectorXd e = qp.A_eq * sol.z - qp.b_eq;
    res = std::max(res, e.cwiseAbs().maxCoeff());
  }
  if (qp.C_in.rows() > 0) {
    const Eigen::VectorXd s = qp.C_in * sol.z - qp.d_in;
    res = std::max(res, s.maxCoeff());
    res = std::max(res, (sol.mu_in.array() * s.array()).abs().maxCoeff());
    res = std::max(res, -sol.mu_in.minCoeff());
  }
  return res;
}

QpSolution solve_qp(const QuadraticProgram& qp,
                    const std::optional<QpWarmStart>& /*warm_start*/,
                    const QpOptions& options) {
  const int n = qp.vars();
  const int m_eq = static_cast<int>(qp.A_eq.rows());
  const int m_in = static_cast<int>(qp.C_in.rows());
  if (qp.H.rows() != n || qp.H.cols() != n) throw InvalidInput("H dimension mismatch");
  if (m_eq > 0 && qp.A_eq.cols() != n) throw InvalidInput("A_eq dimension mismatch");
  if (m_in > 0 && qp.C_in.cols() != n) throw InvalidInput("C_in dimension mismatch");

  QpSolution sol;
  sol.mu_eq = Eigen::VectorXd::Zero(m_eq);
  sol.mu_in = Eigen::VectorXd::Zero(m_in);
  sol.z = Eigen::VectorXd::Zero(n);

  const Eigen::MatrixXd Hr =
      qp.H + options.reg * Eigen::MatrixXd::Identity(n, n);

  // Eliminate equalities: z = z0 + Z y with A_eq Z = 0.
  Eigen::MatrixXd Z;
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(n);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod_at;
  int rank = 0;
  if (m_eq > 0) {
    cod_at.compute(qp.A_eq.transpose());
    rank = static_cast<int>(cod_at.rank());
    Eigen::MatrixXd Q = cod_at.householderQ();
    Z = Q.rightCols(n - rank);
    z0 = qp.A_eq.completeOrthogonalDecomposition().solve(qp.b_eq);
    const double eq_err = (qp.A_eq * z0 - qp.b_eq).cwiseAbs().maxCoeff();
    if (eq_err > std::max(options.feas_tol, 1e-8)) {
      sol.status = QpStatus::infeasible;
      sol.z = z0;
      sol.kkt_residual = kkt_residual(qp, sol);
      return sol;
    }
  } else {
    Z = Eigen::MatrixXd::Identity(n, n);
  }
  const int nz = static_cast<int>(Z.cols());

  Eigen::MatrixXd Hy = Z.transpose() * Hr * Z;
  Eigen::LLT<Eigen::MatrixXd> llt(Hy);
  if (llt.info() != Eigen::Success) {
    Hy += 1e-8 * Eigen::MatrixXd::Identity(nz, nz);
    llt.compute(Hy);
    if (llt.info() != Eigen::Success)
      throw InvalidInput("H is not positive semidefinite on the feasible subspace");
  }
  const Eigen::VectorXd gy = Z.transpose() * (Hr * z0 + qp.g);

  Eigen::MatrixXd Cy;
  Eigen::VectorXd dy;
  if (m_in > 0) {
    Cy = qp.C_in * Z;
    dy = qp.d_in - qp.C_in * z0;
  }

  Eigen::VectorXd y = -llt.solve(gy);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m_in);
  std::vector<int> active;

  const int max_iter =
      options.max_iterations > 0 ? options.max_iterations : 100 + 20 * (m_in + nz);
  int iter = 0;
  bool hit_limit = false, infeasible = false;

  while (m_in > 0) {
    // Most violated inactive row; index order breaks ties.
    const Eigen::VectorXd viol = Cy * y - dy;
    int p = -1;
    double vmax = 0.0;
    for (int r = 0; r < m_in; ++r) {
      const double tol = options.feas_tol * (1.0 + std::abs(dy(r)));
      if (viol(r) > tol && viol(r) > vmax) {
        vmax = viol(r);
        p = r;
      }
    }
    if (p < 0) break;

    const Eigen::VectorXd cp = Cy.row(p).transpose();
    const Eigen::VectorXd Hinv_cp = llt.solve(cp);
    double viol_p = viol(p);

    // Drive row p to feasibility, dropping blocking active rows on the way.
    while (true) {
      if (++iter > max_iter) {
        hit_limit = true;
        break;
      }
      Eigen::VectorXd lam_dir;
      Eigen::VectorXd ydir;
      if (active.empty()) {
        ydir = -Hinv_cp;
      } else {
        const int m = static_cast<int>(active.size());
        Eigen::MatrixXd N(nz, m);
        for (int a = 0; a < m; ++a) N.col(a) = Cy.row(active[a]).transpose();
        const Eigen::MatrixXd HinvN = llt.solve(N);
        const Eigen::MatrixXd M = N.transpose() * HinvN;
        lam_dir = M.ldlt().solve(-(N.transpose() * Hinv_cp));
        ydir = -(Hinv_cp + HinvN * lam_dir);
      }
      const double desc = -cp.dot(ydir); // rate of violation decrease, >= 0

      double t1 = std::numeric_limits<double>::infinity();
      int blocker = -1;
      for (int a = 0; a < static_cast<int>(active.size()); ++a) {
        if (lam_dir.size() && lam_dir(a) < -1e-14) {
          const double cand = u(active[a]) / (-lam_dir(a));
          if (cand < t1) {
            t1 = cand;
            blocker = a;
          }
        }
      }

      const double deg_tol = 1e-12 * (1.0 + cp.squaredNorm());
      if (desc <= deg_tol) {
        if (blocker < 0) {
          infeasible = true;
          break;
        }
        // Pure dual step: transfer multiplier mass, primal unchanged.
        const double t = t1;
        for (int a = 0; a < static_cast<int>(active.size()); ++a)
          u(active[a]) += t * lam_dir(a);
        u(p) += t;
        u(active[blocker]) = 0.0;
        active.erase(active.begin() + blocker);
        continue;
      }

      const double t2 = viol_p / desc;
      const double t = std::min(t1, t2);
      y += t * ydir;
      for (int a = 0; a < static_cast<int>(active.size()); ++a)
        u(active[a]) += t * lam_dir(a);
      u(p) += t;
      viol_p -= t * desc;
      if (t2 <= t1) {
        active.push_back(p);
        break;
      }
      u(active[blocker]) = 0.0;
      active.erase(active.begin() + blocker);
    }
    if (hit_limit || infeasible) break;
  }

  sol.z = z0 + Z * y;
  sol.mu_in = u;
  if (m_eq > 0) {
    Eigen::VectorXd rhs = -(Hr * sol.z + qp.g);
    if (m_in > 0) rhs -= qp.C_in.transpose() * u;
    sol.mu_eq = cod_at.solve(rhs);
  }
  sol.iterations = iter;
  sol.kkt_residual = kkt_residual(qp, sol);
  if (infeasible)
    sol.status = QpStatus::infeasible;
  else if (hit_limit || sol.kkt_residual > options.eta)
    sol.status = QpStatus::iteration_limit;
  else
    sol.status = QpStatus::optimal;
  return sol;
}

} // namespace fairplan
