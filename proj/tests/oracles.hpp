// Shared independent oracles for the unit and acceptance suites: finite
// differences, a brute-force active-set QP solver, and small statistics
// helpers.  Everything here is deliberately written without reusing the
// library's own algorithms.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "fairplan/qp.hpp"

namespace oracle {

inline Eigen::VectorXd finite_difference(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    J.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

struct BruteQpResult {
  bool feasible = false;
  Eigen::VectorXd z;
  double value = 0.0;
};

/// Exhaustive active-set enumeration for small QPs: try every subset of the
/// inequalities as equalities, solve the KKT system, keep the best point that
/// is primal feasible with nonnegative duals.
inline BruteQpResult brute_force_qp(const fairplan::QuadraticProgram& qp,
                                    double tol = 1e-8) {
  const int n = qp.vars();
  const int me = static_cast<int>(qp.A_eq.rows());
  const int mi = static_cast<int>(qp.C_in.rows());
  BruteQpResult best;

  for (unsigned mask = 0; mask < (1u << mi); ++mask) {
    std::vector<int> act;
    for (int r = 0; r < mi; ++r)
      if (mask & (1u << r)) act.push_back(r);
    const int ma = static_cast<int>(act.size());
    // KKT: [H A'] [z; mu] = [-g; b], A = [A_eq; active rows]
    Eigen::MatrixXd K(n + me + ma, n + me + ma);
    K.setZero();
    K.topLeftCorner(n, n) = qp.H;
    Eigen::MatrixXd A(me + ma, n);
    Eigen::VectorXd b(me + ma);
    if (me > 0) {
      A.topRows(me) = qp.A_eq;
      b.head(me) = qp.b_eq;
    }
    for (int r = 0; r < ma; ++r) {
      A.row(me + r) = qp.C_in.row(act[r]);
      b(me + r) = qp.d_in(act[r]);
    }
    K.block(0, n, n, me + ma) = A.transpose();
    K.block(n, 0, me + ma, n) = A;
    Eigen::VectorXd rhs(n + me + ma);
    rhs.head(n) = -qp.g;
    rhs.tail(me + ma) = b;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd z = sol.head(n);
    const Eigen::VectorXd mu_act = sol.tail(ma);

    bool ok = true;
    if (me > 0 && (qp.A_eq * z - qp.b_eq).lpNorm<Eigen::Infinity>() > tol) ok = false;
    for (int r = 0; r < mi && ok; ++r)
      if (qp.C_in.row(r).dot(z) > qp.d_in(r) + tol) ok = false;
    for (int r = 0; r < ma && ok; ++r)
      if (mu_act(r) < -tol) ok = false;
    if (!ok) continue;
    const double val = 0.5 * z.dot(qp.H * z) + qp.g.dot(z);
    if (!best.feasible || val < best.value - 1e-12) {
      best.feasible = true;
      best.z = z;
      best.value = val;
    }
  }
  return best;
}

/// Random strictly convex QP with a guaranteed feasible point.
inline fairplan::QuadraticProgram random_qp(std::mt19937_64& rng, int n, int me,
                                            int mi) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto randn = [&](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = gauss(rng);
    return m;
  };
  fairplan::QuadraticProgram qp;
  Eigen::MatrixXd M = randn(n, n);
  qp.H = M * M.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
  qp.g = randn(n, 1);
  const Eigen::VectorXd z0 = randn(n, 1); // kept feasible by construction
  qp.A_eq = randn(me, n);
  qp.b_eq = qp.A_eq * z0;
  qp.C_in = randn(mi, n);
  std::uniform_real_distribution<double> slack(0.0, 1.0);
  qp.d_in.resize(mi);
  for (int r = 0; r < mi; ++r) qp.d_in(r) = qp.C_in.row(r).dot(z0) + slack(rng);
  return qp;
}

/// One-sample Kolmogorov–Smirnov statistic against U[lo, hi], with the
/// asymptotic p-value approximation.
inline double ks_uniform_pvalue(std::vector<double> xs, double lo, double hi) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double cdf = (xs[i] - lo) / (hi - lo);
    d = std::max(d, std::abs((i + 1) / n - cdf));
    d = std::max(d, std::abs(cdf - i / n));
  }
  const double t = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int j = 1; j <= 100; ++j)
    p += 2.0 * std::pow(-1.0, j - 1) * std::exp(-2.0 * j * j * t * t);
  return std::clamp(p, 0.0, 1.0);
}

} // namespace oracle
