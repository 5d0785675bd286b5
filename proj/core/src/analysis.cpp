#include "fairplan/analysis.hpp"

#include <algorithm>
#include <sstream>

namespace fairplan {

double KktReport::max_residual() const {
  double m = fairness_gap;
  for (const auto* v : {&stationarity, &feasibility, &complementarity, &dual_negativity})
    for (double x : *v) m = std::max(m, x);
  return m;
}

KktReport gne_kkt_residual(const PlanResult& plan, const ScenarioInstance& /*scenario*/,
                           double /*tolerance*/) {
  const int n = static_cast<int>(plan.profile.size());
  if (n == 0) throw InvalidInput("empty plan");

  KktReport rep;
  rep.stationarity.assign(n, 0.0);
  rep.feasibility.assign(n, 0.0);
  rep.complementarity.assign(n, 0.0);
  rep.dual_negativity.assign(n, 0.0);
  rep.fairness_gap = plan.multipliers.fairness_gap(plan.graph);

  // The residuals are evaluated on the constraint model the game actually
  // solved (the final linearization); geometric model error is bounded
  // separately by validate_ground_truth.  The coupled multipliers are each
  // vehicle's best-response duals from the final subproblem — the consensus
  // estimate only enters through the fairness gap.
  for (int i = 0; i < n; ++i) {
    const VehicleSolveDetail& det = plan.details[i];
    if (det.solution.mu_in.size() == 0 && det.qp.vars() == 0)
      throw InvalidInput("plan carries no subproblem duals");
    const Eigen::VectorXd& s = plan.profile[i].decision();
    const int ns = static_cast<int>(s.size());

    Eigen::VectorXd r = det.qp.H.topLeftCorner(ns, ns) * s + det.qp.g.head(ns);
    if (det.equalities.rows() > 0)
      r += det.equalities.map.J.transpose() * det.solution.mu_eq;
    const int n_priv = det.private_ineq.rows();
    Eigen::VectorXd mu_priv = det.solution.mu_in.head(n_priv);
    if (n_priv > 0) r += det.private_ineq.map.J.transpose() * mu_priv;
    if (det.coupled.rows() > 0) r += det.coupled.map.J.transpose() * det.mu_coupled;
    rep.stationarity[i] = r.size() > 0 ? r.lpNorm<Eigen::Infinity>() : 0.0;

    double feas = 0.0, comp = 0.0, dneg = 0.0;
    if (det.equalities.rows() > 0)
      feas = det.equalities.map.value(s).lpNorm<Eigen::Infinity>();
    if (n_priv > 0) {
      Eigen::VectorXd pv = det.private_ineq.map.value(s);
      feas = std::max(feas, pv.maxCoeff());
      comp = (mu_priv.array() * pv.array()).abs().maxCoeff();
      dneg = std::max(0.0, -mu_priv.minCoeff());
    }

    // Joint primal feasibility with every vehicle at its accepted iterate;
    // complementarity pairs each dual with the constraint of the subproblem
    // it certifies (neighbors frozen), as in the per-player KKT systems.
    if (det.h_joint.size() > 0)
      feas = std::max(feas, det.h_joint.maxCoeff());
    if (det.n_coupled > 0) {
      comp = std::max(
          comp,
          (det.mu_coupled.array() * det.h_at_solution.array()).abs().maxCoeff());
      dneg = std::max(dneg, -det.mu_coupled.minCoeff());
    }
    rep.feasibility[i] = std::max(0.0, feas);
    rep.complementarity[i] = comp;
    rep.dual_negativity[i] = std::max(0.0, dneg);
  }
  return rep;
}

KktReport ve_kkt_check(const PlanResult& plan, const ScenarioInstance& scenario,
                       double tolerance) {
  KktReport rep = gne_kkt_residual(plan, scenario, tolerance);
  bool ok = rep.fairness_gap == 0.0;
  const int n = static_cast<int>(rep.stationarity.size());
  for (int i = 0; i < n && ok; ++i)
    ok = rep.stationarity[i] <= tolerance && rep.feasibility[i] <= tolerance &&
         rep.complementarity[i] <= tolerance && rep.dual_negativity[i] <= tolerance;
  rep.ve_certified = ok;
  return rep;
}

namespace {

// Vehicle i's best response with neighbors frozen at the accepted profile and
// the coupled rows taken as hard constraints relaxed by `relax`.
struct BestResponse {
  QuadraticProgram qp;
  int n_priv = 0;
};

BestResponse best_response_qp(const PlanResult& plan, int i,
                              const ScenarioInstance& scenario) {
  const VehicleSolveDetail& det = plan.details[i];
  const int ns = static_cast<int>(plan.profile[i].decision().size());
  const int T = plan.profile[i].horizon();

  // Relinearize the pair constraints at the accepted profile so the frozen
  // neighbor terms are folded at their final iterates.
  std::vector<CollisionPairLin> store;
  store.reserve(plan.graph.neighbors[i].size());
  for (int j : plan.graph.neighbors[i]) {
    int lo = std::min(i, j), hi = std::max(i, j);
    store.push_back(linearize_collision_pair(lo, hi, plan.profile[lo],
                                             plan.profile[hi],
                                             scenario.vehicles[i].params));
  }
  std::vector<const CollisionPairLin*> pairs;
  for (const auto& pl : store) pairs.push_back(&pl);
  LinearConstraintBlock coupled =
      build_coupled_block(i, pairs, plan.profile[i].decision(), T);

  BestResponse br;
  br.n_priv = det.private_ineq.rows();
  br.qp.H = det.qp.H.topLeftCorner(ns, ns);
  br.qp.g = det.qp.g.head(ns);
  br.qp.A_eq = det.equalities.map.J;
  br.qp.b_eq = -det.equalities.map.b;
  const int nc = coupled.rows();
  br.qp.C_in.resize(br.n_priv + nc, ns);
  br.qp.d_in.resize(br.n_priv + nc);
  if (br.n_priv > 0) {
    br.qp.C_in.topRows(br.n_priv) = det.private_ineq.map.J;
    br.qp.d_in.head(br.n_priv) = -det.private_ineq.map.b;
  }
  if (nc > 0) {
    br.qp.C_in.bottomRows(nc) = coupled.map.J;
    br.qp.d_in.tail(nc) = -coupled.map.b;
  }
  return br;
}

double solve_value(const QuadraticProgram& qp, double eta, bool& ok) {
  QpOptions opt;
  opt.eta = eta;
  QpSolution sol = solve_qp(qp, std::nullopt, opt);
  if (sol.status != QpStatus::optimal) {
    ok = false;
    return std::numeric_limits<double>::quiet_NaN();
  }
  return 0.5 * sol.z.dot(qp.H * sol.z) + qp.g.dot(sol.z);
}

} // namespace

SensitivityProbe sensitivity_probe(const PlanResult& plan, int vehicle, int neighbor,
                                   int step, double alpha,
                                   const ScenarioInstance& scenario) {
  const int n = static_cast<int>(plan.profile.size());
  if (vehicle < 0 || vehicle >= n) throw InvalidInput("vehicle out of range");
  const int T = plan.profile[vehicle].horizon();
  if (step < 2 || step > T) throw InvalidInput("step out of range");
  if (alpha <= 0.0) throw InvalidInput("alpha must be positive");
  const auto& nb = plan.graph.neighbors[vehicle];
  auto it = std::find(nb.begin(), nb.end(), neighbor);
  if (it == nb.end()) throw InvalidInput("not an interaction neighbor");
  const int row = static_cast<int>(it - nb.begin()) * (T - 1) + (step - 2);

  SensitivityProbe probe;
  probe.vehicle = vehicle;
  probe.neighbor = neighbor;
  probe.step = step;
  probe.alpha = alpha;
  BestResponse br = best_response_qp(plan, vehicle, scenario);
  const double eta = scenario.params.eta;
  bool ok = true;
  {
    QpOptions opt;
    opt.eta = eta;
    QpSolution base = solve_qp(br.qp, std::nullopt, opt);
    if (base.status != QpStatus::optimal) {
      ok = false;
      probe.p0 = std::numeric_limits<double>::quiet_NaN();
    } else {
      probe.p0 = 0.5 * base.z.dot(br.qp.H * base.z) + br.qp.g.dot(base.z);
      // The slope of the perturbed optimal value measures the dual of the
      // relaxed row in the vehicle's own best-response problem.
      probe.lambda = base.mu_in(br.n_priv + row);
    }
  }
  QuadraticProgram qp_plus = br.qp;
  qp_plus.d_in(br.n_priv + row) += alpha;
  probe.p_plus = solve_value(qp_plus, eta, ok);
  QuadraticProgram qp_minus = br.qp;
  qp_minus.d_in(br.n_priv + row) -= alpha;
  probe.p_minus = solve_value(qp_minus, eta, ok);
  probe.feasible = ok;
  if (!ok) return probe;

  probe.slope = (probe.p_plus - probe.p_minus) / (2.0 * alpha);
  // The proof's bound p(0) <= p(w) + alpha*lambda*, evaluated with the
  // measured multiplier lambda* = -slope for both perturbation signs; the
  // two inequalities combine into midpoint convexity.
  const double eps = 1e-9 * (1.0 + std::abs(probe.p0));
  probe.convexity_bound_ok =
      probe.p0 <= 0.5 * (probe.p_plus + probe.p_minus) + eps;
  return probe;
}

std::vector<std::tuple<int, int, int>> active_coupled_rows(const PlanResult& plan,
                                                           int T) {
  std::vector<std::tuple<int, int, int>> out;
  const int n = static_cast<int>(plan.profile.size());
  for (int i = 0; i < n; ++i) {
    int row = 0;
    for (int j : plan.graph.neighbors[i]) {
      const Eigen::VectorXd& lam = plan.multipliers.lambda.at({i, j});
      for (int k = 2; k <= T; ++k, ++row) {
        double h = plan.details[i].h_at_solution(row);
        if (lam(k - 2) > 1e-4 || std::abs(h) < 1e-4) out.emplace_back(i, j, k);
      }
    }
  }
  return out;
}

double equilibrium_concordance(const std::vector<StrategyProfile>& predicted,
                               const StrategyProfile& actual, double threshold) {
  const int n = static_cast<int>(actual.size());
  if (static_cast<int>(predicted.size()) != n)
    throw InvalidInput("predicted/actual size mismatch");
  int total = 0, hits = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      ++total;
      Eigen::Vector2d diff =
          predicted[i][j].control(1).vec() - actual[j].control(1).vec();
      if (diff.norm() < threshold) ++hits;
    }
  return total == 0 ? 1.0 : static_cast<double>(hits) / total;
}

ValidationResult validate_ground_truth(const StrategyProfile& profile,
                                       const ScenarioInstance& scenario,
                                       const ValidationTolerances& tol) {
  ValidationResult res;
  const int n = static_cast<int>(profile.size());
  if (n == 0 || n != scenario.size()) throw InvalidInput("profile/scenario mismatch");
  const int T = profile[0].horizon();
  std::ostringstream detail;

  // Exact pairwise keep-out values over the planned steps.
  for (int k = 2; k <= T; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double h = collision_pair_value(i, j, profile[i].state(k), profile[j].state(k),
                                        scenario.vehicles[i].params);
        if (h > res.worst_collision) {
          res.worst_collision = h;
          res.offending_i = i;
          res.offending_j = j;
          res.offending_step = k;
        }
      }
  if (res.worst_collision > tol.collision) {
    res.collision_free = false;
    detail << "keep-out value " << res.worst_collision << " between vehicles "
           << res.offending_i << " and " << res.offending_j << " at step "
           << res.offending_step << "; ";
  }

  for (int i = 0; i < n; ++i) {
    const VehicleSpec& v = scenario.vehicles[i];
    bool goal_hit = false;
    for (int k = 1; k <= T; ++k) {
      VehicleState x = profile[i].state(k);
      double prog = v.route.project(x.px, x.py);
      double lat = v.route.lateral_offset(x.px, x.py);
      if (prog >= v.goal.progress && lat <= v.goal.lateral_tol) goal_hit = true;
      if (k >= 2) {
        for (const ScopedLaneLine& sl : v.lanes) {
          if (prog < sl.s_begin || prog > sl.s_end) continue;
          double c = lane_discriminant(x, sl.line, v.ellipse);
          double d = sl.line.side(x.px, x.py);
          if (c > tol.lane || d > tol.lane) {
            if (res.lanes_ok)
              detail << "lane violation for vehicle " << i << " at step " << k
                     << " (disc " << c << ", side " << d << "); ";
            res.lanes_ok = false;
          }
        }
        if (x.v < v.params.v_min - tol.box || x.v > v.params.v_max + tol.box) {
          if (res.box_ok)
            detail << "speed bound violated for vehicle " << i << " at step " << k
                   << " (v " << x.v << "); ";
          res.box_ok = false;
        }
      }
      if (k <= T - 1) {
        ControlInput u = profile[i].control(k);
        if (u.a < v.params.a_min - tol.box || u.a > v.params.a_max + tol.box ||
            u.delta < v.params.delta_min - tol.box ||
            u.delta > v.params.delta_max + tol.box) {
          if (res.box_ok)
            detail << "control bound violated for vehicle " << i << " at step " << k
                   << "; ";
          res.box_ok = false;
        }
      }
    }
    if (!goal_hit) {
      if (res.goals_ok) detail << "vehicle " << i << " did not reach its goal; ";
      res.goals_ok = false;
    }
  }

  res.success = res.collision_free && res.lanes_ok && res.box_ok && res.goals_ok;
  res.detail = detail.str();
  return res;
}

} // namespace fairplan
