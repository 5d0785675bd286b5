#include "fairplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <random>

namespace fairplan {

namespace {
using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}
} // namespace

bool InteractionGraph::has_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::find(edges.begin(), edges.end(), std::make_pair(i, j)) != edges.end();
}

void InteractionGraph::validate() const {
  for (const auto& [i, j] : edges) {
    if (i == j) throw InvalidInput("interaction graph has a self-loop");
    if (i > j) throw InvalidInput("edges must be stored with i < j");
  }
  for (int i = 0; i < n; ++i)
    for (int j : neighbors[i])
      if (!has_edge(i, j)) throw InvalidInput("neighbor list inconsistent with edges");
}

InteractionGraph determine_interaction(const std::vector<Trajectory>& nominals,
                                       double radius) {
  if (radius <= 0.0) throw InvalidInput("interaction radius must be positive");
  InteractionGraph g;
  g.n = static_cast<int>(nominals.size());
  g.neighbors.assign(g.n, {});
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      double dmin = std::numeric_limits<double>::infinity();
      for (int k = 1; k <= nominals[i].horizon(); ++k) {
        const VehicleState a = nominals[i].state(k), b = nominals[j].state(k);
        dmin = std::min(dmin, std::hypot(a.px - b.px, a.py - b.py));
      }
      if (dmin <= radius) {
        g.edges.emplace_back(i, j);
        g.neighbors[i].push_back(j);
        g.neighbors[j].push_back(i);
      }
    }
  }
  return g;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t x = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

MultiplierState initialize_parameters(const InteractionGraph& graph, int T,
                                      const AlgorithmParams& params,
                                      std::uint64_t seed) {
  MultiplierState m;
  m.penalty.resize(graph.n);
  for (int i = 0; i < graph.n; ++i) {
    double d;
    if (params.fixed_penalty) {
      d = *params.fixed_penalty;
    } else {
      std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      d = std::uniform_real_distribution<double>(0.5, 1.5)(rng);
    }
    const int rows = (T - 1) * static_cast<int>(graph.neighbors[i].size());
    m.penalty[i] = Eigen::VectorXd::Constant(rows, d);
    for (int j : graph.neighbors[i])
      m.lambda[{i, j}] = Eigen::VectorXd::Zero(T - 1);
  }
  return m;
}

Eigen::VectorXd MultiplierState::stacked_lambda(int i, const InteractionGraph& g) const {
  const auto& nbrs = g.neighbors[i];
  if (nbrs.empty()) return Eigen::VectorXd();
  const int per = static_cast<int>(lambda.begin()->second.size());
  Eigen::VectorXd out(per * static_cast<int>(nbrs.size()));
  int r = 0;
  for (int j : nbrs) {
    out.segment(r, per) = lambda.at({i, j});
    r += per;
  }
  return out;
}

double MultiplierState::fairness_gap(const InteractionGraph& g) const {
  double gap = 0.0;
  for (const auto& [i, j] : g.edges) {
    const Eigen::VectorXd d = lambda.at({i, j}) - lambda.at({j, i});
    if (d.size()) gap = std::max(gap, d.cwiseAbs().maxCoeff());
  }
  return gap;
}

Eigen::VectorXd slack_optimal(const Eigen::VectorXd& h, const Eigen::VectorXd& lambda,
                              const Eigen::VectorXd& penalty) {
  if ((penalty.array() <= 0.0).any()) throw InvalidInput("penalty entries must be positive");
  return (-lambda.cwiseQuotient(penalty) - h).cwiseMax(0.0);
}

Eigen::VectorXd update_multiplier_local(const Eigen::VectorXd& lambda,
                                        const Eigen::VectorXd& penalty,
                                        const Eigen::VectorXd& h) {
  return (lambda + penalty.cwiseProduct(h)).cwiseMax(0.0);
}

void consensus(MultiplierState& m, const InteractionGraph& g) {
  for (const auto& [i, j] : g.edges) {
    auto it_ij = m.lambda.find({i, j});
    auto it_ji = m.lambda.find({j, i});
    if (it_ij == m.lambda.end() || it_ji == m.lambda.end())
      throw InternalError("consensus requires both directions of every edge");
    const Eigen::VectorXd avg = 0.5 * (it_ij->second + it_ji->second);
    it_ij->second = avg;
    it_ji->second = avg;
  }
}

void update_penalty(MultiplierState& m, double rho, double cap) {
  if (rho <= 1.0) throw InvalidInput("penalty update factor must exceed 1");
  for (Eigen::VectorXd& d : m.penalty) {
    d *= rho;
    if ((d.array() > cap).any()) {
      d = d.cwiseMin(cap);
      m.penalty_capped = true;
    }
  }
}

double constraint_violation(const std::vector<Eigen::VectorXd>& h_new,
                            const MultiplierState& m, const InteractionGraph& g) {
  double sumsq = 0.0;
  for (int i = 0; i < g.n; ++i) {
    if (h_new[i].size() == 0) continue;
    const Eigen::VectorXd lam = m.stacked_lambda(i, g);
    const Eigen::VectorXd entry =
        h_new[i].cwiseMax(-lam.cwiseQuotient(m.penalty[i]));
    sumsq += entry.squaredNorm();
  }
  return std::sqrt(sumsq);
}

QuadraticProgram build_subproblem(const Eigen::VectorXd& hessian_diag,
                                  const Eigen::VectorXd& gradient_at_zero,
                                  const PrivateSet& private_set,
                                  const LinearConstraintBlock& coupled,
                                  const Eigen::VectorXd& lambda,
                                  const Eigen::VectorXd& penalty) {
  const int ns = static_cast<int>(hessian_diag.size());
  const int nw = static_cast<int>(coupled.rows());
  if (lambda.size() != nw || penalty.size() != nw)
    throw InvalidInput("multiplier blocks inconsistent with coupled rows");
  const int nv = ns + nw;

  QuadraticProgram qp;
  qp.H = Eigen::MatrixXd::Zero(nv, nv);
  qp.H.topLeftCorner(ns, ns) = hessian_diag.asDiagonal();
  qp.H.bottomRightCorner(nw, nw) = penalty.asDiagonal();
  qp.g = Eigen::VectorXd::Zero(nv);
  qp.g.head(ns) = gradient_at_zero;
  qp.g.tail(nw) = lambda;

  const int me = private_set.equalities.rows();
  qp.A_eq = Eigen::MatrixXd::Zero(me, nv);
  qp.A_eq.leftCols(ns) = private_set.equalities.map.J;
  qp.b_eq = -private_set.equalities.map.b;

  const int mp = private_set.inequalities.rows();
  qp.C_in = Eigen::MatrixXd::Zero(mp + 2 * nw, nv);
  qp.d_in = Eigen::VectorXd::Zero(mp + 2 * nw);
  qp.C_in.topLeftCorner(mp, ns) = private_set.inequalities.map.J;
  qp.d_in.head(mp) = -private_set.inequalities.map.b;
  // -w + h(s) <= 0
  qp.C_in.block(mp, 0, nw, ns) = coupled.map.J;
  qp.C_in.block(mp, ns, nw, nw) = -Eigen::MatrixXd::Identity(nw, nw);
  qp.d_in.segment(mp, nw) = -coupled.map.b;
  // -w - D^{-1} lambda <= 0
  qp.C_in.block(mp + nw, ns, nw, nw) = -Eigen::MatrixXd::Identity(nw, nw);
  qp.d_in.tail(nw) = lambda.cwiseQuotient(penalty);
  return qp;
}

namespace {

struct VehicleWorkspace {
  Eigen::VectorXd hessian_diag;
  Eigen::VectorXd grad_at_zero;
  LinearConstraintBlock equalities; // fixed per planning cycle
  std::vector<double> nominal_progress;
};

struct IterationOutput {
  Eigen::VectorXd new_decision;
  VehicleSolveDetail detail;
  double elapsed = 0.0;
  bool optimal = false;
};

IterationOutput solve_vehicle(int i, const ScenarioInstance& scenario,
                              const AlgorithmParams& params,
                              const VehicleWorkspace& ws,
                              const StrategyProfile& profile,
                              const InteractionGraph& graph,
                              const MultiplierState& mult,
                              const std::map<std::pair<int, int>, CollisionPairLin>& pairs) {
  const auto t0 = Clock::now();
  const VehicleSpec& spec = scenario.vehicles[i];
  const int T = params.horizon;

  PrivateSet priv = build_private_set(profile[i], spec.lanes, spec.params,
                                      spec.ellipse, params.lane_active_dist,
                                      &ws.nominal_progress);
  priv.equalities = ws.equalities;

  std::vector<const CollisionPairLin*> own_pairs;
  for (int j : graph.neighbors[i]) {
    const auto key = std::make_pair(std::min(i, j), std::max(i, j));
    own_pairs.push_back(&pairs.at(key));
  }
  LinearConstraintBlock coupled =
      build_coupled_block(i, own_pairs, profile[i].decision(), T);

  const Eigen::VectorXd lambda = mult.stacked_lambda(i, graph);
  const Eigen::VectorXd penalty = mult.stacked_penalty(i);

  IterationOutput out;
  out.detail.qp = build_subproblem(ws.hessian_diag, ws.grad_at_zero, priv,
                                   coupled, lambda, penalty);
  QpOptions qopt;
  qopt.eta = params.eta;
  out.detail.solution = solve_qp(out.detail.qp, std::nullopt, qopt);
  const int ns = static_cast<int>(ws.hessian_diag.size());
  const int nw = coupled.rows();
  out.new_decision = out.detail.solution.z.head(ns);
  out.detail.equalities = std::move(priv.equalities);
  out.detail.private_ineq = std::move(priv.inequalities);
  out.detail.coupled = std::move(coupled);
  out.detail.lambda_used = lambda;
  out.detail.penalty_used = penalty;
  out.detail.n_coupled = nw;
  out.detail.mu_coupled =
      out.detail.solution.mu_in.segment(out.detail.private_ineq.rows(), nw);
  out.detail.h_at_solution =
      out.detail.coupled.map.value(out.new_decision);
  out.optimal = out.detail.solution.status == QpStatus::optimal;
  out.elapsed = seconds_since(t0);
  return out;
}

} // namespace

PlanResult plan_game(const ScenarioInstance& scenario,
                     const std::vector<Trajectory>& initial_nominals,
                     const AlgorithmParams& params, std::uint64_t penalty_seed) {
  const auto t_start = Clock::now();
  const int n = scenario.size();
  const int T = params.horizon;
  if (static_cast<int>(initial_nominals.size()) != n)
    throw InvalidInput("one initial nominal per vehicle required");

  PlanResult res;
  res.nominals = initial_nominals;
  res.profile = initial_nominals;
  res.graph = determine_interaction(initial_nominals, params.interaction_radius);
  res.multipliers = initialize_parameters(res.graph, T, params, penalty_seed);
  res.details.resize(n);
  res.report.vehicle_time.assign(n, 0.0);

  std::vector<VehicleWorkspace> ws(n);
  for (int i = 0; i < n; ++i) {
    const VehicleSpec& spec = scenario.vehicles[i];
    const ReferenceTrajectory ref = make_reference(spec, params);
    ws[i].hessian_diag = cost_hessian_diagonal(spec.weights, T);
    ws[i].grad_at_zero =
        -(ws[i].hessian_diag.asDiagonal() * reference_vector(ref, T));
    ws[i].equalities.kind = ConstraintKind::equality;
    ws[i].equalities.map = linearize_dynamics(initial_nominals[i], spec.params);
    ws[i].nominal_progress.resize(T);
    for (int k = 1; k <= T; ++k) {
      const VehicleState x = initial_nominals[i].state(k);
      ws[i].nominal_progress[k - 1] = spec.route.project(x.px, x.py);
    }
  }

  auto linearize_pairs = [&](const StrategyProfile& profile) {
    std::map<std::pair<int, int>, CollisionPairLin> pairs;
    for (const auto& [i, j] : res.graph.edges)
      pairs.emplace(std::make_pair(i, j),
                    linearize_collision_pair(i, j, profile[i], profile[j],
                                             scenario.vehicles[i].params));
    return pairs;
  };

  bool converged = false;
  for (int k = 0; k <= params.max_iterations && !converged; ++k) {
    const auto pairs = linearize_pairs(res.profile);

    std::vector<IterationOutput> outs(n);
    if (params.threads > 1 && n > 1) {
      std::vector<std::future<IterationOutput>> futs;
      futs.reserve(n);
      for (int i = 0; i < n; ++i)
        futs.push_back(std::async(std::launch::async, solve_vehicle, i,
                                  std::cref(scenario), std::cref(params),
                                  std::cref(ws[i]), std::cref(res.profile),
                                  std::cref(res.graph), std::cref(res.multipliers),
                                  std::cref(pairs)));
      for (int i = 0; i < n; ++i) outs[i] = futs[i].get();
    } else {
      for (int i = 0; i < n; ++i)
        outs[i] = solve_vehicle(i, scenario, params, ws[i], res.profile,
                                res.graph, res.multipliers, pairs);
    }

    bool all_optimal = true;
    bool any_infeasible = false;
    for (int i = 0; i < n; ++i) {
      res.report.vehicle_time[i] += outs[i].elapsed;
      all_optimal = all_optimal && outs[i].optimal;
      any_infeasible = any_infeasible ||
                       outs[i].detail.solution.status == QpStatus::infeasible;
    }
    if (any_infeasible) {
      for (int i = 0; i < n; ++i) res.details[i] = std::move(outs[i].detail);
      res.report.failure = "subproblem infeasible at iteration " + std::to_string(k);
      res.report.iterations = k + 1;
      res.report.converged = false;
      res.report.total_time = seconds_since(t_start);
      return res;
    }

    // Violation uses both ends' new iterates, as the convergence test demands,
    // on this iteration's linearization.
    StrategyProfile new_profile = res.profile;
    for (int i = 0; i < n; ++i) new_profile[i].decision() = outs[i].new_decision;
    std::vector<Eigen::VectorXd> h_new(n);
    for (int i = 0; i < n; ++i) {
      const auto& nbrs = res.graph.neighbors[i];
      h_new[i].resize(static_cast<int>(nbrs.size()) * (T - 1));
      int r = 0;
      for (int j : nbrs) {
        const auto key = std::make_pair(std::min(i, j), std::max(i, j));
        const CollisionPairLin& pl = pairs.at(key);
        const Eigen::VectorXd di = new_profile[i].decision() - res.profile[i].decision();
        const Eigen::VectorXd dj = new_profile[j].decision() - res.profile[j].decision();
        const Eigen::MatrixXd& gi = (pl.i == i) ? pl.grad_i : pl.grad_j;
        const Eigen::MatrixXd& gj = (pl.i == i) ? pl.grad_j : pl.grad_i;
        h_new[i].segment(r, T - 1) = pl.value + gi * di + gj * dj;
        r += T - 1;
      }
      outs[i].detail.h_joint = h_new[i];
    }
    const double v = constraint_violation(h_new, res.multipliers, res.graph);
    res.report.violation_history.push_back(v);
    res.report.iterations = k + 1;

    // The lane rows are linearized, so the iterate must also satisfy the
    // exact discriminant before we stop; otherwise another pass relinearizes
    // them at the drifted iterate.
    double lane_exact = 0.0;
    for (int i = 0; i < n; ++i) {
      const VehicleSpec& spec = scenario.vehicles[i];
      if (spec.lanes.empty()) continue;
      for (int s = 2; s <= T; ++s) {
        const VehicleState x = new_profile[i].state(s);
        const double prog = spec.route.project(x.px, x.py);
        for (const ScopedLaneLine& sl : spec.lanes) {
          if (prog < sl.s_begin || prog > sl.s_end) continue;
          lane_exact = std::max(lane_exact,
                                lane_discriminant(x, sl.line, spec.ellipse));
          lane_exact = std::max(lane_exact, sl.line.side(x.px, x.py));
        }
      }
    }

    // Also require settled multipliers: each dual paired with its own
    // subproblem's constraint value, so the returned certificate holds.
    double comp = 0.0;
    for (int i = 0; i < n; ++i)
      if (outs[i].detail.n_coupled > 0)
        comp = std::max(comp, (outs[i].detail.mu_coupled.array() *
                               outs[i].detail.h_at_solution.array())
                                  .abs()
                                  .maxCoeff());

    converged = all_optimal && v < params.epsilon && lane_exact < 5e-4 &&
                comp < params.epsilon;

    const auto t_coord = Clock::now();
    // Coordinator: directional multiplier candidates from the subproblem
    // linearization (neighbors at their previous iterates), then consensus.
    MultiplierState next = res.multipliers;
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd md = update_multiplier_local(
          outs[i].detail.lambda_used, outs[i].detail.penalty_used,
          outs[i].detail.h_at_solution);
      int r = 0;
      for (int j : res.graph.neighbors[i]) {
        next.lambda[{i, j}] = md.segment(r, T - 1);
        r += T - 1;
      }
    }
    consensus(next, res.graph);
    if (!converged) res.report.coordinator_time += seconds_since(t_coord);

    res.profile = std::move(new_profile);
    for (int i = 0; i < n; ++i) res.details[i] = std::move(outs[i].detail);

    if (converged) {
      // Keep the post-consensus estimate as the reported multipliers; the
      // iteration's own lambda^k remains in details[i].lambda_used.
      res.multipliers = std::move(next);
      break;
    }
    res.multipliers = std::move(next);
    update_penalty(res.multipliers, params.rho, params.penalty_cap);
  }

  res.report.converged = converged;
  res.report.fairness_gap = res.multipliers.fairness_gap(res.graph);
  res.report.total_time = seconds_since(t_start);
  return res;
}

PlanResult plan_game(const ScenarioInstance& scenario) {
  std::vector<Trajectory> nominals;
  nominals.reserve(scenario.size());
  for (const VehicleSpec& v : scenario.vehicles)
    nominals.push_back(make_initial_nominal(v, scenario.params));
  return plan_game(scenario, nominals, scenario.params,
                   derive_seed(scenario.seed, 0xD1CEULL));
}

} // namespace fairplan
