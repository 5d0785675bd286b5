#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fairplan/objective.hpp"
#include "oracles.hpp"

using namespace fairplan;

namespace {

ReferenceTrajectory zero_reference(int T) {
  ReferenceTrajectory ref;
  ref.states.assign(T - 1, VehicleState{});
  return ref;
}

} // namespace

TEST_CASE("hand-computed value, T = 3") {
  // Q = I, R = I, Qf = 2I, x(2)-ref(2) = (1,0,0,0), x(3) = ref(3),
  // u(1) = (1,0), u(2) = (0,1)  ->  1/2 + 1/2*(1+1) + 0 = 1.5
  CostWeights w;
  w.Q.setOnes();
  w.R.setOnes();
  w.Qf.setConstant(2.0);
  ReferenceTrajectory ref = zero_reference(3);
  Trajectory tr(3, 0.1, VehicleState{});
  tr.set_state(2, {1, 0, 0, 0});
  tr.set_state(3, {0, 0, 0, 0});
  tr.set_control(1, {1, 0});
  tr.set_control(2, {0, 1});
  CHECK(cost_value(tr, ref, w) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("homogeneity: doubling the weights doubles the value") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CostWeights w;
  ReferenceTrajectory ref = zero_reference(6);
  Trajectory tr(6, 0.1, VehicleState{});
  for (int i = 0; i < tr.decision().size(); ++i) tr.decision()(i) = u(rng);
  CostWeights w2 = w;
  w2.Q *= 2.0;
  w2.R *= 2.0;
  w2.Qf *= 2.0;
  CHECK(cost_value(tr, ref, w2) ==
        doctest::Approx(2.0 * cost_value(tr, ref, w)).epsilon(1e-12));
}

TEST_CASE("gradient matches finite differences and the closed form") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int T = 7;
  CostWeights w;
  ReferenceTrajectory ref;
  for (int k = 2; k <= T; ++k)
    ref.states.push_back({u(rng), u(rng), 8.0 + u(rng), u(rng)});
  Trajectory tr(T, 0.1, VehicleState{});
  for (int i = 0; i < tr.decision().size(); ++i) tr.decision()(i) = u(rng);

  Eigen::VectorXd g = cost_gradient(tr, ref, w);
  auto f = [&](const Eigen::VectorXd& z) {
    Trajectory t = tr;
    t.decision() = z;
    return cost_value(t, ref, w);
  };
  CHECK((g - oracle::finite_difference(f, tr.decision())).lpNorm<Eigen::Infinity>() <
        1e-6);

  // J(z) = 1/2 (z - r)' H (z - r) with the stacked reference.
  Eigen::VectorXd H = cost_hessian_diagonal(w, T);
  Eigen::VectorXd r = reference_vector(ref, T);
  Eigen::VectorXd d = tr.decision() - r;
  CHECK(cost_value(tr, ref, w) ==
        doctest::Approx(0.5 * d.dot(H.asDiagonal() * d)).epsilon(1e-12));
  CHECK((g - H.asDiagonal() * d).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("hessian diagonal lays out the weights in decision order") {
  CostWeights w;
  const int T = 4;
  Eigen::VectorXd H = cost_hessian_diagonal(w, T);
  DecisionLayout L(T);
  CHECK(H.size() == L.dim());
  // u(1)
  CHECK(H(L.control_offset(1)) == w.R(0));
  CHECK(H(L.control_offset(1) + 1) == w.R(1));
  // x(2) gets Q, x(T) gets Qf
  for (int c = 0; c < 4; ++c) {
    CHECK(H(L.state_offset(2) + c) == w.Q(c));
    CHECK(H(L.state_offset(T) + c) == w.Qf(c));
  }
}

TEST_CASE("weights must be positive") {
  CostWeights w;
  w.R(0) = 0.0;
  CHECK_THROWS_AS(w.validate(), InvalidInput);
}
