#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fairplan/dynamics.hpp"
#include "oracles.hpp"

using namespace fairplan;

namespace {

Trajectory random_trajectory(std::mt19937_64& rng, int T = 8, double ts = 0.1) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VehicleState x1{u(rng) * 10, u(rng) * 10, 8.0 + u(rng) * 4, u(rng)};
  Trajectory tr(T, ts, x1);
  for (int k = 1; k <= T - 1; ++k)
    tr.set_control(k, {u(rng) * 2.0, u(rng) * 0.4});
  rollout(tr, VehicleParams{});
  return tr;
}

} // namespace

TEST_CASE("decision layout arithmetic") {
  DecisionLayout L(20);
  CHECK(L.dim() == 114);
  CHECK(L.control_offset(1) == 0);
  CHECK(L.state_offset(2) == 2);
  CHECK(L.control_offset(2) == 6);
  CHECK(L.state_offset(20) == 110);
  CHECK_THROWS_AS(L.state_offset(1), InvalidInput);
  CHECK_THROWS_AS(L.state_offset(21), InvalidInput);
  CHECK_THROWS_AS(L.control_offset(20), InvalidInput);
  CHECK_THROWS_AS(DecisionLayout(1), InvalidInput);
}

TEST_CASE("Euler step against an independent scalar computation") {
  // x = (5, 3, 8, 0.2), u = (1, 0.05), Ts = 0.1, L = 4.
  VehicleParams p;
  VehicleState x{5.0, 3.0, 8.0, 0.2};
  ControlInput u{1.0, 0.05};
  VehicleState next = step_discrete(x, u, 0.1, p);
  CHECK(next.px == doctest::Approx(5.0 + 0.1 * 8.0 * std::cos(0.2)).epsilon(1e-14));
  CHECK(next.py == doctest::Approx(3.0 + 0.1 * 8.0 * std::sin(0.2)).epsilon(1e-14));
  CHECK(next.v == doctest::Approx(8.1).epsilon(1e-14));
  CHECK(next.psi ==
        doctest::Approx(0.2 + 0.1 * 8.0 * std::tan(0.05) / 4.0).epsilon(1e-14));
}

TEST_CASE("derivative rejects bad input") {
  VehicleParams p;
  CHECK_THROWS_AS(continuous_derivative({0, 0, 1, 0}, {0, 1.6}, p), InvalidInput);
  CHECK_THROWS_AS(
      continuous_derivative({std::nan(""), 0, 1, 0}, {0, 0}, p), InvalidInput);
}

TEST_CASE("step jacobians match finite differences") {
  VehicleParams p;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    VehicleState x{u(rng) * 20, u(rng) * 20, 5.0 + 10.0 * std::abs(u(rng)), u(rng) * 2};
    ControlInput c{u(rng) * 3, u(rng) * 0.5};
    Eigen::Matrix4d dx;
    Eigen::Matrix<double, 4, 2> du;
    step_jacobians(x, c, 0.1, p, dx, du);

    auto fx = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return step_discrete(VehicleState::from_vec(v.head<4>()), c, 0.1, p).vec();
    };
    auto fu = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return step_discrete(x, ControlInput::from_vec(v.head<2>()), 0.1, p).vec();
    };
    CHECK((dx - oracle::finite_difference_jacobian(fx, x.vec())).norm() < 1e-5);
    CHECK((du - oracle::finite_difference_jacobian(fu, c.vec())).norm() < 1e-5);
  }
}

TEST_CASE("residual is zero exactly on rollouts") {
  std::mt19937_64 rng(11);
  VehicleParams p;
  for (int t = 0; t < 20; ++t) {
    Trajectory tr = random_trajectory(rng);
    CHECK(dynamics_residual(tr, p).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("residual flags a perturbed state") {
  std::mt19937_64 rng(12);
  VehicleParams p;
  Trajectory tr = random_trajectory(rng);
  VehicleState x = tr.state(4);
  x.py += 0.5;
  tr.set_state(4, x);
  CHECK(dynamics_residual(tr, p).lpNorm<Eigen::Infinity>() ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("dynamics linearization is exact in the affine sense and matches FD") {
  std::mt19937_64 rng(13);
  VehicleParams p;
  Trajectory nominal = random_trajectory(rng);
  AffineMap lin = linearize_dynamics(nominal, p);

  // Affine identity at the nominal itself.
  Eigen::VectorXd r0 = dynamics_residual(nominal, p);
  CHECK((lin.value(nominal.decision()) - r0).lpNorm<Eigen::Infinity>() < 1e-12);

  // Jacobian against finite differences of the exact residual.
  auto f = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    Trajectory t = nominal;
    t.decision() = z;
    return dynamics_residual(t, p);
  };
  Eigen::MatrixXd J_fd = oracle::finite_difference_jacobian(f, nominal.decision());
  CHECK((lin.J - J_fd).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("vehicle params validate") {
  VehicleParams p;
  CHECK_NOTHROW(p.validate());
  p.v_min = 5.0;
  p.v_max = 1.0;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
}
