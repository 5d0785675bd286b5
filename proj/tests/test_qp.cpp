#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fairplan/qp.hpp"
#include "oracles.hpp"

using namespace fairplan;

TEST_CASE("matches the active-set enumeration oracle on 500 random QPs") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nd(2, 6), med(0, 2), mid(1, 8);
  int solved = 0;
  for (int t = 0; t < 500; ++t) {
    const int n = nd(rng);
    const int me = std::min(med(rng), n - 1);
    const int mi = mid(rng);
    QuadraticProgram qp = oracle::random_qp(rng, n, me, mi);

    QpSolution sol = solve_qp(qp);
    oracle::BruteQpResult ref = oracle::brute_force_qp(qp);
    REQUIRE(ref.feasible); // feasible by construction
    REQUIRE(sol.status == QpStatus::optimal);
    const double val = 0.5 * sol.z.dot(qp.H * sol.z) + qp.g.dot(sol.z);
    CHECK(std::abs(val - ref.value) < 1e-6 * (1.0 + std::abs(ref.value)));
    CHECK((sol.z - ref.z).lpNorm<Eigen::Infinity>() < 1e-6);
    ++solved;
  }
  CHECK(solved == 500);
}

TEST_CASE("reports KKT residual below the precision threshold") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    QuadraticProgram qp = oracle::random_qp(rng, 5, 1, 6);
    QpSolution sol = solve_qp(qp);
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK(sol.kkt_residual <= 1e-8);
    CHECK(kkt_residual(qp, sol) == sol.kkt_residual);
  }
}

TEST_CASE("detects infeasibility from contradictory rows") {
  QuadraticProgram qp;
  qp.H = Eigen::Matrix2d::Identity();
  qp.g = Eigen::Vector2d::Zero();
  qp.A_eq.resize(0, 2);
  qp.b_eq.resize(0);
  qp.C_in.resize(2, 2);
  qp.C_in << 1, 0, -1, 0; // x <= -1 and -x <= -1
  qp.d_in.resize(2);
  qp.d_in << -1, -1;
  CHECK(solve_qp(qp).status == QpStatus::infeasible);
}

TEST_CASE("equality-only problems reduce to the projected stationary point") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 50; ++t) {
    QuadraticProgram qp = oracle::random_qp(rng, 5, 2, 0);
    qp.C_in.resize(0, 5);
    qp.d_in.resize(0);
    QpSolution sol = solve_qp(qp);
    REQUIRE(sol.status == QpStatus::optimal);
    // KKT: H z + g + A' mu = 0, A z = b
    CHECK((qp.H * sol.z + qp.g + qp.A_eq.transpose() * sol.mu_eq)
              .lpNorm<Eigen::Infinity>() < 1e-7);
    CHECK((qp.A_eq * sol.z - qp.b_eq).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("deterministic across calls and indifferent to the warm-start hint") {
  std::mt19937_64 rng(33);
  QuadraticProgram qp = oracle::random_qp(rng, 6, 2, 7);
  QpSolution a = solve_qp(qp);
  QpSolution b = solve_qp(qp);
  CHECK(a.z == b.z);

  QpWarmStart ws;
  ws.z = Eigen::VectorXd::Constant(6, 100.0);
  ws.mu_in = Eigen::VectorXd::Ones(7);
  QpSolution c = solve_qp(qp, ws);
  CHECK((a.z - c.z).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("redundant equalities are handled by rank detection") {
  QuadraticProgram qp;
  qp.H = Eigen::Matrix2d::Identity();
  qp.g = Eigen::Vector2d(-1.0, -2.0);
  qp.A_eq.resize(2, 2);
  qp.A_eq << 1, 1, 2, 2; // rank 1
  qp.b_eq.resize(2);
  qp.b_eq << 1, 2;
  qp.C_in.resize(0, 2);
  qp.d_in.resize(0);
  QpSolution sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::optimal);
  CHECK(sol.z.sum() == doctest::Approx(1.0).epsilon(1e-10));
  // minimizes 1/2|z|^2 - z1 - 2 z2 on z1+z2=1 -> z = (0, 1)
  CHECK(sol.z(0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sol.z(1) == doctest::Approx(1.0).epsilon(1e-9));
}
