#include <doctest.h>

#include <Eigen/Dense>
#include <limits>

#include "linpm/lp.hpp"
#include "linpm/rng.hpp"

using namespace linpm;

TEST_CASE("standard-form simplex solves a known problem") {
  // min -x1 - 2 x2  s.t.  x1 + x2 + s = 4, x1 + 3 x2 + t = 6, all >= 0.
  Eigen::MatrixXd a(2, 4);
  a << 1, 1, 1, 0,
       1, 3, 0, 1;
  Eigen::VectorXd b(2);
  b << 4, 6;
  Eigen::VectorXd c(4);
  c << -1, -2, 0, 0;
  const LpResult r = solve_lp_standard(a, b, c);
  REQUIRE(r.status == LpStatus::kOptimal);
  // Vertex (3, 1) is optimal with value -5.
  CHECK(r.value == doctest::Approx(-5.0).epsilon(1e-9));
  CHECK(r.x(0) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("infeasible systems are reported infeasible") {
  // Is e_0 in R^3 a convex combination of e_1 and e_2?  (No: coordinate 0.)
  Eigen::MatrixXd a(4, 2);
  a << 0, 0,
       1, 0,
       0, 1,
       1, 1;
  Eigen::VectorXd b(4);
  b << 1, 0, 0, 1;
  const Eigen::VectorXd c = Eigen::VectorXd::Zero(2);
  CHECK(solve_lp_standard(a, b, c).status == LpStatus::kInfeasible);

  // The midpoint of e_1 and e_2 is such a combination.
  Eigen::VectorXd b2(4);
  b2 << 0, 0.5, 0.5, 1;
  const LpResult r = solve_lp_standard(a, b2, c);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.x(0) == doctest::Approx(0.5));
  CHECK(r.x(1) == doctest::Approx(0.5));
}

TEST_CASE("unbounded problems are reported unbounded") {
  // min -x1 s.t. x1 - x2 = 0, x >= 0: push both coordinates to infinity.
  Eigen::MatrixXd a(1, 2);
  a << 1, -1;
  const Eigen::VectorXd b = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd c(2);
  c << -1, 0;
  CHECK(solve_lp_standard(a, b, c).status == LpStatus::kUnbounded);
}

TEST_CASE("redundant rows do not break the solve") {
  // Same constraint twice.
  Eigen::MatrixXd a(2, 2);
  a << 1, 1,
       1, 1;
  Eigen::VectorXd b(2);
  b << 1, 1;
  Eigen::VectorXd c(2);
  c << 1, 2;
  const LpResult r = solve_lp_standard(a, b, c);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(r.x(0) == doctest::Approx(1.0));
}

TEST_CASE("general-form interface handles mixed constraints") {
  // max s  s.t.  s <= x, s <= 1 - x, x tied to 1/3  =>  s = 1/3.
  // Variables (x, s); minimize -s.
  Eigen::VectorXd c(2);
  c << 0, -1;
  Eigen::MatrixXd a_ub(2, 2);
  a_ub << -1, 1,   // s - x <= 0
           1, 1;   // x + s <= 1
  Eigen::VectorXd b_ub(2);
  b_ub << 0, 1;
  Eigen::MatrixXd a_eq(1, 2);
  a_eq << 1, 0;
  Eigen::VectorXd b_eq(1);
  b_eq << 1.0 / 3.0;
  const LpResult r = solve_lp(c, a_ub, b_ub, a_eq, b_eq);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.x(0) == doctest::Approx(1.0 / 3.0));
  CHECK(r.x(1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("general form allows negative solutions") {
  // min x s.t. x >= -2  =>  x = -2 (free variable splitting must work).
  Eigen::VectorXd c(1);
  c << 1;
  Eigen::MatrixXd a_ub(1, 1);
  a_ub << -1;  // -x <= 2
  Eigen::VectorXd b_ub(1);
  b_ub << 2;
  const LpResult r = solve_lp(c, a_ub, b_ub, Eigen::MatrixXd(0, 1), Eigen::VectorXd(0));
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.x(0) == doctest::Approx(-2.0));
}

TEST_CASE("random simplex LPs match the vertex oracle") {
  // min c'x over the probability simplex: the value is min_i c_i.
  const CounterRng rng(99, 0, 7);
  std::uint64_t counter = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform(counter++) * 5);
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c(i) = 2.0 * rng.uniform(counter++) - 1.0;
    Eigen::MatrixXd a(1, n);
    a.setOnes();
    Eigen::VectorXd b(1);
    b << 1;
    const LpResult r = solve_lp_standard(a, b, c);
    REQUIRE(r.status == LpStatus::kOptimal);
    CHECK(r.value == doctest::Approx(c.minCoeff()).epsilon(1e-9));
  }
}
