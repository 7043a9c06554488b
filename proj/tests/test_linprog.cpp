#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cbc/linprog.hpp"

using namespace cbc;

TEST_CASE("bounded box maximization hits the vertex") {
  // max x + 2y s.t. -1 <= x <= 1, -1 <= y <= 1
  Eigen::MatrixXd A(4, 2);
  A << 1, 0, -1, 0, 0, 1, 0, -1;
  Eigen::VectorXd b(4);
  b << 1, 1, 1, 1;
  Eigen::VectorXd c(2);
  c << 1, 2;
  const LpResult r = lp_maximize(c, A, b);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.value == doctest::Approx(3.0));
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(1.0));
}

TEST_CASE("negative right-hand sides go through phase 1") {
  // x >= 2, x <= 5, max -x -> x = 2
  Eigen::MatrixXd A(2, 1);
  A << -1, 1;
  Eigen::VectorXd b(2);
  b << -2, 5;
  Eigen::VectorXd c(1);
  c << -1;
  const LpResult r = lp_maximize(c, A, b);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.x[0] == doctest::Approx(2.0));
  CHECK(r.value == doctest::Approx(-2.0));
}

TEST_CASE("infeasible system detected") {
  // x <= 1 and x >= 3
  Eigen::MatrixXd A(2, 1);
  A << 1, -1;
  Eigen::VectorXd b(2);
  b << 1, -3;
  Eigen::VectorXd c(1);
  c << 1;
  CHECK(lp_maximize(c, A, b).status == LpStatus::kInfeasible);
}

TEST_CASE("unbounded direction detected") {
  // max x s.t. x >= 0 (i.e. -x <= 0)
  Eigen::MatrixXd A(1, 1);
  A << -1;
  Eigen::VectorXd b(1);
  b << 0;
  Eigen::VectorXd c(1);
  c << 1;
  CHECK(lp_maximize(c, A, b).status == LpStatus::kUnbounded);
}

TEST_CASE("degenerate equality-like rows") {
  // x + y <= 1, -(x + y) <= -1 pins x + y = 1; max x - y with |x|,|y| <= 2.
  Eigen::MatrixXd A(6, 2);
  A << 1, 1, -1, -1, 1, 0, -1, 0, 0, 1, 0, -1;
  Eigen::VectorXd b(6);
  b << 1, -1, 2, 2, 2, 2;
  Eigen::VectorXd c(2);
  c << 1, -1;
  const LpResult r = lp_maximize(c, A, b);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.x[0] + r.x[1] == doctest::Approx(1.0));
  CHECK(r.value == doctest::Approx(3.0));  // x = 2, y = -1
}

TEST_CASE("polytope helpers") {
  // |u| <= 1 as Au u + cu >= 0 with Au = [1; -1], cu = (1, 1).
  Eigen::MatrixXd Au(2, 1);
  Au << 1, -1;
  Eigen::VectorXd cu(2);
  cu << 1, 1;
  const PolytopeCheck chk = check_polytope(Au, cu);
  CHECK(chk.nonempty);
  CHECK(chk.bounded);

  Eigen::VectorXd c(1);
  c << -2.0;
  const LpResult r = lp_maximize_over_polytope(c, Au, cu);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.value == doctest::Approx(2.0));
  CHECK(r.x[0] == doctest::Approx(-1.0));

  // Half-line {u >= 0} is unbounded.
  Eigen::MatrixXd Ah(1, 1);
  Ah << 1;
  Eigen::VectorXd ch(1);
  ch << 0;
  const PolytopeCheck half = check_polytope(Ah, ch);
  CHECK(half.nonempty);
  CHECK(!half.bounded);

  // Empty polytope: u >= 1 and u <= -1.
  Eigen::MatrixXd Ae(2, 1);
  Ae << 1, -1;
  Eigen::VectorXd ce(2);
  ce << -1, -1;
  CHECK(!check_polytope(Ae, ce).nonempty);
}
