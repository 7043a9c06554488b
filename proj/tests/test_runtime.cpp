#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cbc/safety_filter.hpp"
#include "test_helpers.hpp"

using namespace cbc;

namespace {

ControlAffineSystem line_system() {
  ControlAffineSystem sys;
  sys.nx = 1;
  sys.nu = 1;
  sys.f = PolyVector{Polynomial(1)};
  sys.g = PolyMatrix(1, 1, 1);
  sys.g(0, 0) = Polynomial::constant(1, 1.0);
  sys.Au = Eigen::MatrixXd(2, 1);
  sys.Au << 1, -1;
  sys.cu = Eigen::VectorXd(2);
  sys.cu << 1, 1;
  return sys;
}

ControlAffineSystem planar_disk_system() {
  ControlAffineSystem sys;
  sys.nx = 2;
  sys.nu = 2;
  sys.f = PolyVector{Polynomial(2), Polynomial(2)};
  sys.g = PolyMatrix(2, 2, 2);
  sys.g(0, 0) = Polynomial::constant(2, 1.0);
  sys.g(1, 1) = Polynomial::constant(2, 1.0);
  sys.Au = Eigen::MatrixXd(4, 2);
  sys.Au << 1, 0, -1, 0, 0, 1, 0, -1;
  sys.cu = Eigen::VectorXd(4);
  sys.cu << 1, 1, 1, 1;
  return sys;
}

}  // namespace

TEST_CASE("interior point with zero gradient passes the nominal through") {
  const Polynomial b =
      Polynomial::from_terms(2, {{1.0, {0, 0}}, {-1.0, {2, 0}}, {-1.0, {0, 2}}});
  SafetyFilter filter(b, planar_disk_system(), 10.0);
  const SafetyFilter::Result r =
      filter.filter(Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero());
  CHECK(!r.qp_infeasible);
  CHECK(r.u.norm() == doctest::Approx(0.0));
  CHECK(!r.constraint_active);
}

TEST_CASE("certificate constraint clips the nominal on the line") {
  // b = 1 - x^2 at x = 1: constraint -2u >= -eta*0 = 0, so u <= 0.
  const Polynomial b = Polynomial::from_terms(1, {{1.0, {0}}, {-1.0, {2}}});
  SafetyFilter filter(b, line_system(), 5.0);
  Eigen::VectorXd x(1), un(1);
  x << 1.0;
  un << 0.5;
  const SafetyFilter::Result r = filter.filter(x, un);
  CHECK(!r.qp_infeasible);
  CHECK(r.u[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.constraint_active);
}

TEST_CASE("inactive certificate leaves only the polytope projection") {
  const Polynomial b = Polynomial::from_terms(1, {{1.0, {0}}, {-1.0, {2}}});
  SafetyFilter filter(b, line_system(), 5.0);
  Eigen::VectorXd x(1), un(1);
  x << 0.0;   // interior, gradient 0, constraint 0 >= -eta
  un << 2.0;  // outside the input box
  const SafetyFilter::Result r = filter.filter(x, un);
  CHECK(!r.qp_infeasible);
  CHECK(r.u[0] == doctest::Approx(1.0).epsilon(1e-9));  // clipped to the box
}

TEST_CASE("infeasible QP falls back to the steepest safe direction") {
  // At x = 2 (outside {b >= 0}), require -4u >= -eta b(2) = 15 (eta=5,
  // b=-3): u <= -3.75 conflicts with u >= -1.
  const Polynomial b = Polynomial::from_terms(1, {{1.0, {0}}, {-1.0, {2}}});
  SafetyFilter filter(b, line_system(), 5.0);
  Eigen::VectorXd x(1), un(1);
  x << 2.0;
  un << 0.0;
  const SafetyFilter::Result r = filter.filter(x, un);
  CHECK(r.qp_infeasible);
  // grad b * g = -4: maximizing the derivative picks u = -1.
  CHECK(r.u[0] == doctest::Approx(-1.0));
}

TEST_CASE("nominal proportional controller") {
  Eigen::MatrixXd K(1, 2);
  K << 1.0, std::sqrt(3.0);
  const Eigen::Vector2d x_eq = Eigen::Vector2d::Zero();
  CHECK(nominal_pd(K, x_eq, x_eq).norm() == doctest::Approx(0.0));
  CHECK(nominal_pd(K, x_eq, Eigen::Vector2d(1, 0))[0] == doctest::Approx(-1.0));

  Eigen::MatrixXd Ks(1, 1);
  Ks << 2.0;
  Eigen::VectorXd xs(1);
  xs << 3.0;
  CHECK(nominal_pd(Ks, Eigen::VectorXd::Zero(1), xs)[0] == doctest::Approx(-6.0));
}

TEST_CASE("constant dynamics give a constant trajectory") {
  ControlAffineSystem sys = line_system();
  const Polynomial b = Polynomial::constant(1, 1.0);
  Eigen::VectorXd x0(1);
  x0 << 0.4;
  const Trajectory traj = simulate(
      sys, [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); }, b, x0, 1.0, 0.01);
  CHECK(traj.steps() == 101);
  CHECK(!traj.blew_up);
  CHECK((traj.states.col(0).array() - 0.4).abs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("RK4 reproduces the exponential decay") {
  // dx/dt = -x via f = -x, u = 0.
  ControlAffineSystem sys = line_system();
  sys.f = PolyVector{-1.0 * Polynomial::variable(1, 0)};
  const Polynomial b = Polynomial::constant(1, 1.0);
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  const Trajectory traj = simulate(
      sys, [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); }, b, x0, 1.0, 0.01);
  const double xT = traj.states(traj.steps() - 1, 0);
  CHECK(std::abs(xT - std::exp(-1.0)) <= 1e-6);
}

TEST_CASE("blow-up aborts with a partial trajectory") {
  // dx/dt = x^2 from x0 = 3 escapes in finite time.
  ControlAffineSystem sys = line_system();
  sys.f = PolyVector{Polynomial::from_terms(1, {{1.0, {2}}})};
  const Polynomial b = Polynomial::constant(1, 1.0);
  Eigen::VectorXd x0(1);
  x0 << 3.0;
  const Trajectory traj = simulate(
      sys, [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); }, b, x0, 2.0, 0.001);
  CHECK(traj.blew_up);
  CHECK(traj.steps() < 2001);
}

TEST_CASE("trajectory CSV has the documented header") {
  ControlAffineSystem sys = planar_disk_system();
  const Polynomial b = Polynomial::constant(2, 1.0);
  const Trajectory traj = simulate(
      sys, [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2); }, b,
      Eigen::Vector2d(0.1, 0.2), 0.05, 0.01);
  const std::string csv = traj.to_csv();
  CHECK(csv.rfind("t,x1,x2,u1,u2,b\n", 0) == 0);
  CHECK(traj.worst_input_margin(sys) == doctest::Approx(1.0));
}
