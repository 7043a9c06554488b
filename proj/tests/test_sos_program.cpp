#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cbc/sos_program.hpp"
#include "test_helpers.hpp"

using namespace cbc;
using cbc::testing::random_polynomial;
using cbc::testing::uniform;

namespace {

Polynomial motzkin() {
  return Polynomial::from_terms(2, {{1.0, {4, 2}}, {1.0, {2, 4}}, {-3.0, {2, 2}}, {1.0, {0, 0}}});
}

}  // namespace

TEST_CASE("decision variable coefficient counts") {
  SosProgram prog(2);
  const PolyVarHandle b = prog.add_poly_var("b", 4);
  CHECK(prog.num_coeff_vars() == 15);
  CHECK(prog.var_degree(b) == 4);

  SosProgram p0(2);
  p0.add_poly_var("c", 0);
  CHECK(p0.num_coeff_vars() == 1);

  SosProgram p3(3);
  p3.add_poly_var("m", 3);
  CHECK(p3.num_coeff_vars() == 20);
}

TEST_CASE("bilinear products are rejected with variable names") {
  SosProgram prog(2);
  const PolyVarHandle b = prog.add_poly_var("b", 2);
  const PolyVarHandle sigma = prog.add_poly_var("sigma", 2);
  const Polynomial s_fixed = Polynomial::from_terms(2, {{1.0, {2, 0}}, {-1.0, {0, 0}}});

  // sigma * fixed is fine; -b + sigma*s - eps is affine in each unknown.
  const PolyExpr ok = -prog.expr(b) + prog.expr(sigma) * PolyExpr(s_fixed) - PolyExpr(2, 1e-3);
  CHECK(ok.has_decision());
  CHECK_NOTHROW(prog.add_sos_constraint(ok));

  try {
    PolyExpr bad = prog.expr(sigma) * prog.expr(b);
    FAIL("expected BilinearError");
  } catch (const BilinearError& e) {
    CHECK(e.lhs == "sigma");
    CHECK(e.rhs == "b");
  }
}

TEST_CASE("compilation matches coefficients against Gram entries") {
  // p(x) = 2x^2 + 2x + 1 over basis {1, x}: Q00 = 1, 2 Q01 = 2, Q11 = 2.
  SosProgram prog(1);
  const Polynomial p = Polynomial::from_terms(1, {{2.0, {2}}, {2.0, {1}}, {1.0, {0}}});
  prog.add_sos_constraint(PolyExpr(p));
  const SdpProblem sdp = prog.compile();
  REQUIRE(sdp.block_sizes == std::vector<int>{2});
  REQUIRE(sdp.num_constraints() == 3);
  CHECK(sdp.constraints[0].rhs == doctest::Approx(1.0));  // monomial 1
  CHECK(sdp.constraints[1].rhs == doctest::Approx(2.0));  // monomial x
  CHECK(sdp.constraints[2].rhs == doctest::Approx(2.0));  // monomial x^2

  const SdpSolution sol = solve(sdp);
  REQUIRE(sol.status == SdpStatus::kOptimal);
  CHECK(sol.blocks[0](0, 0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(sol.blocks[0](0, 1) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(sol.blocks[0](1, 1) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("degree-0 SOS constraint is scalar nonnegativity") {
  SosProgram prog(2);
  const PolyVarHandle gamma = prog.add_scalar_var("gamma");
  prog.add_sos_constraint(prog.expr(gamma));
  const SdpProblem sdp = prog.compile();
  REQUIRE(sdp.block_sizes == std::vector<int>{1});
  CHECK(sdp.num_constraints() == 1);
  CHECK(sdp.num_free == 1);
}

TEST_CASE("empty program compiles to a trivially feasible SDP") {
  SosProgram prog(2);
  const SdpProblem sdp = prog.compile();
  CHECK(sdp.num_blocks() == 0);
  CHECK(sdp.num_constraints() == 0);
  const SdpSolution sol = solve(sdp);
  CHECK(sol.status == SdpStatus::kOptimal);
}

TEST_CASE("rank-one Gram for (x-1)^2") {
  SosProgram prog(1);
  const Polynomial p = Polynomial::from_terms(1, {{1.0, {2}}, {-2.0, {1}}, {1.0, {0}}});
  prog.add_sos_constraint(PolyExpr(p));
  const SosSolution sol = prog.solve();
  REQUIRE(sol.status == SdpStatus::kOptimal);
  REQUIRE(sol.accepted);
  const GramCertificate& cert = sol.certificates.front();
  CHECK(cert.Q(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(cert.Q(0, 1) == doctest::Approx(-1.0).epsilon(1e-5));
  CHECK(cert.Q(1, 1) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(cert.min_eigenvalue >= -1e-7);
  CHECK(cert.min_eigenvalue <= 1e-5);
  CHECK(cert.reconstruction_residual <= 1e-6);
}

TEST_CASE("gamma maximization against an SOS slack bound") {
  // 3 - gamma in Sigma (degree 0) caps gamma at 3.
  SosProgram prog(1);
  const PolyVarHandle gamma = prog.add_scalar_var("gamma");
  prog.add_sos_constraint(PolyExpr(1, 3.0) - prog.expr(gamma), "slack");
  prog.maximize(gamma);
  const SosSolution sol = prog.solve();
  REQUIRE(sol.status == SdpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("perturbed Gram blocks are rejected at extraction") {
  SosProgram prog(1);
  const Polynomial p = Polynomial::from_terms(1, {{1.0, {2}}, {-2.0, {1}}, {1.0, {0}}});
  prog.add_sos_constraint(PolyExpr(p));
  SdpSolution sdp = solve(prog.compile());
  REQUIRE(sdp.status == SdpStatus::kOptimal);
  sdp.blocks[0](0, 0) += 1e-3;
  const SosSolution sol = prog.extract(sdp);
  CHECK(!sol.accepted);
  CHECK(sol.certificates.front().reconstruction_residual > 1e-4);
  CHECK(sol.rejection.find("reconstruction residual") != std::string::npos);
}

TEST_CASE("check_sos on explicit squares and non-SOS polynomials") {
  const Polynomial x1 = Polynomial::variable(2, 0);
  const Polynomial x2 = Polynomial::variable(2, 1);
  const Polynomial sq = (x1 + x2) * (x1 + x2);
  const CheckSosResult yes = check_sos(sq);
  CHECK(yes.feasible);
  REQUIRE(yes.certificate.has_value());
  CHECK(yes.certificate->reconstruction_residual <= 1e-6);

  const CheckSosResult no = check_sos(motzkin());
  CHECK(no.status == SdpStatus::kInfeasible);
  CHECK(!no.feasible);

  const Polynomial neg = Polynomial::from_terms(2, {{1.0, {2, 0}}, {-1.0, {0, 0}}});
  const CheckSosResult no2 = check_sos(neg);
  CHECK(no2.status == SdpStatus::kInfeasible);

  // Odd degree is trivially not SOS.
  CHECK(!check_sos(Polynomial::variable(2, 0)).feasible);
  // Zero polynomial trivially is.
  CHECK(check_sos(Polynomial(2)).feasible);
}

TEST_CASE("check_sos is scale invariant") {
  std::mt19937_64 rng(314);
  std::vector<Polynomial> corpus;
  for (int i = 0; i < 4; ++i) {
    const Polynomial q1 = random_polynomial(rng, 2, 2, 5, 2.0);
    const Polynomial q2 = random_polynomial(rng, 2, 2, 5, 2.0);
    corpus.push_back(q1 * q1 + q2 * q2);                       // SOS
  }
  corpus.push_back(motzkin());                                  // not SOS
  corpus.push_back(Polynomial::from_terms(2, {{1.0, {2, 0}}, {-0.5, {0, 0}}}));  // negative at 0

  for (const Polynomial& p : corpus) {
    const bool base = check_sos(p).feasible;
    for (double c : {1e-2, 1e2}) {
      const CheckSosResult scaled = check_sos(c * p);
      REQUIRE(scaled.status != SdpStatus::kNumericalFailure);
      CHECK(scaled.feasible == base);
    }
  }
}

TEST_CASE("feasible check_sos implies sampled nonnegativity") {
  std::mt19937_64 rng(2718);
  for (int i = 0; i < 5; ++i) {
    const Polynomial q1 = random_polynomial(rng, 2, 3, 6, 2.0);
    const Polynomial q2 = random_polynomial(rng, 2, 3, 6, 2.0);
    const Polynomial p = q1 * q1 + q2 * q2;
    const CheckSosResult res = check_sos(p);
    REQUIRE(res.feasible);
    double min_val = 0.0;
    for (int s = 0; s < 10000; ++s) {
      const Eigen::Vector2d x(uniform(rng, -3, 3), uniform(rng, -3, 3));
      min_val = std::min(min_val, p.evaluate(x));
    }
    CHECK(min_val >= -1e-6 * (1.0 + p.max_abs_coeff()));
  }
}

TEST_CASE("expression differentiation matches polynomial differentiation") {
  SosProgram prog(2);
  const PolyVarHandle b = prog.add_poly_var("b", 3);
  const PolyExpr db = differentiate(prog.expr(b), 0);
  // Substitute a concrete coefficient vector and compare.
  Eigen::VectorXd coeffs = Eigen::VectorXd::LinSpaced(prog.num_coeff_vars(), -1.0, 1.3);
  const Polynomial direct = differentiate(prog.expr(b).at_solution(coeffs), 0);
  const Polynomial viaexpr = db.at_solution(coeffs);
  CHECK((direct - viaexpr).max_abs_coeff() <= 1e-12);
}
