#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cbc/polynomial.hpp"
#include "test_helpers.hpp"

using namespace cbc;
using cbc::testing::appendix_a_cbc;
using cbc::testing::random_polynomial;
using cbc::testing::vanderpol_f;
using cbc::testing::vanderpol_g;

namespace {
Eigen::Vector2d pt(double a, double b) { return Eigen::Vector2d(a, b); }
}  // namespace

TEST_CASE("addition collects, cancels and prunes") {
  const Polynomial x1 = Polynomial::variable(2, 0);
  const Polynomial a = x1 + 1.0;
  const Polynomial b = -1.0 * x1 + 1.0;
  const Polynomial sum = a + b;
  CHECK(sum.num_terms() == 1);
  CHECK(sum.evaluate(pt(7.0, -3.0)) == doctest::Approx(2.0));

  std::mt19937_64 rng(1);
  const Polynomial p = random_polynomial(rng, 2, 3);
  CHECK((p + Polynomial(2)).terms() == p.terms());

  const Polynomial sq = Polynomial::from_terms(2, {{1.0, {2, 0}}});
  const Polynomial sq2 = Polynomial::from_terms(2, {{2.0, {2, 0}}});
  CHECK((sq + sq2).coefficient(Monomial({2, 0})) == doctest::Approx(3.0));

  CHECK_THROWS_AS(Polynomial::variable(2, 0) + Polynomial::variable(3, 0), std::invalid_argument);
}

TEST_CASE("multiplication distributes and adds exponents") {
  const Polynomial x1 = Polynomial::variable(2, 0);
  const Polynomial x2 = Polynomial::variable(2, 1);
  const Polynomial diff = (x1 + x2) * (x1 - x2);
  CHECK(diff.num_terms() == 2);
  CHECK(diff.coefficient(Monomial({2, 0})) == doctest::Approx(1.0));
  CHECK(diff.coefficient(Monomial({0, 2})) == doctest::Approx(-1.0));

  std::mt19937_64 rng(7);
  const Polynomial p = random_polynomial(rng, 2, 4);
  CHECK((p * Polynomial::constant(2, 1.0)).terms() == p.terms());

  const Polynomial prod = x1 * (x1 * x2);
  CHECK(prod.num_terms() == 1);
  CHECK(prod.coefficient(Monomial({2, 1})) == doctest::Approx(1.0));
}

TEST_CASE("differentiate is the exact partial derivative") {
  const Polynomial p = Polynomial::from_terms(2, {{1.0, {2, 1}}});  // x1^2 x2
  const Polynomial d = differentiate(p, 0);
  CHECK(d.num_terms() == 1);
  CHECK(d.coefficient(Monomial({1, 1})) == doctest::Approx(2.0));

  CHECK(differentiate(Polynomial::from_terms(2, {{1.0, {2, 0}}}), 1).is_zero());

  const Polynomial lin = Polynomial::from_terms(2, {{3.0, {1, 0}}, {5.0, {0, 0}}});
  const Polynomial dl = differentiate(lin, 0);
  CHECK(dl.degree() == 0);
  CHECK(dl.coefficient(Monomial({0, 0})) == doctest::Approx(3.0));

  CHECK_THROWS_AS(differentiate(lin, 2), std::invalid_argument);
}

TEST_CASE("evaluate: published certificate values and basics") {
  const Polynomial b = appendix_a_cbc();
  CHECK(b.evaluate(pt(0, 0)) == doctest::Approx(419.753));
  // Sum of all coefficients, frozen by hand.
  CHECK(b.evaluate(pt(1, 1)) == doctest::Approx(-457.949).epsilon(1e-9));
  CHECK(b.evaluate(pt(1, 1)) < 0.0);

  const Polynomial circle =
      Polynomial::from_terms(2, {{1.0, {2, 0}}, {1.0, {0, 2}}});
  CHECK(circle.evaluate(pt(3, 4)) == doctest::Approx(25.0));

  CHECK_THROWS_AS(circle.evaluate(Eigen::Vector3d::Zero()), std::invalid_argument);
}

TEST_CASE("lie derivative against the Van der Pol flow") {
  const Polynomial b = Polynomial::from_terms(2, {{1.0, {2, 0}}, {1.0, {0, 2}}});
  const PolyVector u{Polynomial(2)};
  const Polynomial lie = lie_derivative(b, vanderpol_f(), vanderpol_g(), u);
  // 2 x2^2 - 2 x1^2 x2^2
  CHECK(lie.num_terms() == 2);
  CHECK(lie.coefficient(Monomial({0, 2})) == doctest::Approx(2.0));
  CHECK(lie.coefficient(Monomial({2, 2})) == doctest::Approx(-2.0));

  CHECK(lie_derivative(Polynomial::constant(2, 3.0), vanderpol_f(), vanderpol_g(), u).is_zero());

  // b = x1, f = (x2, 0), g = 0 -> x2
  const PolyVector f{Polynomial::variable(2, 1), Polynomial(2)};
  const PolyMatrix gz(2, 1, 2);
  const Polynomial chain = lie_derivative(Polynomial::variable(2, 0), f, gz, u);
  CHECK(chain.num_terms() == 1);
  CHECK(chain.coefficient(Monomial({0, 1})) == doctest::Approx(1.0));
}

TEST_CASE("lie derivative matches finite differences at random points") {
  std::mt19937_64 rng(42);
  const PolyVector f = vanderpol_f();
  const PolyMatrix g = vanderpol_g();
  for (int trial = 0; trial < 20; ++trial) {
    const Polynomial b = random_polynomial(rng, 2, 4);
    const PolyVector u{random_polynomial(rng, 2, 2)};
    const Polynomial lie = lie_derivative(b, f, g, u);
    const Eigen::Vector2d x(cbc::testing::uniform(rng, -1.5, 1.5),
                            cbc::testing::uniform(rng, -1.5, 1.5));
    Eigen::Vector2d flow = f.evaluate(x) + g.evaluate(x) * u.evaluate(x);
    const double h = 1e-6;
    const double fd = (b.evaluate(x + h * flow) - b.evaluate(x - h * flow)) / (2 * h);
    const double exact = lie.evaluate(x);
    CHECK(std::abs(fd - exact) <= 1e-5 * (1.0 + std::abs(exact)));
  }
}

TEST_CASE("monomial basis: counts, order, determinism") {
  const auto basis22 = monomial_basis(2, 2);
  REQUIRE(basis22.size() == 6);
  CHECK(basis22[0] == Monomial({0, 0}));
  CHECK(basis22[1] == Monomial({1, 0}));
  CHECK(basis22[2] == Monomial({0, 1}));
  CHECK(basis22[3] == Monomial({2, 0}));
  CHECK(basis22[4] == Monomial({1, 1}));
  CHECK(basis22[5] == Monomial({0, 2}));

  CHECK(monomial_basis(5, 0).size() == 1);
  CHECK(monomial_basis(3, 2).size() == 10);

  // Deterministic and binomially sized.
  for (int nvars = 1; nvars <= 4; ++nvars) {
    for (int deg = 0; deg <= 5; ++deg) {
      const auto a = monomial_basis(nvars, deg);
      const auto b = monomial_basis(nvars, deg);
      CHECK(a == b);
      double expect = 1.0;  // C(nvars + deg, deg)
      for (int i = 1; i <= deg; ++i) expect = expect * (nvars + i) / i;
      CHECK(a.size() == static_cast<std::size_t>(std::llround(expect)));
    }
  }
}

TEST_CASE("jacobian at a point") {
  const Eigen::MatrixXd J = jacobian_at(vanderpol_f(), Eigen::Vector2d::Zero());
  CHECK(J(0, 0) == doctest::Approx(0.0));
  CHECK(J(0, 1) == doctest::Approx(1.0));
  CHECK(J(1, 0) == doctest::Approx(-1.0));
  CHECK(J(1, 1) == doctest::Approx(1.0));

  // Linear field: Jacobian equals the matrix everywhere.
  Eigen::Matrix2d A;
  A << 0.3, -1.2, 2.0, 0.7;
  PolyVector lin{A(0, 0) * Polynomial::variable(2, 0) + A(0, 1) * Polynomial::variable(2, 1),
                 A(1, 0) * Polynomial::variable(2, 0) + A(1, 1) * Polynomial::variable(2, 1)};
  CHECK((jacobian_at(lin, pt(0.4, -2.0)) - A).norm() == doctest::Approx(0.0));

  PolyVector constant{Polynomial::constant(2, 5.0), Polynomial::constant(2, -1.0)};
  CHECK(jacobian_at(constant, pt(1, 2)).norm() == doctest::Approx(0.0));
}

namespace {

// Integer coefficients keep every double operation exact, so the ring axioms
// can be asserted with exact coefficient equality.
Polynomial random_int_polynomial(std::mt19937_64& rng, int nvars, int max_degree) {
  Polynomial p(nvars);
  const auto basis = monomial_basis(nvars, max_degree);
  const int nterms = 1 + static_cast<int>(rng() % 6);
  for (int t = 0; t < nterms; ++t) {
    const auto& mono = basis[rng() % basis.size()];
    const double coeff = static_cast<double>(static_cast<int>(rng() % 9)) - 4.0;
    p.add_term(mono, coeff);
  }
  return p;
}

}  // namespace

TEST_CASE("ring axioms hold exactly on random polynomials") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 12; ++trial) {
    const int nvars = 2 + static_cast<int>(rng() % 3);
    const Polynomial p = random_int_polynomial(rng, nvars, 3);
    const Polynomial q = random_int_polynomial(rng, nvars, 3);
    const Polynomial r = random_int_polynomial(rng, nvars, 2);
    CHECK((p + q).terms() == (q + p).terms());
    CHECK((p * q).terms() == (q * p).terms());
    CHECK(((p + q) + r).terms() == (p + (q + r)).terms());
    CHECK(((p * q) * r).terms() == (p * (q * r)).terms());
    CHECK((p * (q + r)).terms() == (p * q + p * r).terms());
  }
}

TEST_CASE("product rule holds exactly") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Polynomial p = random_int_polynomial(rng, 3, 4);
    const Polynomial q = random_int_polynomial(rng, 3, 4);
    for (int v = 0; v < 3; ++v) {
      const Polynomial lhs = differentiate(p * q, v);
      const Polynomial rhs = differentiate(p, v) * q + p * differentiate(q, v);
      CHECK(lhs.terms() == rhs.terms());
    }
  }
}

TEST_CASE("evaluate is a ring homomorphism within tolerance") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Polynomial p = random_polynomial(rng, 2, 5);
    const Polynomial q = random_polynomial(rng, 2, 5);
    const Eigen::Vector2d x(cbc::testing::uniform(rng, -2, 2),
                            cbc::testing::uniform(rng, -2, 2));
    const double lhs = (p * q).evaluate(x);
    const double rhs = p.evaluate(x) * q.evaluate(x);
    CHECK(std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("degree bookkeeping") {
  std::mt19937_64 rng(5);
  const Polynomial p = random_polynomial(rng, 2, 4);
  const Polynomial q = random_polynomial(rng, 2, 3);
  CHECK((p + q).degree() <= std::max(p.degree(), q.degree()));
  if (!p.is_zero() && !q.is_zero()) {
    CHECK((p * q).degree() == p.degree() + q.degree());
  }
  CHECK(Polynomial(3).degree() == -1);
}

TEST_CASE("truncate cleans small coefficients only") {
  Polynomial p = Polynomial::from_terms(1, {{1.0, {2}}, {1e-14, {1}}, {-2.0, {0}}});
  const Polynomial t = truncate(p);
  CHECK(t.num_terms() == 2);
  CHECK(t.coefficient(Monomial({1})) == 0.0);
  CHECK(t.coefficient(Monomial({2})) == doctest::Approx(1.0));
}

TEST_CASE("text form follows graded-lex order") {
  const Polynomial p = Polynomial::from_terms(2, {{2.0, {2, 0}}, {1.0, {0, 0}}, {-3.0, {1, 1}}});
  CHECK(cbc::to_string(p) == "1 + 2*x1^2 + -3*x1^1*x2^1");
}
