#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cbc/verification.hpp"
#include "test_helpers.hpp"

using namespace cbc;
using cbc::testing::appendix_a_cbc;

namespace {

Box square(double half, int dim = 2) {
  Box box;
  box.bounds = Eigen::MatrixXd(dim, 2);
  for (int i = 0; i < dim; ++i) {
    box.bounds(i, 0) = -half;
    box.bounds(i, 1) = half;
  }
  return box;
}

SemialgebraicUnion disk_component(double cx, double cy, double r) {
  SemialgebraicUnion unsafe;
  unsafe.components.push_back({Polynomial::from_terms(
      2, {{1.0, {2, 0}}, {-2.0 * cx, {1, 0}}, {1.0, {0, 2}}, {-2.0 * cy, {0, 1}},
          {cx * cx + cy * cy - r * r, {0, 0}}})});
  return unsafe;
}

ControlAffineSystem vanderpol_system() {
  ControlAffineSystem sys;
  sys.nx = 2;
  sys.nu = 1;
  sys.f = cbc::testing::vanderpol_f();
  sys.g = cbc::testing::vanderpol_g();
  sys.Au = Eigen::MatrixXd(2, 1);
  sys.Au << 1, -1;
  sys.cu = Eigen::VectorXd(2);
  sys.cu << 1, 1;
  return sys;
}

}  // namespace

TEST_CASE("published certificate is negative on the obstacle disk") {
  const UnsafeSampleReport report =
      sample_unsafe_max(appendix_a_cbc(), disk_component(1, 1, 0.2), square(4.0));
  REQUIRE(report.components.size() == 1);
  CHECK(!report.components[0].unsampleable);
  CHECK(report.components[0].samples == 10000);
  CHECK(report.components[0].max_b < 0.0);
}

TEST_CASE("constant certificates behave as expected in sampling") {
  const SemialgebraicUnion unsafe = disk_component(0, 0, 1.0);
  const UnsafeSampleReport neg =
      sample_unsafe_max(Polynomial::constant(2, -1.0), unsafe, square(2.0));
  CHECK(neg.components[0].max_b == doctest::Approx(-1.0));
  CHECK(neg.all_negative());

  const UnsafeSampleReport pos =
      sample_unsafe_max(Polynomial::constant(2, 1.0), unsafe, square(2.0));
  CHECK(pos.components[0].max_b == doctest::Approx(1.0));
  CHECK(!pos.all_negative());
}

TEST_CASE("empty components are reported unsampleable") {
  // { x : x1^2 + 1 < 0 } is empty.
  SemialgebraicUnion unsafe;
  unsafe.components.push_back({Polynomial::from_terms(2, {{1.0, {2, 0}}, {1.0, {0, 0}}})});
  const UnsafeSampleReport report =
      sample_unsafe_max(Polynomial::constant(2, 0.0), unsafe, square(1.0));
  CHECK(report.components[0].unsampleable);
  CHECK(!report.all_negative());
}

TEST_CASE("sampling is deterministic given the seed") {
  const auto a = sample_unsafe_max(appendix_a_cbc(), disk_component(1, 1, 0.2), square(4.0));
  const auto b = sample_unsafe_max(appendix_a_cbc(), disk_component(1, 1, 0.2), square(4.0));
  CHECK(a.components[0].max_b == b.components[0].max_b);
  CHECK(a.components[0].samples == b.components[0].samples);
}

TEST_CASE("boundary points land on the unit circle") {
  const Polynomial b =
      Polynomial::from_terms(2, {{1.0, {0, 0}}, {-1.0, {2, 0}}, {-1.0, {0, 2}}});
  const auto pts = boundary_points(b, square(2.0), 100);
  REQUIRE(pts.size() == 100);
  for (const auto& x : pts) {
    CHECK(std::abs(b.evaluate(x)) <= 1e-8);
    CHECK(std::abs(x.norm() - 1.0) <= 1e-6);
  }
}

TEST_CASE("boundary points are deterministic given the seed") {
  const Polynomial b =
      Polynomial::from_terms(2, {{1.0, {0, 0}}, {-1.0, {2, 0}}, {-1.0, {0, 2}}});
  const auto a = boundary_points(b, square(2.0), 25);
  const auto c = boundary_points(b, square(2.0), 25);
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i] - c[i]).norm() == 0.0);
  }
}

TEST_CASE("boundary points on a band hit both walls") {
  const Polynomial b = Polynomial::from_terms(1, {{4.0, {0}}, {-1.0, {2}}});
  Box box;
  box.bounds = Eigen::MatrixXd(1, 2);
  box.bounds << -3, 3;
  const auto pts = boundary_points(b, box, 50);
  REQUIRE(!pts.empty());
  for (const auto& x : pts) CHECK(std::abs(std::abs(x[0]) - 2.0) <= 1e-7);
}

TEST_CASE("boundary finder needs an interior point") {
  const Polynomial b = Polynomial::from_terms(1, {{-1.0, {0}}, {-1.0, {2}}});  // -1 - x^2
  Box box;
  box.bounds = Eigen::MatrixXd(1, 2);
  box.bounds << -1, 1;
  CHECK_THROWS_AS(boundary_points(b, box, 5), std::runtime_error);
}

TEST_CASE("boundary feasibility LP on the line certificate") {
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
  const Polynomial b = Polynomial::from_terms(1, {{1.0, {0}}, {-1.0, {2}}});
  Eigen::VectorXd x(1);
  x << 1.0;
  const BoundaryFeasibilityReport rep = boundary_feasibility(b, sys, {x});
  CHECK(rep.points == 1);
  CHECK(rep.feasible == 1);
  // max over |u|<=1 of -2u = 2.
  CHECK(rep.worst_margin == doctest::Approx(2.0));
}

TEST_CASE("grid area of the unit disk") {
  const Polynomial b =
      Polynomial::from_terms(2, {{1.0, {0, 0}}, {-1.0, {2, 0}}, {-1.0, {0, 2}}});
  const GridField field = grid_eval(b, square(2.0), 401);
  const double area = set_area(field);
  CHECK(std::abs(area - M_PI) <= 0.02 * M_PI);
}

TEST_CASE("containment is strict on the next field") {
  const Polynomial disk =
      Polynomial::from_terms(2, {{1.0, {0, 0}}, {-1.0, {2, 0}}, {-1.0, {0, 2}}});
  const Polynomial bigger =
      Polynomial::from_terms(2, {{1.5, {0, 0}}, {-1.0, {2, 0}}, {-1.0, {0, 2}}});
  const GridField f1 = grid_eval(disk, square(2.0), 201);
  const GridField f2 = grid_eval(bigger, square(2.0), 201);
  CHECK(contains(f1, f2));
  CHECK(!contains(f2, f1));
  // Strictness: a grid with exact zeros on the boundary fails against itself.
  const Polynomial band = Polynomial::from_terms(2, {{1.0, {0, 0}}, {-1.0, {2, 0}}});
  const GridField f3 = grid_eval(band, square(2.0), 201);  // zeros at |x1| = 1 cells
  CHECK(!contains(f3, f3));

  Box other = square(2.0);
  other.bounds(0, 1) = 3.0;
  CHECK_THROWS_AS(contains(f1, grid_eval(bigger, other, 201)), std::invalid_argument);
}

TEST_CASE("grid CSV and metadata round out the export") {
  const Polynomial b = Polynomial::from_terms(2, {{1.0, {0, 0}}, {-1.0, {2, 0}}});
  const GridField field = grid_eval(b, square(1.0), 3);
  const std::string csv = field.to_csv();
  CHECK(csv.rfind("x1,x2,b\n", 0) == 0);
  // 9 data rows.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
  CHECK(field.metadata_json().find("\"resolution\": [3, 3]") != std::string::npos);
}

TEST_CASE("full certificate verification on the published polynomial") {
  SemialgebraicUnion unsafe;
  auto disk = [](double cx, double cy) {
    return Polynomial::from_terms(2, {{1.0, {2, 0}}, {-2.0 * cx, {1, 0}}, {1.0, {0, 2}},
                                      {-2.0 * cy, {0, 1}}, {cx * cx + cy * cy - 0.04, {0, 0}}});
  };
  unsafe.components.push_back({Polynomial::from_terms(2, {{4.0, {0, 0}}, {-1.0, {2, 0}}})});
  unsafe.components.push_back({Polynomial::from_terms(2, {{4.0, {0, 0}}, {-1.0, {0, 2}}})});
  unsafe.components.push_back({disk(1, 1)});
  unsafe.components.push_back({disk(-1, -1)});
  unsafe.components.push_back({disk(-1, 1)});

  const CertificateReport report = verify_certificate(
      appendix_a_cbc(), vanderpol_system(), unsafe, square(2.0), square(4.0));
  // Boundary control feasibility holds with a comfortable margin.
  CHECK(report.boundary_points_found == 500);
  CHECK(report.boundary.fraction() == doctest::Approx(1.0));
  CHECK(report.boundary.worst_margin > 0.0);
  CHECK(report.area > 0.0);
  // The published coefficients are rounded to three decimals, which breaks
  // strict negativity on the wall component and the (-1,1) disk where the
  // safe set is tangent to them; b(2, -0.1738) = +3.78.
  CHECK(report.unsafe.components[1].max_b < 0.0);
  CHECK(report.unsafe.components[2].max_b < 0.0);
  CHECK(report.unsafe.components[3].max_b < 0.0);
  CHECK(report.unsafe.components[0].max_b > 0.0);
  CHECK(!report.pass);
  MESSAGE(report.summary());
}
