#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cbc/care.hpp"
#include "test_helpers.hpp"

using namespace cbc;

TEST_CASE("double integrator closed form") {
  Eigen::Matrix2d A;
  A << 0, 1, 0, 0;
  Eigen::Vector2d B(0, 1);
  const Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
  Eigen::MatrixXd R(1, 1);
  R << 1;
  const Eigen::MatrixXd P = care_solve(A, B, Q, R);
  Eigen::Matrix2d expect;
  const double s3 = std::sqrt(3.0);
  expect << s3, 1, 1, s3;
  CHECK((P - expect).norm() <= 1e-8);

  const Eigen::MatrixXd K = lqr_gain(B, R, P);
  CHECK(K(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(K(0, 1) == doctest::Approx(s3).epsilon(1e-9));
}

TEST_CASE("scalar closed forms") {
  Eigen::MatrixXd A(1, 1), B(1, 1), Q(1, 1), R(1, 1);
  B << 1;
  Q << 1;
  R << 1;

  A << 0;
  CHECK(std::abs(care_solve(A, B, Q, R)(0, 0) - 1.0) <= 1e-10);

  A << -1;
  CHECK(std::abs(care_solve(A, B, Q, R)(0, 0) - (std::sqrt(2.0) - 1.0)) <= 1e-10);
}

TEST_CASE("random stabilizable pairs satisfy the residual bound") {
  std::mt19937_64 rng(7777);
  int tested = 0;
  while (tested < 20) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const int m = 1 + static_cast<int>(rng() % 2);
    Eigen::MatrixXd A(n, n), B(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = cbc::testing::uniform(rng, -2, 2);
      for (int j = 0; j < m; ++j) B(i, j) = cbc::testing::uniform(rng, -2, 2);
    }
    if (!is_stabilizable(A, B)) continue;
    Eigen::MatrixXd G(n, n), H(m, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) G(i, j) = cbc::testing::uniform(rng, -1, 1);
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) H(i, j) = cbc::testing::uniform(rng, -1, 1);
    }
    const Eigen::MatrixXd Q = G * G.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd R = H * H.transpose() + 0.1 * Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd P = care_solve(A, B, Q, R);
    CHECK(care_residual(A, B, Q, R, P) <= 1e-8 * (1.0 + P.norm()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9 * (1.0 + P.norm()));
    ++tested;
  }
}

TEST_CASE("non-stabilizable pair is rejected") {
  Eigen::Matrix2d A = Eigen::Matrix2d::Identity();  // two unstable modes
  Eigen::Vector2d B(1, 0);                          // second mode unreachable
  CHECK(!is_stabilizable(A, B));
  CHECK_THROWS_AS(care_solve(A, B, Eigen::Matrix2d::Identity(),
                             Eigen::MatrixXd::Identity(1, 1)),
                  std::invalid_argument);
}
