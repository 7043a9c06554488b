#include "cbc/care.hpp"

#include <Eigen/Eigenvalues>

#include <complex>
#include <stdexcept>

namespace cbc {

namespace {

// Solves A'X + XA = -RHS by Kronecker vectorization; fine for the small
// state dimensions used here.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& rhs) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * n, n * n);
  // Column-major vectorization: v[c*n + r] = X(r, c).
  // (A'X)(r,c) = sum_k A(k,r) X(k,c);  (X A)(r,c) = sum_k X(r,k) A(k,c).
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) {
      const int row = c * n + r;
      for (int k = 0; k < n; ++k) {
        K(row, c * n + k) += A(k, r);
        K(row, k * n + r) += A(k, c);
      }
    }
  }
  Eigen::VectorXd vec_rhs(n * n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) vec_rhs[c * n + r] = -rhs(r, c);
  }
  const Eigen::VectorXd x = K.colPivHouseholderQr().solve(vec_rhs);
  Eigen::MatrixXd X(n, n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) X(r, c) = x[c * n + r];
  }
  return 0.5 * (X + X.transpose());
}

}  // namespace

bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const int n = static_cast<int>(A.rows());
  const Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  for (int k = 0; k < n; ++k) {
    const std::complex<double> lambda = es.eigenvalues()[k];
    if (lambda.real() < -1e-9) continue;
    Eigen::MatrixXcd pbh(n, n + B.cols());
    pbh << A.cast<std::complex<double>>() -
               lambda * Eigen::MatrixXcd::Identity(n, n),
        B.cast<std::complex<double>>();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(pbh);
    qr.setThreshold(1e-10);
    if (qr.rank() < n) return false;
  }
  return true;
}

double care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd Rinv_Bt_P = R.llt().solve(B.transpose() * P);
  return (A.transpose() * P + P * A - P * B * Rinv_Bt_P + Q).norm();
}

Eigen::MatrixXd care_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m ||
      R.cols() != m) {
    throw std::invalid_argument("care_solve: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> Rllt(R);
  if (Rllt.info() != Eigen::Success) {
    throw std::invalid_argument("care_solve: R must be positive definite");
  }
  if ((Q - Q.transpose()).norm() > 1e-8 * (1.0 + Q.norm())) {
    throw std::invalid_argument("care_solve: Q must be symmetric");
  }
  if (!is_stabilizable(A, B)) {
    throw std::invalid_argument("care_solve: (A, B) is not stabilizable");
  }

  // Stable invariant subspace of the Hamiltonian.
  const Eigen::MatrixXd BRinvBt = B * Rllt.solve(B.transpose());
  Eigen::MatrixXd H(2 * n, 2 * n);
  H << A, -BRinvBt, -Q, -A.transpose();
  Eigen::EigenSolver<Eigen::MatrixXd> es(H);
  Eigen::MatrixXcd U1(n, n), U2(n, n);
  int count = 0;
  for (int k = 0; k < 2 * n && count < n; ++k) {
    if (es.eigenvalues()[k].real() < 0) {
      U1.col(count) = es.eigenvectors().col(k).head(n);
      U2.col(count) = es.eigenvectors().col(k).tail(n);
      ++count;
    }
  }
  if (count != n) {
    throw std::runtime_error("care_solve: Hamiltonian has no n-dimensional stable subspace");
  }
  Eigen::MatrixXd P = (U2 * U1.inverse()).real();
  P = 0.5 * (P + P.transpose());

  // Kleinman-Newton polish: each step solves a Lyapunov equation for the
  // closed-loop matrix of the current gain.
  double res = care_residual(A, B, Q, R, P);
  for (int iter = 0; iter < 30 && res > 1e-13 * (1.0 + P.norm()); ++iter) {
    const Eigen::MatrixXd K = Rllt.solve(B.transpose() * P);
    const Eigen::MatrixXd Acl = A - B * K;
    const Eigen::MatrixXd rhs = Q + K.transpose() * R * K;
    const Eigen::MatrixXd Pn = solve_lyapunov(Acl, rhs);
    const double new_res = care_residual(A, B, Q, R, Pn);
    if (!Pn.allFinite() || new_res > 10.0 * (res + 1.0)) {
      throw std::runtime_error("care_solve: Newton refinement diverged");
    }
    P = Pn;
    res = new_res;
  }
  if (res > 1e-8 * (1.0 + P.norm())) {
    throw std::runtime_error("care_solve: residual did not reach tolerance");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esp(P);
  if (esp.eigenvalues().minCoeff() < -1e-8 * (1.0 + P.norm())) {
    throw std::runtime_error("care_solve: solution not positive semidefinite");
  }
  return P;
}

Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& B, const Eigen::MatrixXd& R,
                         const Eigen::MatrixXd& P) {
  return R.llt().solve(B.transpose() * P);
}

}  // namespace cbc
