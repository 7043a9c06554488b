#pragma once

#include <Eigen/Dense>

namespace cbc {

// Stabilizing solution of the continuous-time algebraic Riccati equation
//   A'P + PA - P B R^{-1} B' P + Q = 0,  P = P' >= 0.
// Solved on the stable invariant subspace of the Hamiltonian matrix and
// polished with Kleinman-Newton steps. Throws std::invalid_argument on a
// non-stabilizable pair and std::runtime_error if the iteration diverges.
Eigen::MatrixXd care_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

// LQR gain K = R^{-1} B' P for the solution above.
Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& B, const Eigen::MatrixXd& R,
                         const Eigen::MatrixXd& P);

// Frobenius norm of the Riccati residual; used by callers to assert quality.
double care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     const Eigen::MatrixXd& P);

// True if every eigenvalue of A with nonnegative real part is controllable
// (PBH test).
bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

}  // namespace cbc
