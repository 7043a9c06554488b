#pragma once

#include <Eigen/Dense>

namespace cbc {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double value = 0.0;
};

// maximize c'x subject to A x <= b, x free. Dense two-phase simplex with
// Bland's rule; intended for the tiny polytopes that show up here (a handful
// of rows and <= ~6 variables), where exactness and determinism matter more
// than speed.
LpResult lp_maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                     const Eigen::VectorXd& b);

// Convenience wrapper for input polytopes {u | Au u + cu >= 0}.
LpResult lp_maximize_over_polytope(const Eigen::VectorXd& c, const Eigen::MatrixXd& Au,
                                   const Eigen::VectorXd& cu);

// True if {u | Au u + cu >= 0} is nonempty and bounded.
struct PolytopeCheck {
  bool nonempty = false;
  bool bounded = false;
};
PolytopeCheck check_polytope(const Eigen::MatrixXd& Au, const Eigen::VectorXd& cu);

}  // namespace cbc
