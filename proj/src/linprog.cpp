#include "cbc/linprog.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cbc {

namespace {

constexpr double kPivotTol = 1e-11;

// Tableau simplex on: maximize c'z s.t. T z = rhs, z >= 0, with the given
// starting basis. Bland's rule throughout. Returns false on unboundedness.
bool run_simplex(Eigen::MatrixXd& T, Eigen::VectorXd& rhs, Eigen::VectorXd& obj,
                 double& obj_const, std::vector<int>& basis) {
  const int m = static_cast<int>(T.rows());
  const int n = static_cast<int>(T.cols());
  // Reduced costs: obj row kept explicitly, already reduced w.r.t. basis.
  for (int iter = 0; iter < 20000; ++iter) {
    int enter = -1;
    for (int j = 0; j < n; ++j) {
      if (obj[j] > kPivotTol) {  // Bland: first improving column
        enter = j;
        break;
      }
    }
    if (enter < 0) return true;  // optimal

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (T(i, enter) > kPivotTol) {
        const double ratio = rhs[i] / T(i, enter);
        if (ratio < best_ratio - kPivotTol ||
            (ratio < best_ratio + kPivotTol &&
             (leave < 0 || basis[i] < basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return false;  // unbounded

    // Pivot on (leave, enter).
    const double piv = T(leave, enter);
    T.row(leave) /= piv;
    rhs[leave] /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave) continue;
      const double factor = T(i, enter);
      if (factor != 0.0) {
        T.row(i) -= factor * T.row(leave);
        rhs[i] -= factor * rhs[leave];
      }
    }
    const double ofac = obj[enter];
    if (ofac != 0.0) {
      obj -= ofac * T.row(leave).transpose();
      obj_const += ofac * rhs[leave];
    }
    basis[leave] = enter;
  }
  throw std::runtime_error("lp_maximize: simplex iteration limit reached");
}

}  // namespace

LpResult lp_maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                     const Eigen::VectorXd& b) {
  const int m = static_cast<int>(A.rows());
  const int nx = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != nx) {
    throw std::invalid_argument("lp_maximize: dimension mismatch");
  }

  // Standard form: x = xp - xn, slack s per row, artificials where needed.
  // Columns: [xp(nx) | xn(nx) | s(m) | artificials...]
  const int n_struct = 2 * nx + m;
  int n_art = 0;
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0) ++n_art;
  }
  const int n = n_struct + n_art;

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd rhs(m);
  std::vector<int> basis(m);
  int art = 0;
  for (int i = 0; i < m; ++i) {
    const double sign = b[i] < 0 ? -1.0 : 1.0;
    T.block(i, 0, 1, nx) = sign * A.row(i);
    T.block(i, nx, 1, nx) = -sign * A.row(i);
    T(i, 2 * nx + i) = sign;
    rhs[i] = sign * b[i];
    if (b[i] < 0) {
      T(i, n_struct + art) = 1.0;
      basis[i] = n_struct + art;
      ++art;
    } else {
      basis[i] = 2 * nx + i;
    }
  }

  if (n_art > 0) {
    // Phase 1: maximize -sum(artificials).
    Eigen::VectorXd obj1 = Eigen::VectorXd::Zero(n);
    double obj1_const = 0.0;
    for (int j = n_struct; j < n; ++j) obj1[j] = -1.0;
    // Reduce against initial basis (artificials are basic).
    for (int i = 0; i < m; ++i) {
      if (basis[i] >= n_struct) {
        obj1 += T.row(i).transpose();
        obj1_const -= rhs[i];
      }
    }
    if (!run_simplex(T, rhs, obj1, obj1_const, basis)) {
      throw std::runtime_error("lp_maximize: phase-1 unbounded (internal error)");
    }
    if (obj1_const < -1e-8) {
      return {LpStatus::kInfeasible, Eigen::VectorXd(), 0.0};
    }
    // Drive any artificial still in the basis out (degenerate rows).
    for (int i = 0; i < m; ++i) {
      if (basis[i] >= n_struct) {
        int enter = -1;
        for (int j = 0; j < n_struct; ++j) {
          if (std::abs(T(i, j)) > kPivotTol) {
            enter = j;
            break;
          }
        }
        if (enter < 0) continue;  // redundant row
        const double piv = T(i, enter);
        T.row(i) /= piv;
        rhs[i] /= piv;
        for (int k = 0; k < m; ++k) {
          if (k == i) continue;
          const double factor = T(k, enter);
          if (factor != 0.0) {
            T.row(k) -= factor * T.row(i);
            rhs[k] -= factor * rhs[i];
          }
        }
        basis[i] = enter;
      }
    }
  }

  // Phase 2 objective on structural columns; artificial columns pinned out.
  Eigen::VectorXd obj = Eigen::VectorXd::Zero(n);
  obj.segment(0, nx) = c;
  obj.segment(nx, nx) = -c;
  for (int j = n_struct; j < n; ++j) obj[j] = -1e30;  // never re-enter
  double obj_const = 0.0;
  for (int i = 0; i < m; ++i) {
    const double w = obj[basis[i]];
    if (w != 0.0) {
      obj -= w * T.row(i).transpose();
      obj_const += w * rhs[i];
    }
  }
  if (!run_simplex(T, rhs, obj, obj_const, basis)) {
    return {LpStatus::kUnbounded, Eigen::VectorXd(), 0.0};
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) z[basis[i]] = rhs[i];
  LpResult result;
  result.status = LpStatus::kOptimal;
  result.x = z.segment(0, nx) - z.segment(nx, nx);
  result.value = c.dot(result.x);
  return result;
}

LpResult lp_maximize_over_polytope(const Eigen::VectorXd& c, const Eigen::MatrixXd& Au,
                                   const Eigen::VectorXd& cu) {
  // Au u + cu >= 0  <=>  -Au u <= cu
  return lp_maximize(c, -Au, cu);
}

PolytopeCheck check_polytope(const Eigen::MatrixXd& Au, const Eigen::VectorXd& cu) {
  PolytopeCheck out;
  const int nu = static_cast<int>(Au.cols());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(nu);
  LpResult feas = lp_maximize_over_polytope(c, Au, cu);
  out.nonempty = feas.status == LpStatus::kOptimal;
  if (!out.nonempty) return out;
  out.bounded = true;
  for (int i = 0; i < nu && out.bounded; ++i) {
    for (double sign : {1.0, -1.0}) {
      c.setZero();
      c[i] = sign;
      if (lp_maximize_over_polytope(c, Au, cu).status == LpStatus::kUnbounded) {
        out.bounded = false;
        break;
      }
    }
  }
  return out;
}

}  // namespace cbc
