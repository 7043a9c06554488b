#include "cbc/safety_filter.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cbc/linprog.hpp"

namespace cbc {

SafetyFilter::SafetyFilter(Polynomial b, ControlAffineSystem system, double eta)
    : b_(std::move(b)), system_(std::move(system)), eta_(eta), grad_b_(gradient(b_)) {
  if (eta_ <= 0) throw std::invalid_argument("SafetyFilter: eta must be > 0");
  system_.validate();
  if (b_.nvars() != system_.nx) {
    throw std::invalid_argument("SafetyFilter: certificate variable count != nx");
  }
  // Spot-check the stored gradient against central differences.
  const Eigen::VectorXd probe = Eigen::VectorXd::Constant(system_.nx, 0.37);
  const double h = 1e-6;
  for (int i = 0; i < system_.nx; ++i) {
    Eigen::VectorXd hi = probe, lo = probe;
    hi[i] += h;
    lo[i] -= h;
    const double fd = (b_.evaluate(hi) - b_.evaluate(lo)) / (2 * h);
    const double exact = grad_b_[i].evaluate(probe);
    if (std::abs(fd - exact) > 1e-5 * (1.0 + std::abs(exact))) {
      throw std::logic_error("SafetyFilter: gradient polynomials inconsistent with b");
    }
  }
}

namespace {

// Enumerates active subsets of G u >= h for min |u - u_nominal|^2. Unique
// optimum for a convex QP, so the first KKT-consistent candidate wins; ties
// are broken by objective value for determinism under degeneracy.
struct QpOutcome {
  bool feasible = false;
  Eigen::VectorXd u;
  std::vector<bool> active;
};

QpOutcome solve_projection_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                              const Eigen::VectorXd& u_nominal) {
  const int rows = static_cast<int>(G.rows());
  const int nu = static_cast<int>(G.cols());
  if (rows > 20) {
    throw std::invalid_argument("projection QP: active-set enumeration needs few rows");
  }
  constexpr double kFeasTol = 1e-9;

  QpOutcome best;
  double best_obj = std::numeric_limits<double>::infinity();

  std::vector<int> subset;
  // All subsets of rows with size <= nu, including the empty set.
  const int total = 1 << rows;
  for (int mask = 0; mask < total; ++mask) {
    const int size = __builtin_popcount(static_cast<unsigned>(mask));
    if (size > nu) continue;
    Eigen::MatrixXd Gs(size, nu);
    Eigen::VectorXd hs(size);
    int r = 0;
    for (int i = 0; i < rows; ++i) {
      if (mask & (1 << i)) {
        Gs.row(r) = G.row(i);
        hs[r] = h[i];
        ++r;
      }
    }
    Eigen::VectorXd u = u_nominal;
    if (size > 0) {
      const Eigen::MatrixXd GGt = Gs * Gs.transpose();
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(GGt);
      if (lu.rank() < size) continue;  // redundant active set
      const Eigen::VectorXd lambda = lu.solve(hs - Gs * u_nominal);
      if ((lambda.array() < -kFeasTol).any()) continue;  // not KKT-consistent
      u = u_nominal + Gs.transpose() * lambda;
    }
    if (((G * u - h).array() < -1e-8).any()) continue;  // primal infeasible
    const double obj = (u - u_nominal).squaredNorm();
    if (obj < best_obj - 1e-14) {
      best_obj = obj;
      best.feasible = true;
      best.u = u;
      best.active.assign(rows, false);
      for (int i = 0; i < rows; ++i) {
        if (mask & (1 << i)) best.active[i] = true;
      }
    }
  }
  return best;
}

}  // namespace

SafetyFilter::Result SafetyFilter::filter(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u_nominal) const {
  if (x.size() != system_.nx || u_nominal.size() != system_.nu) {
    throw std::invalid_argument("SafetyFilter::filter: dimension mismatch");
  }
  if (!u_nominal.allFinite()) {
    throw std::invalid_argument("SafetyFilter::filter: nominal input not finite");
  }
  const int tau = system_.num_input_rows();
  const Eigen::VectorXd grad = grad_b_.evaluate(x);
  const Eigen::VectorXd fx = system_.f.evaluate(x);
  const Eigen::MatrixXd gx = system_.g.evaluate(x);

  // Rows: input polytope Au u + cu >= 0, then the certificate constraint
  // grad.(f + g u) + eta b >= 0.
  Eigen::MatrixXd G(tau + 1, system_.nu);
  Eigen::VectorXd h(tau + 1);
  G.topRows(tau) = system_.Au;
  h.head(tau) = -system_.cu;
  G.row(tau) = grad.transpose() * gx;
  h[tau] = -grad.dot(fx) - eta_ * b_.evaluate(x);

  Result out;
  const QpOutcome qp = solve_projection_qp(G, h, u_nominal);
  if (qp.feasible) {
    out.u = qp.u;
    out.constraint_active = qp.active[tau];
    return out;
  }

  // Best effort: maximize the certificate derivative over the polytope.
  out.qp_infeasible = true;
  const LpResult lp =
      lp_maximize_over_polytope((grad.transpose() * gx).transpose(), system_.Au, system_.cu);
  if (lp.status != LpStatus::kOptimal) {
    throw std::runtime_error("SafetyFilter::filter: input polytope LP failed");
  }
  out.u = lp.x;
  return out;
}

Eigen::VectorXd nominal_pd(const Eigen::MatrixXd& K, const Eigen::VectorXd& x_eq,
                           const Eigen::VectorXd& x) {
  if (K.cols() != x.size() || x_eq.size() != x.size()) {
    throw std::invalid_argument("nominal_pd: dimension mismatch");
  }
  return -K * (x - x_eq);
}

double Trajectory::worst_input_margin(const ControlAffineSystem& system) const {
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < steps(); ++k) {
    const Eigen::VectorXd u = inputs.row(k);
    worst = std::min(worst, (system.Au * u + system.cu).minCoeff());
  }
  return worst;
}

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "t";
  for (int i = 0; i < states.cols(); ++i) os << ",x" << (i + 1);
  for (int j = 0; j < inputs.cols(); ++j) os << ",u" << (j + 1);
  os << ",b\n";
  for (int k = 0; k < steps(); ++k) {
    os << times[k];
    for (int i = 0; i < states.cols(); ++i) os << "," << states(k, i);
    for (int j = 0; j < inputs.cols(); ++j) os << "," << inputs(k, j);
    os << "," << b_values[k] << "\n";
  }
  return os.str();
}

Trajectory simulate(const ControlAffineSystem& system, const Controller& controller,
                    const Polynomial& b, const Eigen::VectorXd& x0, double horizon, double dt) {
  if (dt <= 0 || horizon < dt) {
    throw std::invalid_argument("simulate: need dt > 0 and horizon >= dt");
  }
  const int steps = static_cast<int>(std::llround(horizon / dt)) + 1;
  Trajectory traj;
  traj.times.resize(steps);
  traj.states.resize(steps, system.nx);
  traj.inputs.resize(steps, system.nu);
  traj.b_values.resize(steps);

  auto flow = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return Eigen::VectorXd(system.f.evaluate(x) + system.g.evaluate(x) * u);
  };

  Eigen::VectorXd x = x0;
  int recorded = 0;
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const Eigen::VectorXd u = controller(x);
    traj.times[k] = t;
    traj.states.row(k) = x;
    traj.inputs.row(k) = u;
    traj.b_values[k] = b.evaluate(x);
    recorded = k + 1;
    if (x.lpNorm<Eigen::Infinity>() > 1e6) {
      traj.blew_up = true;
      break;
    }
    if (k + 1 == steps) break;
    // RK4 with zero-order hold on u.
    const Eigen::VectorXd k1 = flow(x, u);
    const Eigen::VectorXd k2 = flow(x + 0.5 * dt * k1, u);
    const Eigen::VectorXd k3 = flow(x + 0.5 * dt * k2, u);
    const Eigen::VectorXd k4 = flow(x + dt * k3, u);
    x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  traj.times.conservativeResize(recorded);
  traj.states.conservativeResize(recorded, system.nx);
  traj.inputs.conservativeResize(recorded, system.nu);
  traj.b_values.conservativeResize(recorded);
  return traj;
}

}  // namespace cbc
