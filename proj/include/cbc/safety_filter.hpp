#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "cbc/system.hpp"

namespace cbc {

// Online safety layer: minimally modifies a nominal input subject to the
// certificate constraint grad(b).(f + g u) >= -eta b(x) and the input
// polytope.
class SafetyFilter {
 public:
  SafetyFilter(Polynomial b, ControlAffineSystem system, double eta);

  const Polynomial& barrier() const { return b_; }
  double eta() const { return eta_; }

  struct Result {
    Eigen::VectorXd u;
    bool qp_infeasible = false;  // fell back to steepest safe direction
    bool constraint_active = false;
  };

  // Solves the small dense QP by enumerating active sets. If the QP is
  // infeasible at x, returns the admissible u maximizing the certificate
  // derivative, flagged.
  Result filter(const Eigen::VectorXd& x, const Eigen::VectorXd& u_nominal) const;

 private:
  Polynomial b_;
  ControlAffineSystem system_;
  double eta_;
  PolyVector grad_b_;
};

// u = -K (x - x_eq).
Eigen::VectorXd nominal_pd(const Eigen::MatrixXd& K, const Eigen::VectorXd& x_eq,
                           const Eigen::VectorXd& x);

struct Trajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;  // steps x nx
  Eigen::MatrixXd inputs;  // steps x nu
  Eigen::VectorXd b_values;
  bool blew_up = false;
  bool filter_fallback = false;  // any step used the infeasible-QP fallback

  int steps() const { return static_cast<int>(times.size()); }
  double min_b() const { return b_values.size() > 0 ? b_values.minCoeff() : 0.0; }
  // Worst violation of Au u + cu >= 0 over the trajectory (negative = violation).
  double worst_input_margin(const ControlAffineSystem& system) const;
  std::string to_csv() const;  // header: t, x1..xn, u1..um, b
};

using Controller = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Classical fourth-order Runge-Kutta with the input held over each step.
// Aborts with a partial trajectory if the state norm exceeds 1e6.
Trajectory simulate(const ControlAffineSystem& system, const Controller& controller,
                    const Polynomial& b, const Eigen::VectorXd& x0, double horizon, double dt);

}  // namespace cbc
