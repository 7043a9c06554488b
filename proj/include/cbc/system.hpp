#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "cbc/polynomial.hpp"

namespace cbc {

// Control-affine dynamics dx/dt = f(x) + g(x) u with a polytopic input set
// {u | Au u + cu >= 0}.
struct ControlAffineSystem {
  int nx = 0;
  int nu = 0;
  PolyVector f;          // length nx
  PolyMatrix g;          // nx x nu
  Eigen::MatrixXd Au;    // tau x nu
  Eigen::VectorXd cu;    // tau

  int num_input_rows() const { return static_cast<int>(Au.rows()); }
  // Checks dimensions and that the input polytope is nonempty and bounded.
  void validate() const;
};

// Union of semialgebraic components; component i is
// {x | s_{i,1}(x) < 0, ..., s_{i,m_i}(x) < 0}.
struct SemialgebraicUnion {
  std::vector<std::vector<Polynomial>> components;

  int num_components() const { return static_cast<int>(components.size()); }
  bool contains(const Eigen::VectorXd& x) const;
  void validate(int nx) const;
};

// Initial-set description: either an explicit polynomial superlevel set
// {phi >= 0}, or implicitly the zero-superlevel set of the seeded b0.
struct X0Spec {
  std::optional<Polynomial> phi;

  bool explicit_phi() const { return phi.has_value(); }
};

// Axis-aligned box, one [lo, hi] row per state variable.
struct Box {
  Eigen::MatrixXd bounds;  // nx x 2

  int dim() const { return static_cast<int>(bounds.rows()); }
  double lo(int i) const { return bounds(i, 0); }
  double hi(int i) const { return bounds(i, 1); }
  void validate() const;
};

}  // namespace cbc
