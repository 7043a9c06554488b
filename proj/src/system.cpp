#include "cbc/system.hpp"

#include <stdexcept>

#include "cbc/linprog.hpp"

namespace cbc {

void ControlAffineSystem::validate() const {
  if (nx <= 0 || nu <= 0) throw std::invalid_argument("system: nx and nu must be positive");
  if (f.size() != nx || f.nvars() != nx) {
    throw std::invalid_argument("system: f must have nx entries in nx variables");
  }
  if (g.rows() != nx || g.cols() != nu || g.nvars() != nx) {
    throw std::invalid_argument("system: g must be nx x nu in nx variables");
  }
  if (Au.cols() != nu || cu.size() != Au.rows() || Au.rows() == 0) {
    throw std::invalid_argument("system: input polytope dimensions inconsistent");
  }
  const PolytopeCheck chk = check_polytope(Au, cu);
  if (!chk.nonempty) throw std::invalid_argument("system: input polytope is empty");
  if (!chk.bounded) throw std::invalid_argument("system: input polytope is unbounded");
}

bool SemialgebraicUnion::contains(const Eigen::VectorXd& x) const {
  for (const auto& component : components) {
    bool inside = true;
    for (const Polynomial& s : component) {
      if (s.evaluate(x) >= 0.0) {
        inside = false;
        break;
      }
    }
    if (inside) return true;
  }
  return false;
}

void SemialgebraicUnion::validate(int nx) const {
  if (components.empty()) throw std::invalid_argument("unsafe set: no components");
  for (const auto& component : components) {
    if (component.empty()) {
      throw std::invalid_argument("unsafe set: component with no inequalities");
    }
    for (const Polynomial& s : component) {
      if (s.nvars() != nx) {
        throw std::invalid_argument("unsafe set: polynomial variable count != nx");
      }
    }
  }
}

void Box::validate() const {
  if (bounds.cols() != 2 || bounds.rows() == 0) {
    throw std::invalid_argument("box: expected one [lo, hi] row per variable");
  }
  for (int i = 0; i < bounds.rows(); ++i) {
    if (!(bounds(i, 0) < bounds(i, 1))) {
      throw std::invalid_argument("box: lo must be < hi on every axis");
    }
  }
}

}  // namespace cbc
