#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbc/system.hpp"

namespace cbc {

// Sampling, bisection, and grid checks of certificates. Deliberately free of
// the SOS machinery so a modeling or solver bug cannot certify itself; the
// only solver used here is a dense LP over the input polytope.

struct VerifyOptions {
  std::uint64_t seed = 2025;
  int samples_per_component = 10000;
  double boundary_tol = 1e-8;
  double lp_tol = 1e-6;
  int grid_resolution = 201;
  double min_acceptance_rate = 1e-4;  // below this a component is unsampleable
};

struct UnsafeSampleReport {
  struct Component {
    int samples = 0;
    double max_b = 0.0;
    bool unsampleable = false;
  };
  std::vector<Component> components;

  bool all_negative(double margin = 0.0) const;
};

// Max of b over rejection samples of each unsafe component. Deterministic
// given the seed.
UnsafeSampleReport sample_unsafe_max(const Polynomial& b, const SemialgebraicUnion& unsafe,
                                     const Box& box, const VerifyOptions& opts = {});

// Points with |b| <= boundary_tol found by bisecting random rays from an
// interior point (b > 0) toward box points where b < 0. Throws
// std::runtime_error if no interior point is found; returns fewer than n
// points only after exhausting 100 n rays.
std::vector<Eigen::VectorXd> boundary_points(const Polynomial& b, const Box& box, int n,
                                             const VerifyOptions& opts = {});

struct BoundaryFeasibilityReport {
  int points = 0;
  int feasible = 0;
  double worst_margin = 0.0;  // min over points of the LP optimum
  double fraction() const { return points == 0 ? 1.0 : static_cast<double>(feasible) / points; }
};

// Per point, maximizes grad(b).(f + g u) over the input polytope; the point
// passes when the optimum is >= -lp_tol (the exact boundary condition,
// not the eta-relaxed runtime constraint).
BoundaryFeasibilityReport boundary_feasibility(const Polynomial& b,
                                               const ControlAffineSystem& system,
                                               const std::vector<Eigen::VectorXd>& points,
                                               const VerifyOptions& opts = {});

struct GridField {
  Box box;
  std::vector<int> resolution;   // per axis, >= 2
  std::vector<double> values;    // row-major, last axis fastest

  std::size_t size() const { return values.size(); }
  Eigen::VectorXd point_at(const std::vector<int>& idx) const;
  std::string to_csv() const;        // x1,...,xn,b rows in row-major order
  std::string metadata_json() const; // box and resolution sidecar
};

GridField grid_eval(const Polynomial& b, const Box& box, int resolution);

// (cell volume) x (number of cells with b >= 0).
double set_area(const GridField& field);

// True when every cell with prev >= 0 has next > 0. Strict on the next
// field, so contains(F, F) fails exactly on boundary cells.
bool contains(const GridField& prev, const GridField& next);

struct CertificateReport {
  UnsafeSampleReport unsafe;
  BoundaryFeasibilityReport boundary;
  int boundary_points_requested = 0;
  int boundary_points_found = 0;
  bool boundary_vacuous = false;  // empty zero level set
  double area = 0.0;
  bool pass = false;
  std::string summary() const;
};

// Full solver-free check of one certificate: unsafe-set negativity, boundary
// control feasibility, and the safe-set area on the domain grid.
CertificateReport verify_certificate(const Polynomial& b, const ControlAffineSystem& system,
                                     const SemialgebraicUnion& unsafe, const Box& domain,
                                     const Box& sampling_box, const VerifyOptions& opts = {});

}  // namespace cbc
