#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace cbc {

// Linear conic problem over a product of PSD blocks plus free scalar
// variables:
//
//   maximize   <C, X> + q'z
//   subject to <A_i, X> + p_i'z = b_i,   i = 1..m
//              X  block-diagonal PSD,  z free.
//
// Matrix entries are stored once per (row <= col) pair; an off-diagonal entry
// with value v stands for the symmetric matrix having v at (row,col) and
// (col,row), so its inner-product contribution is 2*v*X(row,col).
struct SdpProblem {
  struct MatEntry {
    int block = 0;
    int row = 0;
    int col = 0;  // row <= col
    double value = 0.0;
  };
  struct VecEntry {
    int var = 0;
    double value = 0.0;
  };
  struct LinearConstraint {
    std::vector<MatEntry> mat;
    std::vector<VecEntry> free_part;
    double rhs = 0.0;
  };

  std::vector<int> block_sizes;  // size-1 blocks encode scalar nonnegativity
  int num_free = 0;
  std::vector<LinearConstraint> constraints;
  std::vector<MatEntry> objective_mat;    // maximized
  std::vector<VecEntry> objective_free;

  int num_constraints() const { return static_cast<int>(constraints.size()); }
  int num_blocks() const { return static_cast<int>(block_sizes.size()); }
  // Throws std::invalid_argument if any entry references an invalid
  // block/row/col/var or violates row <= col.
  void check_valid() const;
};

enum class SdpStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

std::string to_string(SdpStatus status);

struct SolveDiagnostics {
  int iterations = 0;
  double primal_residual = 0.0;   // ||b - A(X) - Pz|| / (1 + ||b||)
  double dual_residual = 0.0;     // ||C - S - A*(y)||_F / (1 + ||C||_F), incl. free part
  double duality_gap = 0.0;       // <X,S> / (1 + |pobj| + |dobj|)
  bool marginal = false;          // stopped within 10x of tolerance, not at it
  std::string free_var_handling = "native";
  std::string message;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::kNumericalFailure;
  std::vector<Eigen::MatrixXd> blocks;  // primal X, one per PSD block
  Eigen::VectorXd free_values;
  Eigen::VectorXd dual;                 // y, one per constraint
  double objective = 0.0;
  SolveDiagnostics diag;
};

struct SolveOptions {
  double feas_tol = 1e-7;
  double psd_tol = 1e-7;
  double gap_tol = 1e-8;
  // Dual-side feasibility is held to a looser bar: on degenerate problems
  // the endgame Schur solves pollute S at roundoff scale, while every
  // downstream guarantee (Gram reconstruction, equality residuals, PSD-ness)
  // is re-checked on the primal side at extraction.
  double dual_feas_tol = 1e-5;
  int max_iterations = 250;
  // Scaled Farkas-certificate accuracy at which divergence is declared
  // infeasibility/unboundedness.
  double infeasibility_tol = 1e-9;
  bool verbose = false;
};

// Interior-point solve (NT scaling, Mehrotra predictor-corrector). Free
// variables are handled natively in the KKT system, not split.
SdpSolution solve(const SdpProblem& problem, const SolveOptions& options = {});

struct ValidateTols {
  double feas_tol = 1e-7;
  double psd_tol = 1e-7;
  double objective_tol = 1e-7;
};

struct ValidationReport {
  double max_equality_residual = 0.0;
  double min_block_eigenvalue = 0.0;
  double objective_gap = 0.0;  // |reported - recomputed|
  bool pass = false;
  std::string summary() const;
};

// Recomputes residuals from problem data only; independent of the solver.
ValidationReport validate(const SdpProblem& problem, const SdpSolution& solution,
                          const ValidateTols& tols = {});

// SDPA sparse format (.dat-s). Our problem maps to the format's dual side:
// constraint i supplies F_i, the objective supplies F_0, and the rhs vector
// becomes the format's cost line. Free variables are split into a trailing
// diagonal block holding (z+, z-) pairs.
std::string export_sdpa(const SdpProblem& problem);

// Raw contents of a .dat-s file, for round-trip checks.
struct SdpaData {
  int num_constraints = 0;
  std::vector<int> block_sizes;  // negative = diagonal block
  Eigen::VectorXd cost;
  struct Entry {
    int matno = 0;  // 0 = objective
    int block = 0;  // 1-based
    int row = 0;    // 1-based, row <= col
    int col = 0;
    double value = 0.0;
  };
  std::vector<Entry> entries;
};

SdpaData parse_sdpa(std::istream& in);
SdpaData parse_sdpa_string(const std::string& text);

}  // namespace cbc
