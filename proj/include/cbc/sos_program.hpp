#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbc/polynomial.hpp"
#include "cbc/sdp.hpp"

namespace cbc {

class SosProgram;

// Scalar affine form: constant + sum of weights over decision coefficients.
struct AffineScalar {
  double constant = 0.0;
  std::map<int, double> linear;

  bool has_decision() const { return !linear.empty(); }
  void add(double c) { constant += c; }
  void add_linear(int var, double w);
  void scale(double s);
};

// Thrown when a product would be quadratic in decision coefficients.
struct BilinearError : std::invalid_argument {
  BilinearError(const std::string& a, const std::string& b)
      : std::invalid_argument("bilinear product of decision polynomials '" + a + "' and '" + b +
                              "'"),
        lhs(a),
        rhs(b) {}
  std::string lhs, rhs;
};

// Polynomial whose coefficients are affine in the decision coefficients of
// one SosProgram. Products of two decision-bearing expressions throw
// BilinearError at construction.
class PolyExpr {
 public:
  using TermMap = std::map<Monomial, AffineScalar, GradedLexLess>;

  PolyExpr() = default;
  PolyExpr(const Polynomial& fixed);  // NOLINT: implicit by design
  PolyExpr(int nvars, double constant);

  int nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  bool has_decision() const;
  // Max total degree over stored monomials; -1 when empty.
  int degree() const;

  PolyExpr& operator+=(const PolyExpr& other);
  PolyExpr& operator-=(const PolyExpr& other);
  PolyExpr& operator*=(double s);

  // Substitutes concrete values for the decision coefficients.
  Polynomial at_solution(const Eigen::VectorXd& coeff_values) const;

  friend PolyExpr operator+(PolyExpr a, const PolyExpr& b) { return a += b; }
  friend PolyExpr operator-(PolyExpr a, const PolyExpr& b) { return a -= b; }
  friend PolyExpr operator-(PolyExpr a) { return a *= -1.0; }
  friend PolyExpr operator*(PolyExpr a, double s) { return a *= s; }
  friend PolyExpr operator*(double s, PolyExpr a) { return a *= s; }
  friend PolyExpr operator*(const PolyExpr& a, const PolyExpr& b);
  friend PolyExpr differentiate(const PolyExpr& e, int var_index);

 private:
  friend class SosProgram;
  std::string describe_first_decision() const;

  int nvars_ = 0;
  const SosProgram* prog_ = nullptr;
  TermMap terms_;
};

struct PolyVarHandle {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// PSD Gram factor certifying one SOS constraint: p = Z' Q Z on basis Z.
struct GramCertificate {
  std::vector<Monomial> basis;
  Eigen::MatrixXd Q;
  double min_eigenvalue = 0.0;
  double reconstruction_residual = 0.0;
};

struct SosSolution {
  SdpStatus status = SdpStatus::kNumericalFailure;
  // True only for optimal solves whose every Gram certificate reconstructs
  // within tolerance.
  bool accepted = false;
  std::vector<Polynomial> poly_values;          // indexed by PolyVarHandle::id
  double objective = 0.0;
  std::vector<GramCertificate> certificates;    // indexed by SOS-constraint id
  SolveDiagnostics diag;
  std::string rejection;
};

struct SosOptions {
  SolveOptions solver;
  double recon_tol = 1e-6;
  double psd_tol = 1e-7;
  // When nonempty, solve() writes the compiled SDP there in SDPA sparse form.
  std::string dump_path;
};

// Declarative SOS program: polynomial decision variables, SOS membership
// constraints affine in the decision coefficients, and an optional linear
// objective (maximize one scalar variable).
class SosProgram {
 public:
  explicit SosProgram(int nvars) : nvars_(nvars) {}

  // Fresh decision polynomial with a full coefficient basis of the given
  // degree. Scalars are degree-0 polynomial variables.
  PolyVarHandle add_poly_var(const std::string& name, int degree);
  PolyVarHandle add_scalar_var(const std::string& name) { return add_poly_var(name, 0); }

  PolyExpr expr(PolyVarHandle h) const;
  // Registers expr as a member of Sigma[x]; one Gram block at compile time.
  int add_sos_constraint(PolyExpr e, std::string label = "");
  // Documents that a decision polynomial ranges over all of R[x]; adds no
  // constraint or Gram block.
  void note_free(PolyVarHandle h);

  void maximize(PolyVarHandle scalar);

  // Adds -weight * sum of Gram traces to the objective. Free polynomial
  // multipliers admit scale rays (shifting a multiplier by a copy of the
  // certificate only adds a square to the expression), so feasibility
  // programs use weight 1 to select a minimum-trace certificate and
  // maximization programs use a tiny weight to keep the optimal face
  // bounded.
  void set_gram_trace_penalty(double weight) { trace_penalty_ = weight; }

  int nvars() const { return nvars_; }
  int num_poly_vars() const { return static_cast<int>(vars_.size()); }
  int num_coeff_vars() const { return next_coeff_; }
  int num_sos_constraints() const { return static_cast<int>(constraints_.size()); }
  const std::string& var_name(PolyVarHandle h) const { return vars_.at(h.id).name; }
  int var_degree(PolyVarHandle h) const { return vars_.at(h.id).degree; }
  // Name of the polynomial variable owning a coefficient index.
  std::string coeff_owner(int coeff_var) const;
  const std::string& constraint_label(int id) const { return constraints_.at(id).label; }

  SdpProblem compile() const;
  SosSolution extract(const SdpSolution& sdp, const SosOptions& opts = {}) const;
  // compile + solve + extract.
  SosSolution solve(const SosOptions& opts = {}) const;

 private:
  // Maps every referenced coefficient to a compact SDP free-variable index;
  // unreferenced coefficients map to -1 and are fixed to zero.
  std::pair<std::vector<int>, int> coeff_remap() const;

  struct VarInfo {
    std::string name;
    int degree = 0;
    int first_coeff = 0;
    std::vector<Monomial> basis;
  };
  struct ConstraintInfo {
    PolyExpr expr;
    std::string label;
    int gram_degree = 0;
  };

  int nvars_;
  int next_coeff_ = 0;
  std::vector<VarInfo> vars_;
  std::vector<ConstraintInfo> constraints_;
  std::vector<int> free_notes_;
  int objective_var_ = -1;  // poly-var id of the maximized scalar
  double trace_penalty_ = 0.0;
};

struct CheckSosResult {
  SdpStatus status = SdpStatus::kNumericalFailure;
  bool feasible = false;
  std::optional<GramCertificate> certificate;
};

// Is p a sum of squares? Solver failures surface as a distinct status, never
// as infeasibility.
CheckSosResult check_sos(const Polynomial& p, const SosOptions& opts = {});

}  // namespace cbc
