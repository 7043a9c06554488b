#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbc/sos_program.hpp"
#include "cbc/system.hpp"

namespace cbc {

struct MultiplierDegrees {
  int sigma = 4;    // SOS multipliers on unsafe-set inequalities
  int sigma2 = 4;   // SOS multiplier on an explicit initial set
  int lambda1 = 4;  // free, one per input-polytope row
  int lambda2 = 4;  // free, boundary invariance
  int lambda3 = 4;  // free, boundary-gap condition
  int mu = 4;       // SOS, containment condition
};

struct SynthesisConfig {
  SynthesisConfig() {
    // Synthesis SOSPs carry trace objectives whose optimal value needs no
    // precision; a relative gap of 1e-6 keeps gamma accurate to well below
    // the termination threshold.
    sos.solver.gap_tol = 1e-6;
  }

  int deg_b = 4;
  int deg_u = 3;
  MultiplierDegrees degrees;
  double epsilon = 1e-3;          // strict-negativity margin on unsafe sets
  double gamma_threshold = 1e-3;  // termination threshold (normalized scale)
  int max_iterations = 50;
  // delta <= 0 requests the halving search from 1.0 down to delta_min.
  double delta = 0.0;
  double delta_min = 1e-4;
  Eigen::MatrixXd lqr_q;  // defaults to identity when empty
  Eigen::MatrixXd lqr_r;
  bool normalize = true;  // rescale b by its max-abs coefficient each round
  Box domain;             // grid box
  std::optional<Box> sampling_box;  // unsafe-set sampling; defaults to domain
  std::uint64_t seed = 12345;
  int unsafe_samples = 10000;
  SosOptions sos;
  // When nonempty, every SOSP solved during synthesis dumps its compiled SDP
  // here as <step>.dat-s.
  std::string sdpa_dump_dir;

  const Box& sample_box() const { return sampling_box ? *sampling_box : domain; }
  void validate(const ControlAffineSystem& system) const;
};

struct LqrSeed {
  Polynomial b0;
  Eigen::MatrixXd K;  // nominal gain u = -K (x - x_eq)
  Eigen::MatrixXd P;
  double delta = 0.0;
};

// b0(x) = delta - (x - x_eq)' P (x - x_eq) from the LQR cost-to-go around
// x_eq. With delta <= 0 in the config, delta is halved from 1.0 until no
// sampled unsafe point lies in {b0 >= 0}. Requires x_eq to be holdable:
// some admissible u with f(x_eq) + g(x_eq) u = 0.
LqrSeed lqr_init(const ControlAffineSystem& system, const SemialgebraicUnion& unsafe,
                 const Eigen::VectorXd& x_eq, const SynthesisConfig& config);

// Fixed polynomials for one synthesis round.
struct FixedControllerSet {
  PolyVector u;
  std::vector<Polynomial> lambda1;  // one per input-polytope row
  Polynomial lambda2;
};

// Inputs for the general certificate-synthesis program. Exactly one of b and
// the controller set may be left free; leaving both free is bilinear and
// rejected with the offending pair named.
struct CertificateProgramInputs {
  std::optional<Polynomial> fixed_b;
  std::optional<FixedControllerSet> fixed_controller;
  X0Spec x0;
};

// The certificate-synthesis SOSP plus handles into its decision variables.
struct CertificateProgram {
  SosProgram prog;
  std::optional<PolyVarHandle> b;
  std::vector<PolyVarHandle> u;
  std::vector<PolyVarHandle> lambda1;
  PolyVarHandle lambda2;
  std::vector<std::vector<PolyVarHandle>> sigma;  // per component, per inequality
  std::optional<PolyVarHandle> sigma2;
};

CertificateProgram build_certificate_program(const ControlAffineSystem& system,
                                             const SemialgebraicUnion& unsafe,
                                             const CertificateProgramInputs& inputs,
                                             const SynthesisConfig& config);

struct InitializationResult {
  SdpStatus status = SdpStatus::kNumericalFailure;
  bool accepted = false;
  FixedControllerSet controller;
  std::vector<std::vector<Polynomial>> sigma;
  SolveDiagnostics diag;
  std::string detail;
};

// Solves the synthesis program with b fixed to recover an admissible
// controller and multipliers.
InitializationResult initialize_controller(const ControlAffineSystem& system,
                                           const SemialgebraicUnion& unsafe,
                                           const Polynomial& b0, const X0Spec& x0,
                                           const SynthesisConfig& config);

struct EnlargeResult {
  SdpStatus status = SdpStatus::kNumericalFailure;
  bool accepted = false;
  Polynomial b;
  double gamma = 0.0;
  std::vector<std::vector<Polynomial>> sigma;
  Polynomial mu;
  Polynomial lambda3;
  SolveDiagnostics diag;
  std::string detail;
};

// The enlargement SOSP plus handles into its decision variables; exposed so
// callers can compile, export, or cross-validate the same program that
// enlarge_step solves.
struct EnlargementProgram {
  SosProgram prog;
  PolyVarHandle b;
  std::vector<std::vector<PolyVarHandle>> sigma;
  PolyVarHandle mu;
  PolyVarHandle lambda3;
  PolyVarHandle gamma;
};

EnlargementProgram build_enlargement_program(const Polynomial& b_prev,
                                             const FixedControllerSet& fixed,
                                             const ControlAffineSystem& system,
                                             const SemialgebraicUnion& unsafe,
                                             const SynthesisConfig& config);

// One safe-set enlargement round: maximizes the boundary gap gamma over
// certificates b constrained to contain {b_prev >= 0}, with the controller
// and its multipliers held fixed.
EnlargeResult enlarge_step(const Polynomial& b_prev, const FixedControllerSet& fixed,
                           const ControlAffineSystem& system, const SemialgebraicUnion& unsafe,
                           const SynthesisConfig& config);

struct RefineResult {
  SdpStatus status = SdpStatus::kNumericalFailure;
  bool accepted = false;
  FixedControllerSet controller;
  SolveDiagnostics diag;
  std::string detail;
};

// Re-solves for the controller and multipliers with b fixed.
RefineResult refine_step(const Polynomial& b, const ControlAffineSystem& system,
                         const SynthesisConfig& config);

enum class SynthesisStatus { kConverged, kMaxIterations, kInfeasible };

std::string to_string(SynthesisStatus status);

struct IterationRecord {
  int k = 0;
  std::string step;    // "init" | "enlarge" | "refine"
  std::string status;  // solver status string
  double gamma = 0.0;
  int solver_iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  double wall_time_s = 0.0;
};

struct CbcCertificate {
  Polynomial b;
  PolyVector u;
  std::vector<Polynomial> lambda1;
  Polynomial lambda2;
  std::vector<std::vector<Polynomial>> sigma;
  Polynomial mu;
  Polynomial lambda3;
  std::vector<double> gamma_history;     // accepted enlargement gaps
  std::vector<Polynomial> b_iterates;    // b0 and every accepted enlargement
  SynthesisStatus status = SynthesisStatus::kInfeasible;
  int fail_iteration = -1;  // iteration of the terminating failure, if any
  std::string detail;
  Eigen::MatrixXd K;
  double delta = 0.0;
  std::vector<IterationRecord> log;
};

// Full alternation loop: LQR seeding, controller initialization, then
// enlarge / refine rounds until the gap drops below the threshold, a step
// goes infeasible, or the iteration cap is hit. The last accepted iterate is
// always returned.
CbcCertificate synthesize(const ControlAffineSystem& system, const SemialgebraicUnion& unsafe,
                          const Eigen::VectorXd& x_eq, const SynthesisConfig& config);

// Rescales b by its largest absolute coefficient.
Polynomial normalize_certificate(const Polynomial& b);

}  // namespace cbc
