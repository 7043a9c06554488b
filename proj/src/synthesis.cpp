#include "cbc/synthesis.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "cbc/care.hpp"
#include "cbc/linprog.hpp"

namespace cbc {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

// Rejection-samples points of one unsafe component inside the box.
std::vector<Eigen::VectorXd> sample_component(std::mt19937_64& rng,
                                              const std::vector<Polynomial>& component,
                                              const Box& box, int n) {
  std::vector<Eigen::VectorXd> points;
  points.reserve(n);
  const int dim = box.dim();
  std::int64_t draws = 0;
  Eigen::VectorXd x(dim);
  while (static_cast<int>(points.size()) < n) {
    if (draws >= 1000000 && static_cast<double>(points.size()) < 1e-4 * draws) break;
    ++draws;
    for (int i = 0; i < dim; ++i) x[i] = uniform(rng, box.lo(i), box.hi(i));
    bool inside = true;
    for (const Polynomial& s : component) {
      if (s.evaluate(x) >= 0.0) {
        inside = false;
        break;
      }
    }
    if (inside) points.push_back(x);
  }
  return points;
}

Polynomial quadratic_form(const Eigen::MatrixXd& P, const Eigen::VectorXd& center) {
  const int n = static_cast<int>(P.rows());
  std::vector<Polynomial> shifted;
  shifted.reserve(n);
  for (int i = 0; i < n; ++i) {
    shifted.push_back(Polynomial::variable(n, i) - center[i]);
  }
  Polynomial out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (P(i, j) != 0.0) out += P(i, j) * (shifted[i] * shifted[j]);
    }
  }
  return out;
}

std::chrono::steady_clock::time_point now() { return std::chrono::steady_clock::now(); }

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(now() - t0).count();
}

IterationRecord make_record(int k, const std::string& step, SdpStatus status, double gamma,
                            const SolveDiagnostics& diag, double wall) {
  IterationRecord rec;
  rec.k = k;
  rec.step = step;
  rec.status = to_string(status);
  rec.gamma = gamma;
  rec.solver_iterations = diag.iterations;
  rec.primal_residual = diag.primal_residual;
  rec.dual_residual = diag.dual_residual;
  rec.duality_gap = diag.duality_gap;
  rec.wall_time_s = wall;
  return rec;
}

// Accept optimal solves outright; accept marginal ones only when the
// certificates still reconstruct at 10x looser tolerances.
bool accept_solution(const SosSolution& sol, const SosOptions& opts) {
  if (sol.status != SdpStatus::kOptimal) return false;
  if (sol.accepted) return true;
  if (!sol.diag.marginal) return false;
  for (const GramCertificate& cert : sol.certificates) {
    if (cert.reconstruction_residual > 10.0 * opts.recon_tol) return false;
    if (cert.min_eigenvalue < -10.0 * opts.psd_tol) return false;
  }
  return true;
}

}  // namespace

void SynthesisConfig::validate(const ControlAffineSystem& system) const {
  if (deg_b < 0 || deg_u < 0 || degrees.sigma < 0 || degrees.lambda1 < 0 ||
      degrees.lambda2 < 0 || degrees.lambda3 < 0 || degrees.mu < 0) {
    throw std::invalid_argument("config: degrees must be >= 0");
  }
  if (epsilon <= 0) throw std::invalid_argument("config: epsilon must be > 0");
  if (gamma_threshold <= 0) throw std::invalid_argument("config: gamma_threshold must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("config: max_iterations must be >= 1");
  domain.validate();
  if (domain.dim() != system.nx) {
    throw std::invalid_argument("config: domain box dimension != nx");
  }
  if (sampling_box) {
    sampling_box->validate();
    if (sampling_box->dim() != system.nx) {
      throw std::invalid_argument("config: sampling box dimension != nx");
    }
  }
}

Polynomial normalize_certificate(const Polynomial& b) {
  const double m = b.max_abs_coeff();
  if (m == 0.0) return b;
  return (1.0 / m) * b;
}

LqrSeed lqr_init(const ControlAffineSystem& system, const SemialgebraicUnion& unsafe,
                 const Eigen::VectorXd& x_eq, const SynthesisConfig& config) {
  system.validate();
  unsafe.validate(system.nx);
  if (x_eq.size() != system.nx) throw std::invalid_argument("lqr_init: x_eq dimension != nx");

  // x_eq must be holdable by an admissible input: min over u in U of
  // ||f(x_eq) + g(x_eq) u||_inf solved as an LP with a bound variable.
  const Eigen::VectorXd f0 = system.f.evaluate(x_eq);
  const Eigen::MatrixXd g0 = system.g.evaluate(x_eq);
  {
    const int nu = system.nu;
    const int tau = system.num_input_rows();
    // Variables (u, t): maximize -t s.t. +-(f0 + g0 u) <= t, -Au u <= cu.
    Eigen::MatrixXd A(2 * system.nx + tau, nu + 1);
    Eigen::VectorXd rhs(2 * system.nx + tau);
    A.setZero();
    for (int i = 0; i < system.nx; ++i) {
      A.block(i, 0, 1, nu) = g0.row(i);
      A(i, nu) = -1.0;
      rhs[i] = -f0[i];
      A.block(system.nx + i, 0, 1, nu) = -g0.row(i);
      A(system.nx + i, nu) = -1.0;
      rhs[system.nx + i] = f0[i];
    }
    A.block(2 * system.nx, 0, tau, nu) = -system.Au;
    rhs.segment(2 * system.nx, tau) = system.cu;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nu + 1);
    c[nu] = -1.0;
    const LpResult lp = lp_maximize(c, A, rhs);
    if (lp.status != LpStatus::kOptimal || -lp.value > 1e-8) {
      throw std::invalid_argument("lqr_init: x_eq is not an admissible equilibrium");
    }
  }

  const Eigen::MatrixXd A = jacobian_at(system.f, x_eq);
  Eigen::MatrixXd B = system.g.evaluate(x_eq);
  const Eigen::MatrixXd Q = config.lqr_q.size() > 0
                                ? config.lqr_q
                                : Eigen::MatrixXd::Identity(system.nx, system.nx);
  const Eigen::MatrixXd R = config.lqr_r.size() > 0
                                ? config.lqr_r
                                : Eigen::MatrixXd::Identity(system.nu, system.nu);
  LqrSeed seed;
  seed.P = care_solve(A, B, Q, R);
  seed.K = lqr_gain(B, R, seed.P);

  const Polynomial v0 = quadratic_form(seed.P, x_eq);
  if (config.delta > 0) {
    seed.delta = config.delta;
    seed.b0 = config.delta - v0;
    return seed;
  }

  // Halving search: shrink the seed set until it excludes every sampled
  // unsafe point.
  std::mt19937_64 rng(config.seed);
  std::vector<std::vector<Eigen::VectorXd>> samples;
  for (const auto& component : unsafe.components) {
    samples.push_back(
        sample_component(rng, component, config.sample_box(), config.unsafe_samples));
  }
  double delta = 1.0;
  while (delta >= config.delta_min) {
    bool separated = true;
    for (const auto& pts : samples) {
      for (const auto& x : pts) {
        if (delta - v0.evaluate(x) >= 0.0) {
          separated = false;
          break;
        }
      }
      if (!separated) break;
    }
    if (separated) {
      seed.delta = delta;
      seed.b0 = delta - v0;
      return seed;
    }
    delta *= 0.5;
  }
  throw std::runtime_error(
      "lqr_init: no delta >= delta_min separates the seed set from unsafe samples");
}

CertificateProgram build_certificate_program(const ControlAffineSystem& system,
                                             const SemialgebraicUnion& unsafe,
                                             const CertificateProgramInputs& inputs,
                                             const SynthesisConfig& config) {
  system.validate();
  unsafe.validate(system.nx);
  const int nx = system.nx;
  const int nu = system.nu;
  const int tau = system.num_input_rows();

  CertificateProgram out{SosProgram(nx), {}, {}, {}, {}, {}, {}};
  SosProgram& prog = out.prog;

  // b: fixed polynomial or decision variable.
  PolyExpr b_expr;
  if (inputs.fixed_b) {
    if (inputs.fixed_b->nvars() != nx) {
      throw std::invalid_argument("certificate program: fixed b has wrong variable count");
    }
    b_expr = PolyExpr(*inputs.fixed_b);
  } else {
    out.b = prog.add_poly_var("b", config.deg_b);
    b_expr = prog.expr(*out.b);
  }

  // Controller and input/invariance multipliers: fixed set or decision vars.
  std::vector<PolyExpr> u_expr(nu);
  std::vector<PolyExpr> lambda1_expr(tau);
  PolyExpr lambda2_expr;
  if (inputs.fixed_controller) {
    const FixedControllerSet& fc = *inputs.fixed_controller;
    if (fc.u.size() != nu || static_cast<int>(fc.lambda1.size()) != tau) {
      throw std::invalid_argument("certificate program: fixed controller has wrong dimensions");
    }
    for (int j = 0; j < nu; ++j) u_expr[j] = PolyExpr(fc.u[j]);
    for (int r = 0; r < tau; ++r) lambda1_expr[r] = PolyExpr(fc.lambda1[r]);
    lambda2_expr = PolyExpr(fc.lambda2);
  } else {
    for (int j = 0; j < nu; ++j) {
      out.u.push_back(prog.add_poly_var("u" + std::to_string(j + 1), config.deg_u));
      u_expr[j] = prog.expr(out.u.back());
      prog.note_free(out.u.back());
    }
    for (int r = 0; r < tau; ++r) {
      out.lambda1.push_back(prog.add_poly_var("lambda1_" + std::to_string(r + 1),
                                              config.degrees.lambda1));
      lambda1_expr[r] = prog.expr(out.lambda1.back());
      prog.note_free(out.lambda1.back());
    }
    out.lambda2 = prog.add_poly_var("lambda2", config.degrees.lambda2);
    lambda2_expr = prog.expr(out.lambda2);
    prog.note_free(out.lambda2);
  }

  // Unsafe exclusion with SOS multipliers, one per inequality.
  for (int i = 0; i < unsafe.num_components(); ++i) {
    PolyExpr expr = -b_expr - PolyExpr(nx, config.epsilon);
    std::vector<PolyVarHandle> sigmas;
    for (std::size_t j = 0; j < unsafe.components[i].size(); ++j) {
      const PolyVarHandle sigma = prog.add_poly_var(
          "sigma_" + std::to_string(i + 1) + "_" + std::to_string(j + 1), config.degrees.sigma);
      prog.add_sos_constraint(prog.expr(sigma), prog.var_name(sigma) + " in Sigma");
      expr += prog.expr(sigma) * PolyExpr(unsafe.components[i][j]);
      sigmas.push_back(sigma);
    }
    prog.add_sos_constraint(std::move(expr), "unsafe exclusion " + std::to_string(i + 1));
    out.sigma.push_back(std::move(sigmas));
  }

  // Initial-set containment when an explicit phi is given.
  if (inputs.x0.explicit_phi()) {
    if (inputs.x0.phi->nvars() != nx) {
      throw std::invalid_argument("certificate program: phi has wrong variable count");
    }
    out.sigma2 = prog.add_poly_var("sigma2", config.degrees.sigma2);
    prog.add_sos_constraint(prog.expr(*out.sigma2), "sigma2 in Sigma");
    prog.add_sos_constraint(b_expr - prog.expr(*out.sigma2) * PolyExpr(*inputs.x0.phi),
                            "initial-set containment");
  }

  // Admissible inputs on the zero level set, row by row.
  for (int r = 0; r < tau; ++r) {
    PolyExpr row(nx, system.cu[r]);
    for (int j = 0; j < nu; ++j) {
      if (system.Au(r, j) != 0.0) row += system.Au(r, j) * u_expr[j];
    }
    row -= lambda1_expr[r] * b_expr;
    prog.add_sos_constraint(std::move(row), "input row " + std::to_string(r + 1));
  }

  // Boundary invariance: grad(b) . (f + g u) - lambda2 b.
  PolyExpr lie;
  for (int i = 0; i < nx; ++i) {
    const PolyExpr dbi = differentiate(b_expr, i);
    PolyExpr flow(system.f[i]);
    for (int j = 0; j < nu; ++j) {
      flow += PolyExpr(system.g(i, j)) * u_expr[j];
    }
    lie += dbi * flow;
  }
  lie -= lambda2_expr * b_expr;
  prog.add_sos_constraint(std::move(lie), "boundary invariance");

  return out;
}

InitializationResult initialize_controller(const ControlAffineSystem& system,
                                           const SemialgebraicUnion& unsafe,
                                           const Polynomial& b0, const X0Spec& x0,
                                           const SynthesisConfig& config) {
  CertificateProgramInputs inputs;
  inputs.fixed_b = b0;
  inputs.x0 = x0;
  CertificateProgram t2 = build_certificate_program(system, unsafe, inputs, config);

  InitializationResult out;
  t2.prog.set_gram_trace_penalty(1.0);  // select a minimum-trace certificate
  const SosSolution sol = t2.prog.solve(config.sos);
  out.status = sol.status;
  out.diag = sol.diag;
  out.detail = sol.rejection.empty() ? sol.diag.message : sol.rejection;
  if (!accept_solution(sol, config.sos)) return out;

  out.accepted = true;
  std::vector<Polynomial> u_polys;
  for (const PolyVarHandle& h : t2.u) u_polys.push_back(truncate(sol.poly_values[h.id]));
  out.controller.u = PolyVector(std::move(u_polys));
  for (const PolyVarHandle& h : t2.lambda1) {
    out.controller.lambda1.push_back(truncate(sol.poly_values[h.id]));
  }
  out.controller.lambda2 = truncate(sol.poly_values[t2.lambda2.id]);
  for (const auto& component : t2.sigma) {
    std::vector<Polynomial> sigmas;
    for (const PolyVarHandle& h : component) sigmas.push_back(truncate(sol.poly_values[h.id]));
    out.sigma.push_back(std::move(sigmas));
  }
  return out;
}

EnlargementProgram build_enlargement_program(const Polynomial& b_prev,
                                             const FixedControllerSet& fixed,
                                             const ControlAffineSystem& system,
                                             const SemialgebraicUnion& unsafe,
                                             const SynthesisConfig& config) {
  const int nx = system.nx;
  const int nu = system.nu;
  const int tau = system.num_input_rows();
  if (fixed.u.size() != nu || static_cast<int>(fixed.lambda1.size()) != tau) {
    throw std::invalid_argument("enlarge_step: fixed controller has wrong dimensions");
  }

  EnlargementProgram out{SosProgram(nx), {}, {}, {}, {}, {}};
  SosProgram& prog = out.prog;
  out.b = prog.add_poly_var("b", config.deg_b);
  const PolyExpr b_expr = prog.expr(out.b);
  const PolyExpr bprev_expr{b_prev};

  // Unsafe exclusion.
  for (int i = 0; i < unsafe.num_components(); ++i) {
    PolyExpr expr = -b_expr - PolyExpr(nx, config.epsilon);
    std::vector<PolyVarHandle> sigmas;
    for (std::size_t j = 0; j < unsafe.components[i].size(); ++j) {
      const PolyVarHandle sigma = prog.add_poly_var(
          "sigma_" + std::to_string(i + 1) + "_" + std::to_string(j + 1), config.degrees.sigma);
      prog.add_sos_constraint(prog.expr(sigma), prog.var_name(sigma) + " in Sigma");
      expr += prog.expr(sigma) * PolyExpr(unsafe.components[i][j]);
      sigmas.push_back(sigma);
    }
    prog.add_sos_constraint(std::move(expr), "unsafe exclusion " + std::to_string(i + 1));
    out.sigma.push_back(std::move(sigmas));
  }

  // Containment of the previous safe set: b - mu b_prev, mu SOS.
  out.mu = prog.add_poly_var("mu", config.degrees.mu);
  prog.add_sos_constraint(prog.expr(out.mu), "mu in Sigma");
  prog.add_sos_constraint(b_expr - prog.expr(out.mu) * bprev_expr, "containment");

  // Input rows with the previous round's multipliers.
  for (int r = 0; r < tau; ++r) {
    PolyExpr row(nx, system.cu[r]);
    for (int j = 0; j < nu; ++j) {
      if (system.Au(r, j) != 0.0) row += system.Au(r, j) * PolyExpr(fixed.u[j]);
    }
    row -= PolyExpr(fixed.lambda1[r]) * b_expr;
    prog.add_sos_constraint(std::move(row), "input row " + std::to_string(r + 1));
  }

  // Boundary invariance under the fixed controller.
  PolyExpr lie;
  for (int i = 0; i < nx; ++i) {
    Polynomial flow = system.f[i];
    for (int j = 0; j < nu; ++j) flow += system.g(i, j) * fixed.u[j];
    lie += differentiate(b_expr, i) * PolyExpr(flow);
  }
  lie -= PolyExpr(fixed.lambda2) * b_expr;
  prog.add_sos_constraint(std::move(lie), "boundary invariance");

  // Boundary gap: b - lambda3 b_prev - gamma, lambda3 free, gamma maximized.
  out.lambda3 = prog.add_poly_var("lambda3", config.degrees.lambda3);
  prog.note_free(out.lambda3);
  out.gamma = prog.add_scalar_var("gamma");
  prog.add_sos_constraint(prog.expr(out.gamma), "gamma >= 0");
  prog.add_sos_constraint(b_expr - prog.expr(out.lambda3) * bprev_expr - prog.expr(out.gamma),
                          "boundary gap");
  prog.maximize(out.gamma);
  prog.set_gram_trace_penalty(1e-6);  // keeps the free-multiplier face bounded
  return out;
}

EnlargeResult enlarge_step(const Polynomial& b_prev, const FixedControllerSet& fixed,
                           const ControlAffineSystem& system, const SemialgebraicUnion& unsafe,
                           const SynthesisConfig& config) {
  const EnlargementProgram ep =
      build_enlargement_program(b_prev, fixed, system, unsafe, config);

  EnlargeResult out;
  const SosSolution sol = ep.prog.solve(config.sos);
  out.status = sol.status;
  out.diag = sol.diag;
  out.detail = sol.rejection.empty() ? sol.diag.message : sol.rejection;
  if (!accept_solution(sol, config.sos)) return out;

  out.accepted = true;
  out.b = truncate(sol.poly_values[ep.b.id]);
  out.gamma = sol.objective;
  out.mu = truncate(sol.poly_values[ep.mu.id]);
  out.lambda3 = truncate(sol.poly_values[ep.lambda3.id]);
  for (const auto& component : ep.sigma) {
    std::vector<Polynomial> sigmas;
    for (const PolyVarHandle& h : component) sigmas.push_back(truncate(sol.poly_values[h.id]));
    out.sigma.push_back(std::move(sigmas));
  }
  return out;
}

RefineResult refine_step(const Polynomial& b, const ControlAffineSystem& system,
                         const SynthesisConfig& config) {
  const int nx = system.nx;
  const int nu = system.nu;
  const int tau = system.num_input_rows();

  SosProgram prog(nx);
  const PolyExpr b_expr{b};
  std::vector<PolyVarHandle> u_handles;
  std::vector<PolyVarHandle> lambda1_handles;
  for (int j = 0; j < nu; ++j) {
    u_handles.push_back(prog.add_poly_var("u" + std::to_string(j + 1), config.deg_u));
    prog.note_free(u_handles.back());
  }
  for (int r = 0; r < tau; ++r) {
    lambda1_handles.push_back(
        prog.add_poly_var("lambda1_" + std::to_string(r + 1), config.degrees.lambda1));
    prog.note_free(lambda1_handles.back());
  }
  const PolyVarHandle lambda2 = prog.add_poly_var("lambda2", config.degrees.lambda2);
  prog.note_free(lambda2);

  for (int r = 0; r < tau; ++r) {
    PolyExpr row(nx, system.cu[r]);
    for (int j = 0; j < nu; ++j) {
      if (system.Au(r, j) != 0.0) row += system.Au(r, j) * prog.expr(u_handles[j]);
    }
    row -= prog.expr(lambda1_handles[r]) * b_expr;
    prog.add_sos_constraint(std::move(row), "input row " + std::to_string(r + 1));
  }
  PolyExpr lie;
  for (int i = 0; i < nx; ++i) {
    const Polynomial dbi = differentiate(b, i);
    if (dbi.is_zero()) continue;
    PolyExpr flow{system.f[i]};
    for (int j = 0; j < nu; ++j) {
      flow += PolyExpr(system.g(i, j)) * prog.expr(u_handles[j]);
    }
    lie += PolyExpr(dbi) * flow;
  }
  lie -= prog.expr(lambda2) * b_expr;
  prog.add_sos_constraint(std::move(lie), "boundary invariance");

  RefineResult out;
  prog.set_gram_trace_penalty(1.0);
  const SosSolution sol = prog.solve(config.sos);
  out.status = sol.status;
  out.diag = sol.diag;
  out.detail = sol.rejection.empty() ? sol.diag.message : sol.rejection;
  if (!accept_solution(sol, config.sos)) return out;

  out.accepted = true;
  std::vector<Polynomial> u_polys;
  for (const PolyVarHandle& h : u_handles) u_polys.push_back(truncate(sol.poly_values[h.id]));
  out.controller.u = PolyVector(std::move(u_polys));
  for (const PolyVarHandle& h : lambda1_handles) {
    out.controller.lambda1.push_back(truncate(sol.poly_values[h.id]));
  }
  out.controller.lambda2 = truncate(sol.poly_values[lambda2.id]);
  return out;
}

std::string to_string(SynthesisStatus status) {
  switch (status) {
    case SynthesisStatus::kConverged: return "converged";
    case SynthesisStatus::kMaxIterations: return "max_iterations";
    case SynthesisStatus::kInfeasible: return "infeasible";
  }
  return "unknown";
}

CbcCertificate synthesize(const ControlAffineSystem& system, const SemialgebraicUnion& unsafe,
                          const Eigen::VectorXd& x_eq, const SynthesisConfig& config) {
  config.validate(system);
  CbcCertificate cert;

  const auto t0 = now();
  LqrSeed seed = lqr_init(system, unsafe, x_eq, config);
  cert.K = seed.K;

  // Controller initialization with b fixed to the seed. In auto-delta mode a
  // seed set too large for the input bounds shows up here as infeasibility;
  // halve and retry.
  const Polynomial v0 = seed.delta - seed.b0;  // the LQR cost-to-go quadratic
  SynthesisConfig step_config = config;
  InitializationResult init;
  while (true) {
    cert.delta = seed.delta;
    cert.b = config.normalize ? normalize_certificate(seed.b0) : seed.b0;
    if (!config.sdpa_dump_dir.empty()) {
      step_config.sos.dump_path = config.sdpa_dump_dir + "/init.dat-s";
    }
    init = initialize_controller(system, unsafe, cert.b, X0Spec{}, step_config);
    cert.log.push_back(make_record(0, "init", init.status, 0.0, init.diag, seconds_since(t0)));
    if (init.accepted || config.delta > 0 || seed.delta * 0.5 < config.delta_min) break;
    seed.delta *= 0.5;
    seed.b0 = seed.delta - v0;
  }
  if (!init.accepted) {
    cert.status = SynthesisStatus::kInfeasible;
    cert.fail_iteration = 0;
    cert.detail = "controller initialization failed: " + init.detail;
    return cert;
  }
  cert.b_iterates.clear();
  cert.b_iterates.push_back(cert.b);
  cert.u = init.controller.u;
  cert.lambda1 = init.controller.lambda1;
  cert.lambda2 = init.controller.lambda2;
  cert.sigma = init.sigma;

  FixedControllerSet controller = init.controller;
  cert.status = SynthesisStatus::kMaxIterations;
  for (int k = 1; k <= config.max_iterations; ++k) {
    Polynomial b_prev = config.normalize ? normalize_certificate(cert.b) : cert.b;

    const auto te = now();
    if (!config.sdpa_dump_dir.empty()) {
      step_config.sos.dump_path =
          config.sdpa_dump_dir + "/enlarge_" + std::to_string(k) + ".dat-s";
    }
    const EnlargeResult enlarged = enlarge_step(b_prev, controller, system, unsafe, step_config);
    cert.log.push_back(make_record(k, "enlarge", enlarged.status, enlarged.gamma, enlarged.diag,
                                   seconds_since(te)));
    if (!enlarged.accepted) {
      cert.status = SynthesisStatus::kInfeasible;
      cert.fail_iteration = k;
      cert.detail = "enlargement failed at iteration " + std::to_string(k) + ": " +
                    enlarged.detail;
      break;
    }
    cert.b = enlarged.b;
    cert.sigma = enlarged.sigma;
    cert.mu = enlarged.mu;
    cert.lambda3 = enlarged.lambda3;
    cert.gamma_history.push_back(enlarged.gamma);
    cert.b_iterates.push_back(cert.b);

    if (enlarged.gamma <= config.gamma_threshold) {
      cert.status = SynthesisStatus::kConverged;
      break;
    }

    const auto tr = now();
    if (!config.sdpa_dump_dir.empty()) {
      step_config.sos.dump_path =
          config.sdpa_dump_dir + "/refine_" + std::to_string(k) + ".dat-s";
    }
    const RefineResult refined = refine_step(cert.b, system, step_config);
    cert.log.push_back(
        make_record(k, "refine", refined.status, 0.0, refined.diag, seconds_since(tr)));
    if (!refined.accepted) {
      // The enlarged certificate is still valid under the previous
      // controller; report where the alternation stopped.
      cert.status = SynthesisStatus::kInfeasible;
      cert.fail_iteration = k;
      cert.detail = "refinement failed at iteration " + std::to_string(k) + ": " +
                    refined.detail;
      break;
    }
    controller = refined.controller;
    cert.u = controller.u;
    cert.lambda1 = controller.lambda1;
    cert.lambda2 = controller.lambda2;
  }
  return cert;
}

}  // namespace cbc
