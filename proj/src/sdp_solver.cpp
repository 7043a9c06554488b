#include "cbc/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <vector>

namespace cbc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-constraint view of the entries living in one block.
struct BlockEntry {
  int row, col;
  double value;
};

struct BlockTouch {
  int constraint;
  std::vector<BlockEntry> entries;
};

struct Workspace {
  // Scaled problem data, minimization form.
  std::vector<int> sizes;
  std::vector<Eigen::MatrixXd> C;                // per block
  Eigen::VectorXd q;                             // free objective
  Eigen::VectorXd b;                             // rhs
  Eigen::MatrixXd P;                             // m x nf free-part coefficients
  std::vector<std::vector<BlockTouch>> touch;    // per block
  std::vector<double> row_scale;
  double obj_scale = 1.0;
  int m = 0;
  int nf = 0;
  int nu = 0;  // total PSD dimension
};

double sparse_inner(const std::vector<BlockEntry>& entries, const Eigen::MatrixXd& M) {
  double acc = 0.0;
  for (const auto& e : entries) {
    acc += e.row == e.col ? e.value * M(e.row, e.col) : 2.0 * e.value * M(e.row, e.col);
  }
  return acc;
}

Eigen::MatrixXd dense_from_entries(int n, const std::vector<BlockEntry>& entries) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : entries) {
    A(e.row, e.col) += e.value;
    if (e.row != e.col) A(e.col, e.row) += e.value;
  }
  return A;
}

// Symmetric PSD matrix power via eigendecomposition, clamping tiny negative
// eigenvalues that arise from roundoff.
Eigen::MatrixXd sym_pow(const Eigen::MatrixXd& A, double p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  Eigen::VectorXd d = es.eigenvalues();
  for (int i = 0; i < d.size(); ++i) d[i] = std::pow(std::max(d[i], 1e-300), p);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

// Largest alpha with X + alpha*dX >= 0, given Xihalf = X^{-1/2}.
double max_step(const Eigen::MatrixXd& Xihalf, const Eigen::MatrixXd& dX) {
  const Eigen::MatrixXd Y = Xihalf * dX * Xihalf;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Y + Y.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return kInf;
  return -1.0 / lmin;
}

struct Iterate {
  std::vector<Eigen::MatrixXd> X, S;
  Eigen::VectorXd y, z;
};

struct ResidualSet {
  Eigen::VectorXd rp;                 // b - A(X) - Pz
  std::vector<Eigen::MatrixXd> Rd;    // C - S - A*(y)
  Eigen::VectorXd rq;                 // q - P'y
  double pres = 0.0, dres = 0.0, gap = 0.0, mu = 0.0;
  double pobj = 0.0, dobj = 0.0;
};

ResidualSet compute_residuals(const Workspace& w, const Iterate& it) {
  ResidualSet r;
  r.rp = w.b;
  if (w.nf > 0) r.rp -= w.P * it.z;
  r.Rd.resize(w.sizes.size());
  double xs = 0.0, cnorm = 0.0, rdnorm = 0.0, astar_norm = 0.0;
  for (std::size_t blk = 0; blk < w.sizes.size(); ++blk) {
    Eigen::MatrixXd Astar = Eigen::MatrixXd::Zero(w.sizes[blk], w.sizes[blk]);
    for (const auto& t : w.touch[blk]) {
      r.rp[t.constraint] -= sparse_inner(t.entries, it.X[blk]);
      const double yi = it.y[t.constraint];
      if (yi != 0.0) {
        for (const auto& e : t.entries) {
          Astar(e.row, e.col) += yi * e.value;
          if (e.row != e.col) Astar(e.col, e.row) += yi * e.value;
        }
      }
    }
    r.Rd[blk] = w.C[blk] - it.S[blk] - Astar;
    xs += it.X[blk].cwiseProduct(it.S[blk]).sum();
    cnorm += w.C[blk].squaredNorm();
    rdnorm += r.Rd[blk].squaredNorm();
    astar_norm += Astar.squaredNorm();
  }
  r.rq = w.q;
  if (w.nf > 0) r.rq -= w.P.transpose() * it.y;
  r.mu = w.nu > 0 ? xs / w.nu : 0.0;
  r.pobj = w.q.dot(it.z);
  for (std::size_t blk = 0; blk < w.sizes.size(); ++blk) {
    r.pobj += w.C[blk].cwiseProduct(it.X[blk]).sum();
  }
  r.dobj = w.b.dot(it.y);
  // The dual residual is scaled by the iterate magnitude as well as the
  // data: degenerate problems push y along an unbounded dual face, where the
  // absolute residual floors out at roundoff proportional to ||A*(y)||. The
  // primal residual stays data-scaled so infeasibility cannot masquerade as
  // convergence.
  r.pres = r.rp.norm() / (1.0 + w.b.norm());
  r.dres = std::sqrt(rdnorm + r.rq.squaredNorm()) /
           (1.0 + std::sqrt(cnorm + w.q.squaredNorm()) + std::sqrt(astar_norm));
  r.gap = xs / (1.0 + std::abs(r.pobj) + std::abs(r.dobj));
  return r;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolveOptions& options) {
  problem.check_valid();

  SdpSolution sol;
  const int m = problem.num_constraints();
  const int nb = problem.num_blocks();
  const int nf = problem.num_free;

  // ---- Scale and convert to minimization form ----
  Workspace w;
  w.sizes = problem.block_sizes;
  w.m = m;
  w.nf = nf;
  w.nu = 0;
  for (int s : w.sizes) w.nu += s;
  w.touch.resize(nb);
  w.C.resize(nb);
  for (int blk = 0; blk < nb; ++blk) {
    w.C[blk] = Eigen::MatrixXd::Zero(w.sizes[blk], w.sizes[blk]);
  }
  for (const auto& e : problem.objective_mat) {
    w.C[e.block](e.row, e.col) -= e.value;  // minimize -objective
    if (e.row != e.col) w.C[e.block](e.col, e.row) -= e.value;
  }
  w.q = Eigen::VectorXd::Zero(nf);
  for (const auto& e : problem.objective_free) w.q[e.var] -= e.value;

  double obj_norm = w.q.norm();
  for (int blk = 0; blk < nb; ++blk) obj_norm = std::max(obj_norm, w.C[blk].norm());
  w.obj_scale = std::max(1.0, obj_norm);
  for (int blk = 0; blk < nb; ++blk) w.C[blk] /= w.obj_scale;
  w.q /= w.obj_scale;

  w.b = Eigen::VectorXd::Zero(m);
  w.P = Eigen::MatrixXd::Zero(m, nf);
  w.row_scale.assign(m, 1.0);
  for (int i = 0; i < m; ++i) {
    const auto& c = problem.constraints[i];
    double norm2 = 0.0;
    for (const auto& e : c.mat) norm2 += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
    for (const auto& e : c.free_part) norm2 += e.value * e.value;
    w.row_scale[i] = std::max(1.0, std::sqrt(norm2));
    const double inv = 1.0 / w.row_scale[i];
    w.b[i] = c.rhs * inv;
    for (const auto& e : c.free_part) w.P(i, e.var) += e.value * inv;
  }
  for (int i = 0; i < m; ++i) {
    const double inv = 1.0 / w.row_scale[i];
    // Group this constraint's entries per block.
    std::vector<std::vector<BlockEntry>> per_block(nb);
    for (const auto& e : problem.constraints[i].mat) {
      per_block[e.block].push_back({e.row, e.col, e.value * inv});
    }
    for (int blk = 0; blk < nb; ++blk) {
      if (!per_block[blk].empty()) {
        w.touch[blk].push_back({i, std::move(per_block[blk])});
      }
    }
  }

  auto finalize = [&](SdpStatus status, const Iterate& it, const ResidualSet& r, int iters,
                      const std::string& message) {
    sol.status = status;
    sol.blocks = it.X;
    sol.free_values = it.z;
    sol.dual.resize(m);
    for (int i = 0; i < m; ++i) sol.dual[i] = w.obj_scale * it.y[i] / w.row_scale[i];
    sol.objective = 0.0;
    for (const auto& e : problem.objective_mat) {
      sol.objective += (e.row == e.col ? 1.0 : 2.0) * e.value * it.X[e.block](e.row, e.col);
    }
    for (const auto& e : problem.objective_free) sol.objective += e.value * it.z[e.var];
    sol.diag.iterations = iters;
    sol.diag.primal_residual = r.pres;
    sol.diag.dual_residual = r.dres;
    sol.diag.duality_gap = r.gap;
    sol.diag.message = message;
    // Optimality is only reported after an independent recheck of the
    // returned point against the problem data.
    if (status == SdpStatus::kOptimal && (nb > 0 || m > 0)) {
      ValidateTols tols;
      tols.feas_tol = std::max(1e-6, 10.0 * options.feas_tol);
      tols.psd_tol = options.psd_tol;
      tols.objective_tol = 1e-9;
      const ValidationReport check = validate(problem, sol, tols);
      if (!check.pass) {
        sol.status = SdpStatus::kNumericalFailure;
        sol.diag.message = "validation rejected optimal point: " + check.summary();
      }
    }
    return sol;
  };

  // ---- Degenerate shapes: no PSD blocks -> plain linear algebra ----
  if (nb == 0) {
    Iterate it;
    it.y = Eigen::VectorXd::Zero(m);
    it.z = Eigen::VectorXd::Zero(nf);
    ResidualSet r;
    r.rp = w.b;
    if (nf > 0 && m > 0) {
      it.z = w.P.colPivHouseholderQr().solve(w.b);
      r.rp = w.b - w.P * it.z;
    }
    if (m > 0 && r.rp.lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + w.b.lpNorm<Eigen::Infinity>())) {
      return finalize(SdpStatus::kInfeasible, it, r, 0, "inconsistent linear system");
    }
    if (nf > 0) {
      Eigen::VectorXd resid = w.q;
      if (m > 0) {
        it.y = w.P.transpose().colPivHouseholderQr().solve(w.q);
        resid = w.q - w.P.transpose() * it.y;
      }
      if (resid.lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + w.q.lpNorm<Eigen::Infinity>())) {
        return finalize(SdpStatus::kUnbounded, it, r, 0, "objective unbounded on affine set");
      }
    }
    return finalize(SdpStatus::kOptimal, it, r, 0, "no PSD blocks");
  }

  // ---- Initial iterate (SDPT3-style sizing) ----
  Iterate it;
  it.X.resize(nb);
  it.S.resize(nb);
  it.y = Eigen::VectorXd::Zero(m);
  it.z = Eigen::VectorXd::Zero(nf);
  for (int blk = 0; blk < nb; ++blk) {
    const int n = w.sizes[blk];
    double xi = std::max(10.0, std::sqrt(static_cast<double>(n)));
    double eta = std::max({10.0, std::sqrt(static_cast<double>(n)), w.C[blk].norm()});
    for (const auto& t : w.touch[blk]) {
      double anorm = 0.0;
      for (const auto& e : t.entries) {
        anorm += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
      }
      anorm = std::sqrt(anorm);
      xi = std::max(xi, static_cast<double>(n) * std::abs(w.b[t.constraint]) / (1.0 + anorm));
      eta = std::max(eta, anorm);
    }
    it.X[blk] = xi * Eigen::MatrixXd::Identity(n, n);
    it.S[blk] = eta * Eigen::MatrixXd::Identity(n, n);
  }

  ResidualSet r = compute_residuals(w, it);
  double best_merit = kInf;
  Iterate best_it = it;
  ResidualSet best_r = r;
  int stall_count = 0;
  std::string stop_reason = "iteration limit";

  const double feas_tol = options.feas_tol;
  const double dual_tol = std::max(options.dual_feas_tol, options.feas_tol);
  const double gap_tol = options.gap_tol;
  // With a zero objective any primal-feasible PSD point is optimal; the
  // duality gap carries no information and such problems are often weakly
  // feasible (rank-deficient faces only), so do not wait for it.
  const bool pure_feasibility =
      problem.objective_mat.empty() && problem.objective_free.empty();

  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const double merit = std::max({r.pres, r.dres, r.gap});
    if (merit < best_merit) {
      best_merit = merit;
      best_it = it;
      best_r = r;
    }
    if (options.verbose) {
      std::ostringstream os;
      os << "iter " << iter << " mu " << r.mu << " pres " << r.pres << " dres " << r.dres
         << " gap " << r.gap << " pobj " << r.pobj << " dobj " << r.dobj;
      // stderr keeps solver chatter out of tool output parsing
      std::fprintf(stderr, "%s\n", os.str().c_str());
    }
    if (r.pres <= feas_tol && r.dres <= dual_tol && r.gap <= gap_tol) {
      return finalize(SdpStatus::kOptimal, it, r, iter, "converged");
    }
    // Polish feasibility problems well past the acceptance threshold; the
    // end-of-loop classification still accepts plain feas_tol if we stall.
    if (pure_feasibility && r.pres <= 0.01 * feas_tol && iter >= 2) {
      return finalize(SdpStatus::kOptimal, it, r, iter, "primal feasible point found");
    }

    // Infeasibility certificates from diverging iterates.
    if (r.dobj > 0) {
      double cert_norm = r.rq.squaredNorm();
      for (int blk = 0; blk < nb; ++blk) {
        cert_norm += (w.C[blk] - r.Rd[blk]).squaredNorm();  // = A*(y) + S
      }
      cert_norm += w.q.squaredNorm();
      if (std::sqrt(cert_norm) / r.dobj <= options.infeasibility_tol) {
        return finalize(SdpStatus::kInfeasible, it, r, iter, "dual improving ray found");
      }
    }
    if (r.pobj < 0) {
      const double cert = (w.b - r.rp).norm() + w.b.norm();
      if (cert / (-r.pobj) <= options.infeasibility_tol) {
        return finalize(SdpStatus::kUnbounded, it, r, iter, "primal improving ray found");
      }
    }

    // ---- NT scaling ----
    std::vector<Eigen::MatrixXd> W(nb), G(nb), Gi(nb), Sinv(nb), Xihalf(nb), Vinv(nb);
    bool scale_ok = true;
    for (int blk = 0; blk < nb && scale_ok; ++blk) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esx(it.X[blk]);
      if (esx.eigenvalues().minCoeff() <= 0) {
        scale_ok = false;
        break;
      }
      Eigen::VectorXd dx = esx.eigenvalues();
      Eigen::MatrixXd Xh = esx.eigenvectors() *
                           dx.array().sqrt().matrix().asDiagonal() *
                           esx.eigenvectors().transpose();
      Xihalf[blk] = esx.eigenvectors() *
                    dx.array().rsqrt().matrix().asDiagonal() *
                    esx.eigenvectors().transpose();
      const Eigen::MatrixXd T = Xh * it.S[blk] * Xh;
      W[blk] = Xh * sym_pow(0.5 * (T + T.transpose()), -0.5) * Xh;
      W[blk] = 0.5 * (W[blk] + W[blk].transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esw(W[blk]);
      if (esw.eigenvalues().minCoeff() <= 0) {
        scale_ok = false;
        break;
      }
      Eigen::VectorXd dw = esw.eigenvalues();
      G[blk] = esw.eigenvectors() * dw.array().sqrt().matrix().asDiagonal() *
               esw.eigenvectors().transpose();
      Gi[blk] = esw.eigenvectors() * dw.array().rsqrt().matrix().asDiagonal() *
                esw.eigenvectors().transpose();
      Sinv[blk] = W[blk] * it.X[blk].inverse() * W[blk];
      Sinv[blk] = 0.5 * (Sinv[blk] + Sinv[blk].transpose());
      const Eigen::MatrixXd V = G[blk] * it.S[blk] * G[blk];
      Vinv[blk] = sym_pow(0.5 * (V + V.transpose()), -1.0);
    }
    if (!scale_ok) {
      stop_reason = "iterate left the cone";
      break;
    }

    // ---- Schur complement M = A(W A*() W), factored once per iteration ----
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (int blk = 0; blk < nb; ++blk) {
      const int n = w.sizes[blk];
      const auto& touches = w.touch[blk];
      for (std::size_t a = 0; a < touches.size(); ++a) {
        const Eigen::MatrixXd Aa = dense_from_entries(n, touches[a].entries);
        const Eigen::MatrixXd Ua = W[blk] * Aa * W[blk];
        for (std::size_t c = 0; c <= a; ++c) {
          const double v = sparse_inner(touches[c].entries, Ua);
          M(touches[a].constraint, touches[c].constraint) += v;
          if (a != c) M(touches[c].constraint, touches[a].constraint) += v;
        }
      }
    }
    Eigen::LLT<Eigen::MatrixXd> Mfact;
    double reg = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Mfact.compute(M + reg * Eigen::MatrixXd::Identity(m, m));
      if (Mfact.info() == Eigen::Success) break;
      reg = reg == 0.0 ? 1e-14 * (1.0 + M.trace() / std::max(1, m)) : reg * 100.0;
    }
    if (Mfact.info() != Eigen::Success) {
      stop_reason = "Schur complement factorization failed";
      break;
    }
    Eigen::MatrixXd MinvP;
    Eigen::LLT<Eigen::MatrixXd> Ffact;
    if (nf > 0) {
      MinvP = Mfact.solve(w.P);
      Eigen::MatrixXd F = w.P.transpose() * MinvP;
      double freg = 0.0;
      for (int attempt = 0; attempt < 8; ++attempt) {
        Ffact.compute(F + freg * Eigen::MatrixXd::Identity(nf, nf));
        if (Ffact.info() == Eigen::Success) break;
        freg = freg == 0.0 ? 1e-14 * (1.0 + F.trace() / nf) : freg * 100.0;
      }
      if (Ffact.info() != Eigen::Success) {
        stop_reason = "free-variable Schur factorization failed";
        break;
      }
    }

    // Solves the Newton system for a given centering matrix Rc.
    auto newton = [&](const std::vector<Eigen::MatrixXd>& Rc, Eigen::VectorXd& dy,
                      Eigen::VectorXd& dz, std::vector<Eigen::MatrixXd>& dX,
                      std::vector<Eigen::MatrixXd>& dS) {
      Eigen::VectorXd h = r.rp;
      for (int blk = 0; blk < nb; ++blk) {
        const Eigen::MatrixXd rhs_mat = W[blk] * r.Rd[blk] * W[blk] - Rc[blk];
        for (const auto& t : w.touch[blk]) {
          h[t.constraint] += sparse_inner(t.entries, rhs_mat);
        }
      }
      if (nf > 0) {
        dz = Ffact.solve(w.P.transpose() * Mfact.solve(h) - r.rq);
        dy = Mfact.solve(h - w.P * dz);
        // One round of iterative refinement on the augmented system.
        const Eigen::VectorXd r1 = h - M * dy - w.P * dz;
        const Eigen::VectorXd r2 = r.rq - w.P.transpose() * dy;
        const Eigen::VectorXd cz = Ffact.solve(w.P.transpose() * Mfact.solve(r1) - r2);
        dz += cz;
        dy += Mfact.solve(r1 - w.P * cz);
      } else {
        dz.resize(0);
        dy = Mfact.solve(h);
        dy += Mfact.solve(h - M * dy);
      }
      dX.resize(nb);
      dS.resize(nb);
      for (int blk = 0; blk < nb; ++blk) {
        Eigen::MatrixXd Astar = Eigen::MatrixXd::Zero(w.sizes[blk], w.sizes[blk]);
        for (const auto& t : w.touch[blk]) {
          const double yi = dy[t.constraint];
          if (yi == 0.0) continue;
          for (const auto& e : t.entries) {
            Astar(e.row, e.col) += yi * e.value;
            if (e.row != e.col) Astar(e.col, e.row) += yi * e.value;
          }
        }
        dS[blk] = r.Rd[blk] - Astar;
        dX[blk] = Rc[blk] - W[blk] * dS[blk] * W[blk];
        dX[blk] = 0.5 * (dX[blk] + dX[blk].transpose());
      }
    };

    auto step_lengths = [&](const std::vector<Eigen::MatrixXd>& dX,
                            const std::vector<Eigen::MatrixXd>& dS, double& ap, double& ad) {
      ap = ad = kInf;
      for (int blk = 0; blk < nb; ++blk) {
        ap = std::min(ap, max_step(Xihalf[blk], dX[blk]));
        // S^{-1/2} from W and X not available directly; use eigen solve on S.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ess(it.S[blk]);
        Eigen::MatrixXd Sih = ess.eigenvectors() *
                              ess.eigenvalues().array().max(1e-300).rsqrt().matrix().asDiagonal() *
                              ess.eigenvectors().transpose();
        ad = std::min(ad, max_step(Sih, dS[blk]));
      }
    };

    // Predictor (affine scaling direction).
    std::vector<Eigen::MatrixXd> Rc(nb);
    for (int blk = 0; blk < nb; ++blk) Rc[blk] = -it.X[blk];
    Eigen::VectorXd dya, dza;
    std::vector<Eigen::MatrixXd> dXa, dSa;
    newton(Rc, dya, dza, dXa, dSa);
    double apa, ada;
    step_lengths(dXa, dSa, apa, ada);
    apa = std::min(1.0, apa);
    ada = std::min(1.0, ada);
    double xs_aff = 0.0;
    for (int blk = 0; blk < nb; ++blk) {
      xs_aff += (it.X[blk] + apa * dXa[blk]).cwiseProduct(it.S[blk] + ada * dSa[blk]).sum();
    }
    const double mu_aff = std::max(xs_aff / w.nu, 0.0);
    double sigma = r.mu > 0 ? std::pow(mu_aff / r.mu, 3.0) : 0.0;
    sigma = std::clamp(sigma, 1e-8, 1.0);

    // Corrector with second-order term in the scaled space.
    for (int blk = 0; blk < nb; ++blk) {
      const Eigen::MatrixXd dXh = Gi[blk] * dXa[blk] * Gi[blk];
      const Eigen::MatrixXd dSh = G[blk] * dSa[blk] * G[blk];
      const Eigen::MatrixXd cross = dXh * dSh * Vinv[blk];
      const Eigen::MatrixXd corr = 0.5 * (cross + cross.transpose());
      Rc[blk] = sigma * r.mu * Sinv[blk] - it.X[blk] - G[blk] * corr * G[blk];
    }
    Eigen::VectorXd dy, dz;
    std::vector<Eigen::MatrixXd> dX, dS;
    newton(Rc, dy, dz, dX, dS);
    double ap, ad;
    step_lengths(dX, dS, ap, ad);
    const double tau = 0.9 + 0.09 * std::min(1.0, std::min(ap, ad));
    ap = std::min(1.0, tau * ap);
    ad = std::min(1.0, tau * ad);

    if (ap < 1e-8 && ad < 1e-8) {
      if (++stall_count >= 4) {
        stop_reason = "step lengths collapsed";
        break;
      }
    } else {
      stall_count = 0;
    }

    // Apply the step, backing off if roundoff pushed an iterate out of the
    // cone despite the eigenvalue-based step bound.
    auto min_eig = [](const Eigen::MatrixXd& A) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()),
                                                        Eigen::EigenvaluesOnly);
      return es.eigenvalues().minCoeff();
    };
    bool stepped = false;
    for (int attempt = 0; attempt < 8 && !stepped; ++attempt) {
      stepped = true;
      for (int blk = 0; blk < nb && stepped; ++blk) {
        if (min_eig(it.X[blk] + ap * dX[blk]) <= 0 || min_eig(it.S[blk] + ad * dS[blk]) <= 0) {
          stepped = false;
        }
      }
      if (!stepped) {
        ap *= 0.7;
        ad *= 0.7;
      }
    }
    if (!stepped) {
      stop_reason = "could not keep iterates inside the cone";
      break;
    }
    for (int blk = 0; blk < nb; ++blk) {
      it.X[blk] += ap * dX[blk];
      it.X[blk] = 0.5 * (it.X[blk] + it.X[blk].transpose());
      it.S[blk] += ad * dS[blk];
      it.S[blk] = 0.5 * (it.S[blk] + it.S[blk].transpose());
    }
    if (nf > 0) it.z += ap * dz;
    it.y += ad * dy;
    r = compute_residuals(w, it);
  }

  // Classify the best iterate seen.
  const double final_merit = std::max({best_r.pres, best_r.dres, best_r.gap});
  if (best_r.pres <= feas_tol && best_r.dres <= dual_tol && best_r.gap <= gap_tol) {
    return finalize(SdpStatus::kOptimal, best_it, best_r, iter, stop_reason);
  }
  if (pure_feasibility && best_r.pres <= feas_tol) {
    return finalize(SdpStatus::kOptimal, best_it, best_r, iter,
                    "primal feasible point found: " + stop_reason);
  }
  if (best_r.pres <= 10 * feas_tol && best_r.dres <= 10 * dual_tol &&
      best_r.gap <= 10 * gap_tol) {
    SdpSolution out = finalize(SdpStatus::kOptimal, best_it, best_r, iter,
                               "stopped within 10x of tolerance: " + stop_reason);
    out.diag.marginal = true;
    return out;
  }
  // Looser divergence check before giving up.
  if (best_r.dobj > 0) {
    double cert_norm = best_r.rq.squaredNorm() + w.q.squaredNorm();
    for (int blk = 0; blk < nb; ++blk) {
      cert_norm += (w.C[blk] - best_r.Rd[blk]).squaredNorm();
    }
    if (std::sqrt(cert_norm) / best_r.dobj <= 1e4 * options.infeasibility_tol) {
      return finalize(SdpStatus::kInfeasible, best_it, best_r, iter,
                      "dual improving ray (loose): " + stop_reason);
    }
  }
  if (best_r.pobj < 0) {
    const double cert = (w.b - best_r.rp).norm() + w.b.norm();
    if (cert / (-best_r.pobj) <= 1e4 * options.infeasibility_tol) {
      return finalize(SdpStatus::kUnbounded, best_it, best_r, iter,
                      "primal improving ray (loose): " + stop_reason);
    }
  }
  SdpSolution out = finalize(SdpStatus::kNumericalFailure, best_it, best_r, iter,
                             "no certificate within tolerance (merit " +
                                 std::to_string(final_merit) + "): " + stop_reason);
  return out;
}

}  // namespace cbc
