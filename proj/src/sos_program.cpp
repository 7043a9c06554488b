#include "cbc/sos_program.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cbc {

void AffineScalar::add_linear(int var, double w) {
  if (w == 0.0) return;
  auto [it, inserted] = linear.emplace(var, w);
  if (!inserted) {
    it->second += w;
    if (it->second == 0.0) linear.erase(it);
  }
}

void AffineScalar::scale(double s) {
  constant *= s;
  if (s == 0.0) {
    linear.clear();
    return;
  }
  for (auto& [v, w] : linear) w *= s;
}

PolyExpr::PolyExpr(const Polynomial& fixed) : nvars_(fixed.nvars()) {
  for (const auto& [m, c] : fixed.terms()) {
    AffineScalar a;
    a.constant = c;
    terms_.emplace(m, std::move(a));
  }
}

PolyExpr::PolyExpr(int nvars, double constant) : nvars_(nvars) {
  if (constant != 0.0) {
    AffineScalar a;
    a.constant = constant;
    terms_.emplace(Monomial(std::vector<int>(nvars, 0)), std::move(a));
  }
}

bool PolyExpr::has_decision() const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const auto& kv) { return kv.second.has_decision(); });
}

int PolyExpr::degree() const {
  int d = -1;
  for (const auto& [m, a] : terms_) d = std::max(d, m.degree());
  return d;
}

namespace {

void check_expr_compat(const PolyExpr& a, const PolyExpr& b) {
  if (a.nvars() != b.nvars()) {
    throw std::invalid_argument("PolyExpr: variable count mismatch");
  }
}

void prune(PolyExpr::TermMap& terms) {
  for (auto it = terms.begin(); it != terms.end();) {
    if (it->second.constant == 0.0 && it->second.linear.empty()) {
      it = terms.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace

PolyExpr& PolyExpr::operator+=(const PolyExpr& other) {
  if (terms_.empty() && prog_ == nullptr) {
    *this = other;
    return *this;
  }
  if (!other.terms_.empty() || other.prog_ != nullptr) check_expr_compat(*this, other);
  if (prog_ == nullptr) prog_ = other.prog_;
  if (other.prog_ != nullptr && other.prog_ != prog_) {
    throw std::invalid_argument("PolyExpr: mixing expressions from different programs");
  }
  for (const auto& [m, a] : other.terms_) {
    auto [it, inserted] = terms_.emplace(m, a);
    if (!inserted) {
      it->second.constant += a.constant;
      for (const auto& [v, w] : a.linear) it->second.add_linear(v, w);
    }
  }
  prune(terms_);
  return *this;
}

PolyExpr& PolyExpr::operator-=(const PolyExpr& other) {
  PolyExpr neg = other;
  neg *= -1.0;
  return *this += neg;
}

PolyExpr& PolyExpr::operator*=(double s) {
  for (auto& [m, a] : terms_) a.scale(s);
  prune(terms_);
  return *this;
}

std::string PolyExpr::describe_first_decision() const {
  for (const auto& [m, a] : terms_) {
    if (!a.linear.empty()) {
      const int var = a.linear.begin()->first;
      if (prog_ != nullptr) return prog_->coeff_owner(var);
      return "coeff#" + std::to_string(var);
    }
  }
  return "?";
}

PolyExpr operator*(const PolyExpr& a, const PolyExpr& b) {
  check_expr_compat(a, b);
  const bool da = a.has_decision();
  const bool db = b.has_decision();
  if (da && db) {
    throw BilinearError(a.describe_first_decision(), b.describe_first_decision());
  }
  // Arrange for `fixed * affine`.
  const PolyExpr& fixed = db ? a : b;
  const PolyExpr& affine = db ? b : a;
  PolyExpr out;
  out.nvars_ = a.nvars();
  out.prog_ = affine.prog_ != nullptr ? affine.prog_ : fixed.prog_;
  for (const auto& [mf, af] : fixed.terms_) {
    const double cf = af.constant;
    if (cf == 0.0) continue;
    for (const auto& [ma, aa] : affine.terms_) {
      Monomial m = mf;
      for (int i = 0; i < m.nvars(); ++i) m.exponents[i] += ma.exponents[i];
      auto [it, inserted] = out.terms_.emplace(m, AffineScalar{});
      it->second.constant += cf * aa.constant;
      for (const auto& [v, w] : aa.linear) it->second.add_linear(v, cf * w);
    }
  }
  prune(out.terms_);
  return out;
}

PolyExpr differentiate(const PolyExpr& e, int var_index) {
  if (var_index < 0 || var_index >= e.nvars()) {
    throw std::invalid_argument("differentiate: variable index out of range");
  }
  PolyExpr out;
  out.nvars_ = e.nvars_;
  out.prog_ = e.prog_;
  for (const auto& [m, a] : e.terms_) {
    const int exp = m.exponents[var_index];
    if (exp == 0) continue;
    Monomial dm = m;
    dm.exponents[var_index] = exp - 1;
    AffineScalar scaled = a;
    scaled.scale(static_cast<double>(exp));
    auto [it, inserted] = out.terms_.emplace(dm, std::move(scaled));
    if (!inserted) {
      it->second.constant += a.constant * exp;
      for (const auto& [v, w] : a.linear) it->second.add_linear(v, w * exp);
    }
  }
  return out;
}

Polynomial PolyExpr::at_solution(const Eigen::VectorXd& coeff_values) const {
  Polynomial p(nvars_);
  for (const auto& [m, a] : terms_) {
    double c = a.constant;
    for (const auto& [v, w] : a.linear) c += w * coeff_values[v];
    p.add_term(m, c);
  }
  return p;
}

PolyVarHandle SosProgram::add_poly_var(const std::string& name, int degree) {
  if (degree < 0) throw std::invalid_argument("add_poly_var: degree must be >= 0");
  VarInfo info;
  info.name = name;
  info.degree = degree;
  info.first_coeff = next_coeff_;
  info.basis = monomial_basis(nvars_, degree);
  next_coeff_ += static_cast<int>(info.basis.size());
  vars_.push_back(std::move(info));
  return PolyVarHandle{static_cast<int>(vars_.size()) - 1};
}

PolyExpr SosProgram::expr(PolyVarHandle h) const {
  const VarInfo& info = vars_.at(h.id);
  PolyExpr e;
  e.nvars_ = nvars_;
  e.prog_ = this;
  for (std::size_t k = 0; k < info.basis.size(); ++k) {
    AffineScalar a;
    a.add_linear(info.first_coeff + static_cast<int>(k), 1.0);
    e.terms_.emplace(info.basis[k], std::move(a));
  }
  return e;
}

std::string SosProgram::coeff_owner(int coeff_var) const {
  for (const VarInfo& v : vars_) {
    if (coeff_var >= v.first_coeff &&
        coeff_var < v.first_coeff + static_cast<int>(v.basis.size())) {
      return v.name;
    }
  }
  return "coeff#" + std::to_string(coeff_var);
}

int SosProgram::add_sos_constraint(PolyExpr e, std::string label) {
  if (e.prog_ != nullptr && e.prog_ != this) {
    throw std::invalid_argument("add_sos_constraint: expression belongs to another program");
  }
  if (!e.terms_.empty() && e.nvars() != nvars_) {
    throw std::invalid_argument("add_sos_constraint: ambient variable count mismatch");
  }
  ConstraintInfo info;
  info.gram_degree = (std::max(e.degree(), 0) + 1) / 2;
  info.expr = std::move(e);
  // The owner pointer only serves construction-time diagnostics; stored
  // expressions must survive the program being moved.
  info.expr.prog_ = nullptr;
  info.label = std::move(label);
  constraints_.push_back(std::move(info));
  return static_cast<int>(constraints_.size()) - 1;
}

void SosProgram::note_free(PolyVarHandle h) { free_notes_.push_back(h.id); }

void SosProgram::maximize(PolyVarHandle scalar) {
  if (vars_.at(scalar.id).degree != 0) {
    throw std::invalid_argument("maximize: objective must be a scalar (degree-0) variable");
  }
  objective_var_ = scalar.id;
}

std::pair<std::vector<int>, int> SosProgram::coeff_remap() const {
  std::vector<bool> used(next_coeff_, false);
  for (const auto& c : constraints_) {
    for (const auto& [m, a] : c.expr.terms()) {
      for (const auto& kv : a.linear) used[kv.first] = true;
    }
  }
  if (objective_var_ >= 0) used[vars_[objective_var_].first_coeff] = true;
  std::vector<int> remap(next_coeff_, -1);
  int nf = 0;
  for (int v = 0; v < next_coeff_; ++v) {
    if (used[v]) remap[v] = nf++;
  }
  return {remap, nf};
}

SdpProblem SosProgram::compile() const {
  SdpProblem sdp;
  // Only coefficients referenced by some constraint (plus the objective
  // scalar) become SDP variables; the rest are fixed to zero at extraction.
  const auto [remap, nf] = coeff_remap();
  sdp.num_free = nf;

  for (int k = 0; k < num_sos_constraints(); ++k) {
    const ConstraintInfo& cinfo = constraints_[k];
    const auto basis = monomial_basis(nvars_, cinfo.gram_degree);
    const int bs = static_cast<int>(basis.size());
    sdp.block_sizes.push_back(bs);
    const int blk = static_cast<int>(sdp.block_sizes.size()) - 1;

    // Products of basis pairs, grouped by resulting monomial.
    std::map<Monomial, std::vector<std::pair<int, int>>, GradedLexLess> products;
    for (int a = 0; a < bs; ++a) {
      for (int b = a; b < bs; ++b) {
        Monomial m = basis[a];
        for (int i = 0; i < nvars_; ++i) m.exponents[i] += basis[b].exponents[i];
        products[m].push_back({a, b});
      }
    }
    for (const auto& [m, pairs] : products) {
      SdpProblem::LinearConstraint eq;
      for (const auto& [a, b] : pairs) eq.mat.push_back({blk, a, b, 1.0});
      auto it = cinfo.expr.terms().find(m);
      if (it != cinfo.expr.terms().end()) {
        eq.rhs = it->second.constant;
        for (const auto& [v, w] : it->second.linear) {
          eq.free_part.push_back({remap[v], -w});
        }
      }
      sdp.constraints.push_back(std::move(eq));
    }
  }

  if (objective_var_ >= 0) {
    sdp.objective_free.push_back({remap[vars_[objective_var_].first_coeff], 1.0});
  }
  if (trace_penalty_ > 0.0) {
    for (int blk = 0; blk < sdp.num_blocks(); ++blk) {
      for (int a = 0; a < sdp.block_sizes[blk]; ++a) {
        sdp.objective_mat.push_back({blk, a, a, -trace_penalty_});
      }
    }
  }
  return sdp;
}

SosSolution SosProgram::extract(const SdpSolution& sdp, const SosOptions& opts) const {
  SosSolution out;
  out.status = sdp.status;
  out.diag = sdp.diag;
  if (sdp.status != SdpStatus::kOptimal) return out;

  const auto [remap, nf] = coeff_remap();
  if (sdp.free_values.size() != nf) {
    throw std::invalid_argument("extract: solution free-variable count mismatch");
  }
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(next_coeff_);
  for (int v = 0; v < next_coeff_; ++v) {
    if (remap[v] >= 0) coeffs[v] = sdp.free_values[remap[v]];
  }

  out.poly_values.reserve(vars_.size());
  for (const VarInfo& info : vars_) {
    Polynomial p(nvars_);
    for (std::size_t k = 0; k < info.basis.size(); ++k) {
      p.add_term(info.basis[k], coeffs[info.first_coeff + static_cast<int>(k)]);
    }
    out.poly_values.push_back(std::move(p));
  }
  out.objective = objective_var_ >= 0 ? coeffs[vars_[objective_var_].first_coeff] : 0.0;

  // Gram certificates with reconstruction residuals.
  std::ostringstream rejection;
  bool ok = true;
  for (int k = 0; k < num_sos_constraints(); ++k) {
    GramCertificate cert;
    cert.basis = monomial_basis(nvars_, constraints_[k].gram_degree);
    cert.Q = 0.5 * (sdp.blocks[k] + sdp.blocks[k].transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cert.Q, Eigen::EigenvaluesOnly);
    cert.min_eigenvalue = es.eigenvalues().minCoeff();

    Polynomial reconstructed(nvars_);
    const int bs = static_cast<int>(cert.basis.size());
    for (int a = 0; a < bs; ++a) {
      for (int b = a; b < bs; ++b) {
        Monomial m = cert.basis[a];
        for (int i = 0; i < nvars_; ++i) m.exponents[i] += cert.basis[b].exponents[i];
        reconstructed.add_term(m, (a == b ? 1.0 : 2.0) * cert.Q(a, b));
      }
    }
    const Polynomial expected = constraints_[k].expr.at_solution(coeffs);
    cert.reconstruction_residual = (reconstructed - expected).max_abs_coeff();
    if (cert.reconstruction_residual > opts.recon_tol) {
      ok = false;
      rejection << "constraint " << k << (constraints_[k].label.empty() ? "" : " (" + constraints_[k].label + ")")
                << ": reconstruction residual " << cert.reconstruction_residual << " > "
                << opts.recon_tol << "; ";
    }
    if (cert.min_eigenvalue < -opts.psd_tol) {
      ok = false;
      rejection << "constraint " << k << ": min eigenvalue " << cert.min_eigenvalue << " < -"
                << opts.psd_tol << "; ";
    }
    out.certificates.push_back(std::move(cert));
  }
  out.accepted = ok;
  out.rejection = rejection.str();
  return out;
}

SosSolution SosProgram::solve(const SosOptions& opts) const {
  const SdpProblem sdp = compile();
  if (!opts.dump_path.empty()) {
    std::ofstream out(opts.dump_path);
    if (!out) throw std::runtime_error("cannot open SDPA dump file: " + opts.dump_path);
    out << export_sdpa(sdp);
  }
  const SdpSolution sol = cbc::solve(sdp, opts.solver);
  return extract(sol, opts);
}

CheckSosResult check_sos(const Polynomial& p, const SosOptions& opts) {
  CheckSosResult out;
  if (p.is_zero()) {
    out.status = SdpStatus::kOptimal;
    out.feasible = true;
    GramCertificate cert;
    cert.basis = monomial_basis(std::max(p.nvars(), 1), 0);
    cert.Q = Eigen::MatrixXd::Zero(1, 1);
    out.certificate = cert;
    return out;
  }
  if (p.degree() % 2 != 0) {
    out.status = SdpStatus::kInfeasible;
    out.feasible = false;
    return out;
  }
  // Membership is invariant under positive scaling; normalizing keeps the
  // SDP data O(1) whatever the caller's coefficient scale.
  const double scale = p.max_abs_coeff();
  SosProgram prog(p.nvars());
  prog.add_sos_constraint(PolyExpr((1.0 / scale) * p), "membership");
  const SosSolution sol = prog.solve(opts);
  out.status = sol.status;
  if (sol.status == SdpStatus::kOptimal && sol.accepted) {
    out.feasible = true;
    GramCertificate cert = sol.certificates.front();
    cert.Q *= scale;
    cert.min_eigenvalue *= scale;
    cert.reconstruction_residual *= scale;
    out.certificate = std::move(cert);
  } else if (sol.status == SdpStatus::kInfeasible) {
    out.feasible = false;
  } else {
    // Optimal-but-rejected reconstructions count as solver failures.
    out.status = SdpStatus::kNumericalFailure;
    out.feasible = false;
  }
  return out;
}

}  // namespace cbc
