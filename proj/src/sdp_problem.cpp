#include "cbc/sdp.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace cbc {

namespace {

void check_entries(const SdpProblem& p, const std::vector<SdpProblem::MatEntry>& mat,
                   const std::vector<SdpProblem::VecEntry>& freep, const std::string& where) {
  for (const auto& e : mat) {
    if (e.block < 0 || e.block >= p.num_blocks()) {
      throw std::invalid_argument(where + ": entry references invalid block");
    }
    const int n = p.block_sizes[e.block];
    if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n || e.row > e.col) {
      throw std::invalid_argument(where + ": entry indices out of range or row > col");
    }
  }
  for (const auto& e : freep) {
    if (e.var < 0 || e.var >= p.num_free) {
      throw std::invalid_argument(where + ": free-variable index out of range");
    }
  }
}

}  // namespace

void SdpProblem::check_valid() const {
  for (int s : block_sizes) {
    if (s <= 0) throw std::invalid_argument("SdpProblem: block sizes must be positive");
  }
  if (num_free < 0) throw std::invalid_argument("SdpProblem: num_free must be >= 0");
  for (int i = 0; i < num_constraints(); ++i) {
    check_entries(*this, constraints[i].mat, constraints[i].free_part,
                  "constraint " + std::to_string(i));
  }
  check_entries(*this, objective_mat, objective_free, "objective");
}

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::kOptimal: return "optimal";
    case SdpStatus::kInfeasible: return "infeasible";
    case SdpStatus::kUnbounded: return "unbounded";
    case SdpStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

double inner(const std::vector<SdpProblem::MatEntry>& mat,
             const std::vector<Eigen::MatrixXd>& blocks) {
  double total = 0.0;
  for (const auto& e : mat) {
    const double x = blocks[e.block](e.row, e.col);
    total += e.row == e.col ? e.value * x : 2.0 * e.value * x;
  }
  return total;
}

double inner_free(const std::vector<SdpProblem::VecEntry>& vec, const Eigen::VectorXd& z) {
  double total = 0.0;
  for (const auto& e : vec) total += e.value * z[e.var];
  return total;
}

}  // namespace

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << (pass ? "pass" : "FAIL") << " (max equality residual " << max_equality_residual
     << ", min eigenvalue " << min_block_eigenvalue << ", objective gap " << objective_gap << ")";
  return os.str();
}

ValidationReport validate(const SdpProblem& problem, const SdpSolution& solution,
                          const ValidateTols& tols) {
  ValidationReport report;
  if (solution.blocks.size() != problem.block_sizes.size()) {
    throw std::invalid_argument("validate: block count mismatch");
  }
  double scale = 1.0;
  for (const auto& c : problem.constraints) scale = std::max(scale, std::abs(c.rhs));
  for (const auto& c : problem.constraints) {
    const double lhs = inner(c.mat, solution.blocks) + inner_free(c.free_part, solution.free_values);
    report.max_equality_residual =
        std::max(report.max_equality_residual, std::abs(lhs - c.rhs) / scale);
  }
  report.min_block_eigenvalue = 0.0;
  for (std::size_t k = 0; k < solution.blocks.size(); ++k) {
    const Eigen::MatrixXd& X = solution.blocks[k];
    if (X.rows() != problem.block_sizes[k] || X.cols() != problem.block_sizes[k]) {
      throw std::invalid_argument("validate: block dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
    report.min_block_eigenvalue = std::min(report.min_block_eigenvalue,
                                           es.eigenvalues().minCoeff());
  }
  const double recomputed = inner(problem.objective_mat, solution.blocks) +
                            inner_free(problem.objective_free, solution.free_values);
  report.objective_gap = std::abs(recomputed - solution.objective);
  report.pass = report.max_equality_residual <= tols.feas_tol &&
                report.min_block_eigenvalue >= -tols.psd_tol &&
                report.objective_gap <= tols.objective_tol * (1.0 + std::abs(recomputed));
  return report;
}

std::string export_sdpa(const SdpProblem& problem) {
  problem.check_valid();
  std::ostringstream os;
  os << std::setprecision(17);

  const int m = problem.num_constraints();
  const bool has_free = problem.num_free > 0;
  const int nblocks = problem.num_blocks() + (has_free ? 1 : 0);
  os << m << "\n" << nblocks << "\n";
  for (int i = 0; i < problem.num_blocks(); ++i) {
    os << problem.block_sizes[i] << (i + 1 < nblocks ? " " : "");
  }
  if (has_free) os << -(2 * problem.num_free);
  os << "\n";
  for (int i = 0; i < m; ++i) os << problem.constraints[i].rhs << (i + 1 < m ? " " : "");
  os << "\n";

  const int free_block = problem.num_blocks() + 1;  // 1-based
  auto emit = [&](int matno, const std::vector<SdpProblem::MatEntry>& mat,
                  const std::vector<SdpProblem::VecEntry>& freep) {
    for (const auto& e : mat) {
      if (e.value == 0.0) continue;
      os << matno << " " << e.block + 1 << " " << e.row + 1 << " " << e.col + 1 << " " << e.value
         << "\n";
    }
    // z = z+ - z-: +value at (var,var), -value at (num_free+var, ...).
    for (const auto& e : freep) {
      if (e.value == 0.0) continue;
      os << matno << " " << free_block << " " << e.var + 1 << " " << e.var + 1 << " " << e.value
         << "\n";
      os << matno << " " << free_block << " " << problem.num_free + e.var + 1 << " "
         << problem.num_free + e.var + 1 << " " << -e.value << "\n";
    }
  };
  emit(0, problem.objective_mat, problem.objective_free);
  for (int i = 0; i < m; ++i) {
    emit(i + 1, problem.constraints[i].mat, problem.constraints[i].free_part);
  }
  return os.str();
}

SdpaData parse_sdpa(std::istream& in) {
  SdpaData data;
  std::string line;
  auto next_content_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const char c = line[0];
      if (c == '*' || c == '"') continue;  // comment
      return line;
    }
    return {};
  };

  std::istringstream ls(next_content_line());
  if (!(ls >> data.num_constraints)) throw std::runtime_error("parse_sdpa: missing mDIM");
  int nblocks = 0;
  ls.clear();
  ls.str(next_content_line());
  if (!(ls >> nblocks)) throw std::runtime_error("parse_sdpa: missing nBLOCK");
  if (nblocks > 0) {
    ls.clear();
    ls.str(next_content_line());
    for (int i = 0; i < nblocks; ++i) {
      int s = 0;
      char sep;
      while (ls.peek() == ',' || ls.peek() == '(' || ls.peek() == ')' || ls.peek() == '{' ||
             ls.peek() == '}') {
        ls >> sep;
      }
      if (!(ls >> s)) throw std::runtime_error("parse_sdpa: bad block structure line");
      data.block_sizes.push_back(s);
    }
  }
  data.cost.resize(data.num_constraints);
  if (data.num_constraints > 0) {
    ls.clear();
    ls.str(next_content_line());
    for (int i = 0; i < data.num_constraints; ++i) {
      char sep;
      while (ls.peek() == ',') ls >> sep;
      if (!(ls >> data.cost[i])) throw std::runtime_error("parse_sdpa: bad cost line");
    }
  }
  while (true) {
    std::string content = next_content_line();
    if (content.empty()) break;
    std::istringstream es(content);
    SdpaData::Entry e;
    if (!(es >> e.matno >> e.block >> e.row >> e.col >> e.value)) {
      throw std::runtime_error("parse_sdpa: bad entry line: " + content);
    }
    data.entries.push_back(e);
  }
  return data;
}

SdpaData parse_sdpa_string(const std::string& text) {
  std::istringstream in(text);
  return parse_sdpa(in);
}

}  // namespace cbc
