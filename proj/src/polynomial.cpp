#include "cbc/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cbc {

int Monomial::degree() const {
  return std::accumulate(exponents.begin(), exponents.end(), 0);
}

bool GradedLexLess::operator()(const Monomial& a, const Monomial& b) const {
  const int da = a.degree();
  const int db = b.degree();
  if (da != db) return da < db;
  // Within a degree, lexicographically larger exponent vectors come first.
  return std::lexicographical_compare(b.exponents.begin(), b.exponents.end(),
                                      a.exponents.begin(), a.exponents.end());
}

namespace {

void check_same_nvars(const Polynomial& p, const Polynomial& q, const char* op) {
  if (p.nvars() != q.nvars()) {
    throw std::invalid_argument(std::string(op) + ": variable count mismatch (" +
                                std::to_string(p.nvars()) + " vs " + std::to_string(q.nvars()) +
                                ")");
  }
}

}  // namespace

Polynomial Polynomial::constant(int nvars, double value) {
  Polynomial p(nvars);
  p.add_term(Monomial(std::vector<int>(nvars, 0)), value);
  return p;
}

Polynomial Polynomial::variable(int nvars, int index) {
  if (index < 0 || index >= nvars) {
    throw std::invalid_argument("Polynomial::variable: index out of range");
  }
  Polynomial p(nvars);
  std::vector<int> e(nvars, 0);
  e[index] = 1;
  p.add_term(Monomial(std::move(e)), 1.0);
  return p;
}

Polynomial Polynomial::from_terms(
    int nvars, std::initializer_list<std::pair<double, std::vector<int>>> terms) {
  Polynomial p(nvars);
  for (const auto& [coeff, exps] : terms) {
    p.add_term(Monomial(exps), coeff);
  }
  return p;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Monomial& m, double coeff) {
  if (m.nvars() != nvars_) {
    throw std::invalid_argument("Polynomial::add_term: exponent length " +
                                std::to_string(m.nvars()) + " != nvars " + std::to_string(nvars_));
  }
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.emplace(m, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::evaluate(const Eigen::VectorXd& point) const {
  if (point.size() != nvars_) {
    throw std::invalid_argument("Polynomial::evaluate: point dimension mismatch");
  }
  double total = 0.0;
  for (const auto& [m, c] : terms_) {
    double term = c;
    for (int i = 0; i < nvars_; ++i) {
      for (int k = 0; k < m.exponents[i]; ++k) term *= point[i];
    }
    total += term;
  }
  return total;
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [mono, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  check_same_nvars(*this, other, "add");
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  check_same_nvars(*this, other, "sub");
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double scale) {
  if (scale == 0.0) {
    *this = Polynomial(nvars_);
    return *this;
  }
  for (auto& [m, c] : terms_) c *= scale;
  return *this;
}

Polynomial operator+(const Polynomial& p, const Polynomial& q) {
  Polynomial r = p;
  r += q;
  return r;
}

Polynomial operator-(const Polynomial& p, const Polynomial& q) {
  Polynomial r = p;
  r -= q;
  return r;
}

Polynomial operator-(const Polynomial& p) {
  Polynomial r = p;
  r *= -1.0;
  return r;
}

Polynomial operator*(const Polynomial& p, const Polynomial& q) {
  check_same_nvars(p, q, "mul");
  Polynomial r(p.nvars());
  for (const auto& [mp, cp] : p.terms()) {
    for (const auto& [mq, cq] : q.terms()) {
      Monomial m = mp;
      for (int i = 0; i < m.nvars(); ++i) m.exponents[i] += mq.exponents[i];
      r.add_term(m, cp * cq);
    }
  }
  return r;
}

Polynomial operator*(double scale, const Polynomial& p) {
  Polynomial r = p;
  r *= scale;
  return r;
}

Polynomial operator*(const Polynomial& p, double scale) { return scale * p; }

Polynomial operator+(const Polynomial& p, double c) {
  return p + Polynomial::constant(p.nvars(), c);
}
Polynomial operator+(double c, const Polynomial& p) { return p + c; }
Polynomial operator-(const Polynomial& p, double c) { return p + (-c); }
Polynomial operator-(double c, const Polynomial& p) {
  return Polynomial::constant(p.nvars(), c) - p;
}

Polynomial differentiate(const Polynomial& p, int var_index) {
  if (var_index < 0 || var_index >= p.nvars()) {
    throw std::invalid_argument("differentiate: variable index out of range");
  }
  Polynomial r(p.nvars());
  for (const auto& [m, c] : p.terms()) {
    const int e = m.exponents[var_index];
    if (e == 0) continue;
    Monomial dm = m;
    dm.exponents[var_index] = e - 1;
    r.add_term(dm, c * e);
  }
  return r;
}

Polynomial truncate(const Polynomial& p, double tol) {
  Polynomial r(p.nvars());
  for (const auto& [m, c] : p.terms()) {
    if (std::abs(c) > tol) r.add_term(m, c);
  }
  return r;
}

namespace {

void enumerate_monomials(int nvars, int remaining, int var, std::vector<int>& current,
                         std::vector<Monomial>& out) {
  if (var == nvars - 1) {
    for (int e = 0; e <= remaining; ++e) {
      current[var] = e;
      out.emplace_back(current);
    }
    current[var] = 0;
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    current[var] = e;
    enumerate_monomials(nvars, remaining - e, var + 1, current, out);
  }
  current[var] = 0;
}

}  // namespace

std::vector<Monomial> monomial_basis(int nvars, int max_degree) {
  if (nvars < 1) throw std::invalid_argument("monomial_basis: nvars must be >= 1");
  if (max_degree < 0) throw std::invalid_argument("monomial_basis: max_degree must be >= 0");
  std::vector<Monomial> out;
  std::vector<int> current(nvars, 0);
  enumerate_monomials(nvars, max_degree, 0, current, out);
  std::sort(out.begin(), out.end(), GradedLexLess{});
  return out;
}

std::string to_string(const Monomial& m) {
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < m.nvars(); ++i) {
    if (m.exponents[i] == 0) continue;
    if (!first) os << "*";
    os << "x" << (i + 1) << "^" << m.exponents[i];
    first = false;
  }
  if (first) os << "1";
  return os.str();
}

std::string to_string(const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    if (!first) os << " + ";
    os << c;
    if (m.degree() > 0) os << "*" << to_string(m);
    first = false;
  }
  return os.str();
}

PolyVector::PolyVector(std::initializer_list<Polynomial> entries) : entries_(entries) {
  check_consistent();
}

PolyVector::PolyVector(std::vector<Polynomial> entries) : entries_(std::move(entries)) {
  check_consistent();
}

PolyVector::PolyVector(int size, int nvars) : entries_(size, Polynomial(nvars)) {}

void PolyVector::check_consistent() const {
  for (const auto& p : entries_) {
    if (p.nvars() != entries_.front().nvars()) {
      throw std::invalid_argument("PolyVector: entries disagree on variable count");
    }
  }
}

int PolyVector::nvars() const {
  if (entries_.empty()) return 0;
  return entries_.front().nvars();
}

Eigen::VectorXd PolyVector::evaluate(const Eigen::VectorXd& point) const {
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) out[i] = entries_[i].evaluate(point);
  return out;
}

PolyMatrix::PolyMatrix(int rows, int cols, int nvars)
    : rows_(rows), cols_(cols), nvars_(nvars),
      entries_(static_cast<std::size_t>(rows) * cols, Polynomial(nvars)) {}

std::size_t PolyMatrix::index(int r, int c) const {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_) {
    throw std::out_of_range("PolyMatrix: index out of range");
  }
  return static_cast<std::size_t>(r) * cols_ + c;
}

Eigen::MatrixXd PolyMatrix::evaluate(const Eigen::VectorXd& point) const {
  Eigen::MatrixXd out(rows_, cols_);
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) out(r, c) = (*this)(r, c).evaluate(point);
  }
  return out;
}

Polynomial lie_derivative(const Polynomial& b, const PolyVector& f, const PolyMatrix& g,
                          const PolyVector& u) {
  const int nx = b.nvars();
  if (f.size() != nx) throw std::invalid_argument("lie_derivative: f length != nvars of b");
  if (g.rows() != nx || g.cols() != u.size()) {
    throw std::invalid_argument("lie_derivative: g dimensions inconsistent with f and u");
  }
  Polynomial result(nx);
  for (int i = 0; i < nx; ++i) {
    Polynomial db = differentiate(b, i);
    if (db.is_zero()) continue;
    Polynomial flow = f[i];
    for (int j = 0; j < u.size(); ++j) flow += g(i, j) * u[j];
    result += db * flow;
  }
  return result;
}

Eigen::MatrixXd jacobian_at(const PolyVector& f, const Eigen::VectorXd& point) {
  const int n = f.size();
  if (n > 0 && point.size() != f.nvars()) {
    throw std::invalid_argument("jacobian_at: point dimension mismatch");
  }
  Eigen::MatrixXd J(n, point.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < point.size(); ++j) {
      J(i, j) = differentiate(f[i], j).evaluate(point);
    }
  }
  return J;
}

PolyVector gradient(const Polynomial& b) {
  std::vector<Polynomial> g;
  g.reserve(b.nvars());
  for (int i = 0; i < b.nvars(); ++i) g.push_back(differentiate(b, i));
  return PolyVector(std::move(g));
}

}  // namespace cbc
