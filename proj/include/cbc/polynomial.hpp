#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <map>
#include <string>
#include <vector>

namespace cbc {

// Exponent vector of a single monomial. The vector length must equal the
// ambient variable count of whatever polynomial it lives in.
struct Monomial {
  std::vector<int> exponents;

  Monomial() = default;
  explicit Monomial(std::vector<int> e) : exponents(std::move(e)) {}

  int degree() const;
  int nvars() const { return static_cast<int>(exponents.size()); }

  bool operator==(const Monomial& other) const { return exponents == other.exponents; }
};

// Graded lexicographic order: lower total degree first; within a degree,
// higher powers of earlier variables first (x1^2 < x1*x2 < x2^2).
// Fixed globally so that compiled SDPs are reproducible run to run.
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

// Sparse multivariate polynomial with double coefficients. Terms with
// coefficient exactly 0.0 are never stored.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GradedLexLess>;

  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, double value);
  // The polynomial x_i.
  static Polynomial variable(int nvars, int index);
  static Polynomial from_terms(int nvars,
                               std::initializer_list<std::pair<double, std::vector<int>>> terms);

  int nvars() const { return nvars_; }
  // Total degree; -1 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  const TermMap& terms() const { return terms_; }
  std::size_t num_terms() const { return terms_.size(); }

  double coefficient(const Monomial& m) const;
  // Accumulates into the stored coefficient, pruning exact zeros.
  void add_term(const Monomial& m, double coeff);

  double evaluate(const Eigen::VectorXd& point) const;
  // Largest |coefficient|; 0 for the zero polynomial.
  double max_abs_coeff() const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double scale);

 private:
  int nvars_ = 0;
  TermMap terms_;
};

Polynomial operator+(const Polynomial& p, const Polynomial& q);
Polynomial operator-(const Polynomial& p, const Polynomial& q);
Polynomial operator-(const Polynomial& p);
Polynomial operator*(const Polynomial& p, const Polynomial& q);
Polynomial operator*(double scale, const Polynomial& p);
Polynomial operator*(const Polynomial& p, double scale);
Polynomial operator+(const Polynomial& p, double c);
Polynomial operator+(double c, const Polynomial& p);
Polynomial operator-(const Polynomial& p, double c);
Polynomial operator-(double c, const Polynomial& p);

// Exact partial derivative with respect to variable var_index.
Polynomial differentiate(const Polynomial& p, int var_index);

// Drops terms with |coefficient| <= tol. Meant for cleaning solver output;
// symbolic operations prune exact zeros only.
Polynomial truncate(const Polynomial& p, double tol = 1e-12);

// All monomials of total degree <= max_degree in graded-lex order.
// Length is C(nvars + max_degree, max_degree).
std::vector<Monomial> monomial_basis(int nvars, int max_degree);

std::string to_string(const Monomial& m);
std::string to_string(const Polynomial& p);

// Column vector of polynomials sharing one ambient variable count.
class PolyVector {
 public:
  PolyVector() = default;
  PolyVector(std::initializer_list<Polynomial> entries);
  explicit PolyVector(std::vector<Polynomial> entries);
  // Zero vector.
  PolyVector(int size, int nvars);

  int size() const { return static_cast<int>(entries_.size()); }
  int nvars() const;
  const Polynomial& operator[](int i) const { return entries_.at(i); }
  Polynomial& operator[](int i) { return entries_.at(i); }

  Eigen::VectorXd evaluate(const Eigen::VectorXd& point) const;

 private:
  void check_consistent() const;
  std::vector<Polynomial> entries_;
};

// Dense matrix of polynomials sharing one ambient variable count.
class PolyMatrix {
 public:
  PolyMatrix() = default;
  PolyMatrix(int rows, int cols, int nvars);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nvars() const { return nvars_; }

  const Polynomial& operator()(int r, int c) const { return entries_.at(index(r, c)); }
  Polynomial& operator()(int r, int c) { return entries_.at(index(r, c)); }

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& point) const;

 private:
  std::size_t index(int r, int c) const;
  int rows_ = 0;
  int cols_ = 0;
  int nvars_ = 0;
  std::vector<Polynomial> entries_;
};

// d/dt b(x(t)) along dx/dt = f(x) + g(x) u(x), expanded symbolically:
// sum_i db/dx_i * (f_i + sum_j g_ij u_j).
Polynomial lie_derivative(const Polynomial& b, const PolyVector& f, const PolyMatrix& g,
                          const PolyVector& u);

// Jacobian of f evaluated at a point, via differentiate + evaluate.
Eigen::MatrixXd jacobian_at(const PolyVector& f, const Eigen::VectorXd& point);

// Gradient of b as a vector of polynomials.
PolyVector gradient(const Polynomial& b);

}  // namespace cbc
