#pragma once

#include <random>
#include <vector>

#include "cbc/polynomial.hpp"

namespace cbc::testing {

// Platform-independent uniform double in [lo, hi).
inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

inline Polynomial random_polynomial(std::mt19937_64& rng, int nvars, int max_degree,
                                    int max_terms = 8, double coeff_range = 4.0) {
  Polynomial p(nvars);
  const auto basis = monomial_basis(nvars, max_degree);
  const int nterms = 1 + static_cast<int>(rng() % max_terms);
  for (int t = 0; t < nterms; ++t) {
    const auto& mono = basis[rng() % basis.size()];
    p.add_term(mono, uniform(rng, -coeff_range, coeff_range));
  }
  return p;
}

// Van der Pol oscillator: f = (x2, (1 - x1^2) x2 - x1), g = (0, 1)'.
inline PolyVector vanderpol_f() {
  Polynomial f1 = Polynomial::variable(2, 1);
  Polynomial f2 = Polynomial::from_terms(2, {{1.0, {0, 1}}, {-1.0, {2, 1}}, {-1.0, {1, 0}}});
  return PolyVector{f1, f2};
}

inline PolyMatrix vanderpol_g() {
  PolyMatrix g(2, 1, 2);
  g(1, 0) = Polynomial::constant(2, 1.0);
  return g;
}

// The published quartic certificate for the Van der Pol example.
inline Polynomial appendix_a_cbc() {
  return Polynomial::from_terms(2, {{-95.709, {4, 0}},
                                    {-105.270, {3, 1}},
                                    {-653.887, {2, 2}},
                                    {175.891, {1, 3}},
                                    {-229.534, {0, 4}},
                                    {-20.112, {3, 0}},
                                    {-59.575, {2, 1}},
                                    {-52.366, {1, 2}},
                                    {-59.885, {0, 3}},
                                    {258.824, {2, 0}},
                                    {-48.561, {1, 1}},
                                    {-127.349, {0, 2}},
                                    {68.246, {1, 0}},
                                    {71.585, {0, 1}},
                                    {419.753, {0, 0}}});
}

}  // namespace cbc::testing
