#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "diffiety/common.hpp"

namespace diffiety {

class Session;

// Atoms are the transcendence basis of the expression field: chart
// coordinates and opaque function applications. They are interned by the
// session; polynomials refer to them by id.
using AtomId = std::uint32_t;

// Product of atom powers, factors sorted by the session's atom order,
// exponents strictly positive. The empty monomial is 1.
struct Monomial {
  std::vector<std::pair<AtomId, int>> f;

  bool is_unit() const { return f.empty(); }
  int degree() const;
  bool operator==(const Monomial& o) const { return f == o.f; }
};

Monomial mono_mul(const Session& s, const Monomial& a, const Monomial& b);
bool mono_divides(const Monomial& a, const Monomial& b);  // a | b
Monomial mono_div(const Session& s, const Monomial& b, const Monomial& a);
Monomial mono_gcd(const Session& s, const Monomial& a, const Monomial& b);
// Graded-lexicographic order induced by the session's atom order.
int mono_cmp(const Session& s, const Monomial& a, const Monomial& b);

// Multivariate polynomial over the atoms with rational coefficients.
// Terms are kept sorted descending in the monomial order with nonzero
// coefficients: the representation is canonical.
class Poly {
 public:
  std::vector<std::pair<Monomial, Rat>> t;

  bool is_zero() const { return t.empty(); }
  bool is_constant() const { return t.empty() || (t.size() == 1 && t[0].first.is_unit()); }
  Rat constant_value() const;
  const Rat& lead_coeff() const;
  const Monomial& lead_mono() const;
  int total_degree() const;
  bool operator==(const Poly& o) const { return t == o.t; }

  static Poly zero() { return Poly{}; }
  static Poly constant(const Rat& c);
  static Poly atom(AtomId a);
};

Poly poly_add(const Session& s, const Poly& a, const Poly& b);
Poly poly_neg(const Poly& a);
Poly poly_sub(const Session& s, const Poly& a, const Poly& b);
Poly poly_mul(const Session& s, const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, const Rat& c);
Poly poly_mono_mul(const Session& s, const Poly& a, const Monomial& m, const Rat& c);
Poly poly_pow(const Session& s, const Poly& a, int e);

// Exact division; nullopt when b does not divide a.
std::optional<Poly> poly_try_divexact(const Session& s, const Poly& a, const Poly& b);

// Monomial content of the terms (gcd of the monomials).
Monomial poly_mono_content(const Session& s, const Poly& a);
// Rational content: positive gcd of the coefficients.
Rat poly_content(const Poly& a);

// Gcd up to a rational unit. Zero inputs behave as gcd(0, b) = b.
Poly poly_gcd(const Session& s, const Poly& a, const Poly& b);

void poly_atoms(const Poly& a, std::set<AtomId>& out);

int poly_cmp(const Session& s, const Poly& a, const Poly& b);

}  // namespace diffiety
