#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "diffiety/chart.hpp"
#include "diffiety/poly.hpp"

namespace diffiety {

class Session;
class Expr;

using SymbolId = std::uint32_t;

// Opaque function symbol of fixed arity. Formal derivatives are tracked as a
// multi-order per argument slot and stay opaque unless an override is
// declared for the slot (used for symbols defined as antiderivatives).
struct OpaqueSymbol {
  std::string name;
  int arity = 0;
  std::vector<CoordId> params;           // declared argument coordinates, may be empty
  std::map<int, Expr> deriv_override;    // slot -> body over params
};

struct OpaqueApp {
  SymbolId sym = 0;
  std::vector<int> deriv;  // length == arity
  std::vector<Expr> args;  // length == arity
};

struct AtomData {
  bool is_coord = false;
  CoordId coord = 0;
  OpaqueApp app;
  std::size_t hash = 0;
};

// Immutable exact symbolic expression: a reduced fraction of polynomials
// over the session's atoms. Construction canonicalizes, so structurally
// equal values have identical representations.
class Expr {
 public:
  Expr() = default;

  bool valid() const { return n_ != nullptr; }
  const Session& session() const { return *s_; }

  const Poly& num() const { return n_->num; }
  const Poly& den() const { return n_->den; }

  bool is_zero() const { return n_->num.is_zero(); }
  bool is_one() const;
  bool is_rational() const { return n_->num.is_constant() && n_->den.is_constant(); }
  Rat rational_value() const;

  bool same(const Expr& o) const;

  Expr operator-() const;
  Expr pow(int e) const;

  std::size_t hash() const { return n_->hash; }
  std::string str() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator+(const Expr& a, long b);
  friend Expr operator*(const Expr& a, long b);

 private:
  friend class Session;
  struct Node {
    Poly num;
    Poly den;
    std::size_t hash = 0;
  };
  Expr(const Session* s, std::shared_ptr<const Node> n) : s_(s), n_(std::move(n)) {}

  const Session* s_ = nullptr;
  std::shared_ptr<const Node> n_;
};

// Numeric interpretation of an opaque symbol: a concrete expression over
// parameter coordinates. Polynomial bodies keep derivative values exact.
struct Interp {
  std::vector<CoordId> params;
  Expr body;
};
using NumericInterps = std::map<SymbolId, Interp>;

// Owns the chart, the atom intern table and the opaque symbol registry.
// Expressions are tied to the session that produced them. Interning is
// internally synchronized; everything else is frozen during computations.
class Session {
 public:
  Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  Chart& chart() { return chart_; }
  const Chart& chart() const { return chart_; }

  // Expression factories.
  Expr zero() const { return zero_; }
  Expr one() const { return one_; }
  Expr rational(const Rat& q) const;
  Expr integer(long v) const { return rational(Rat(v)); }
  Expr coord(CoordId c) const;
  Expr x(int i = 0) const { return coord(chart_.independent(i)); }
  Expr w(int dep, int s) const { return coord(chart_.jet1(dep, s)); }

  SymbolId func(const std::string& name, int arity);
  SymbolId func(const std::string& name, const std::vector<CoordId>& params);
  void set_derivative_override(SymbolId sym, int slot, const Expr& body);
  const OpaqueSymbol& symbol(SymbolId id) const { return symbols_.at(id); }
  std::optional<SymbolId> find_symbol(const std::string& name) const;

  Expr apply(SymbolId sym, const std::vector<Expr>& args) const;
  Expr apply(SymbolId sym, const std::vector<int>& deriv, const std::vector<Expr>& args) const;

  // Atom services (poly layer).
  const AtomData& atom(AtomId id) const;
  bool atom_less(AtomId a, AtomId b) const;
  AtomId intern_coord_atom(CoordId c) const;
  AtomId intern_app(OpaqueApp app) const;
  Expr atom_expr(AtomId id) const;

  Expr from_poly(Poly p) const;
  Expr from_fraction(Poly num, Poly den) const;

  std::string render_atom(AtomId id) const;
  std::string render_poly(const Poly& p) const;

 private:
  friend class Expr;
  Expr make(Poly num, Poly den) const;

  Chart chart_;
  std::vector<OpaqueSymbol> symbols_;
  std::map<std::string, SymbolId> symbols_by_name_;

  mutable std::mutex mu_;
  mutable std::vector<AtomData> atoms_;
  mutable std::map<CoordId, AtomId> coord_atoms_;
  mutable std::unordered_map<std::size_t, std::vector<AtomId>> app_buckets_;
  mutable std::map<std::pair<AtomId, AtomId>, bool> less_memo_;

  Expr zero_;
  Expr one_;
};

// --- symbolic operations ------------------------------------------------

// Canonicalization is maintained by construction; exposed for the contract.
Expr normalize(const Expr& e);

Expr diff_partial(const Expr& e, CoordId c);
Expr diff_partial(const Expr& e, CoordId c, int times);

// Simultaneous substitution of coordinates, then canonicalization.
Expr substitute(const Expr& e, const std::map<CoordId, Expr>& bindings);

// Replace a symbol with declared params by a concrete body: every formal
// derivative of the symbol is mapped to the matching derivative of the body.
// The symbol must always be applied to its declared parameter coordinates.
Expr instantiate(const Expr& e, SymbolId sym, const Expr& body);
Expr instantiate(const Expr& e, const std::map<SymbolId, Expr>& bodies);

// Coordinates the expression actually depends on (recursing into opaque
// arguments).
std::set<CoordId> support(const Expr& e);
bool depends_on(const Expr& e, CoordId c);

// Exact rational evaluation; throws on unbound leaves, missing
// interpretations, and numeric division by zero.
Rat eval_rational(const Expr& e, const std::map<CoordId, Rat>& point,
                  const NumericInterps& interps = {});
double eval_numeric(const Expr& e, const std::map<CoordId, Rat>& point,
                    const NumericInterps& interps = {});

int expr_cmp(const Expr& a, const Expr& b);

}  // namespace diffiety
