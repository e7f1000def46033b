#include "diffiety/expr.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>

namespace diffiety {

namespace {

std::size_t hash_mix(std::size_t h, std::size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::size_t rat_hash(const Rat& q) {
  unsigned long a = mpz_fdiv_ui(q.get_num_mpz_t(), 2147483647UL);
  unsigned long b = mpz_fdiv_ui(q.get_den_mpz_t(), 2147483647UL);
  std::size_t h = (mpq_sgn(q.get_mpq_t()) < 0) ? 0x5bd1e995 : 0;
  h = hash_mix(h, a);
  h = hash_mix(h, b);
  return h;
}

std::size_t poly_hash(const Poly& p) {
  std::size_t h = p.t.size();
  for (const auto& [m, c] : p.t) {
    for (const auto& [a, e] : m.f) {
      h = hash_mix(h, a);
      h = hash_mix(h, static_cast<std::size_t>(e));
    }
    h = hash_mix(h, rat_hash(c));
  }
  return h;
}

}  // namespace

// --- Expr -------------------------------------------------------------

bool Expr::is_one() const {
  return is_rational() && rational_value() == 1;
}

Rat Expr::rational_value() const {
  if (!is_rational()) throw Error("expr: not a rational constant");
  return n_->num.constant_value() / n_->den.constant_value();
}

bool Expr::same(const Expr& o) const {
  if (n_ == o.n_) return true;
  if (!n_ || !o.n_) return false;
  if (n_->hash != o.n_->hash) return false;
  return n_->num == o.n_->num && n_->den == o.n_->den;
}

Expr Expr::operator-() const {
  return s_->from_fraction(poly_neg(n_->num), n_->den);
}

Expr Expr::pow(int e) const {
  const Session& s = *s_;
  if (e == 0) return s.one();
  if (e > 0) return s.from_fraction(poly_pow(s, n_->num, e), poly_pow(s, n_->den, e));
  if (n_->num.is_zero()) throw Error("expr: zero to a negative power");
  return s.from_fraction(poly_pow(s, n_->den, -e), poly_pow(s, n_->num, -e));
}

Expr operator+(const Expr& a, const Expr& b) {
  const Session& s = a.session();
  assert(&s == &b.session());
  Poly num = poly_add(s, poly_mul(s, a.num(), b.den()), poly_mul(s, b.num(), a.den()));
  return s.from_fraction(std::move(num), poly_mul(s, a.den(), b.den()));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  const Session& s = a.session();
  assert(&s == &b.session());
  return s.from_fraction(poly_mul(s, a.num(), b.num()), poly_mul(s, a.den(), b.den()));
}

Expr operator/(const Expr& a, const Expr& b) {
  const Session& s = a.session();
  assert(&s == &b.session());
  if (b.num().is_zero()) throw Error("expr: division by zero");
  return s.from_fraction(poly_mul(s, a.num(), b.den()), poly_mul(s, a.den(), b.num()));
}

Expr operator+(const Expr& a, long b) { return a + a.session().integer(b); }
Expr operator*(const Expr& a, long b) { return a * a.session().integer(b); }

std::string Expr::str() const {
  const Session& s = *s_;
  if (n_->den.is_constant()) return s.render_poly(n_->num);
  return "(" + s.render_poly(n_->num) + ")/(" + s.render_poly(n_->den) + ")";
}

int expr_cmp(const Expr& a, const Expr& b) {
  const Session& s = a.session();
  int c = poly_cmp(s, a.num(), b.num());
  if (c != 0) return c;
  return poly_cmp(s, a.den(), b.den());
}

// --- Session ----------------------------------------------------------

Session::Session() {
  zero_ = make(Poly::zero(), Poly::constant(Rat(1)));
  one_ = make(Poly::constant(Rat(1)), Poly::constant(Rat(1)));
}

Expr Session::make(Poly num, Poly den) const {
  if (den.is_zero()) throw Error("expr: zero denominator");
  if (num.is_zero()) {
    den = Poly::constant(Rat(1));
  } else {
    if (!den.is_constant()) {
      Poly g = poly_gcd(*this, num, den);
      if (!g.is_constant()) {
        auto qn = poly_try_divexact(*this, num, g);
        auto qd = poly_try_divexact(*this, den, g);
        if (!qn || !qd) throw Error("expr: gcd reduction failed");
        num = std::move(*qn);
        den = std::move(*qd);
      }
    }
    // unit normalization: monic denominator
    Rat lc = den.lead_coeff();
    if (lc != 1) {
      Rat inv = Rat(1) / lc;
      num = poly_scale(num, inv);
      den = poly_scale(den, inv);
    }
  }
  auto node = std::make_shared<Expr::Node>();
  node->num = std::move(num);
  node->den = std::move(den);
  node->hash = hash_mix(poly_hash(node->num), poly_hash(node->den));
  return Expr(this, std::move(node));
}

Expr Session::from_poly(Poly p) const { return make(std::move(p), Poly::constant(Rat(1))); }

Expr Session::from_fraction(Poly num, Poly den) const {
  return make(std::move(num), std::move(den));
}

Expr Session::rational(const Rat& q) const {
  Rat c = q;
  c.canonicalize();
  return make(Poly::constant(c), Poly::constant(Rat(1)));
}

Expr Session::coord(CoordId c) const { return from_poly(Poly::atom(intern_coord_atom(c))); }

Expr Session::atom_expr(AtomId id) const { return from_poly(Poly::atom(id)); }

SymbolId Session::func(const std::string& name, int arity) {
  if (symbols_by_name_.count(name)) throw Error("duplicate function symbol '" + name + "'");
  if (arity < 0) throw Error("negative arity");
  OpaqueSymbol sym;
  sym.name = name;
  sym.arity = arity;
  symbols_.push_back(std::move(sym));
  SymbolId id = static_cast<SymbolId>(symbols_.size() - 1);
  symbols_by_name_[name] = id;
  return id;
}

SymbolId Session::func(const std::string& name, const std::vector<CoordId>& params) {
  SymbolId id = func(name, static_cast<int>(params.size()));
  symbols_[id].params = params;
  return id;
}

void Session::set_derivative_override(SymbolId sym, int slot, const Expr& body) {
  OpaqueSymbol& sd = symbols_.at(sym);
  if (sd.params.empty()) throw Error("derivative override requires declared parameters");
  if (slot < 0 || slot >= sd.arity) throw Error("derivative override: bad slot");
  sd.deriv_override[slot] = body;
}

std::optional<SymbolId> Session::find_symbol(const std::string& name) const {
  auto it = symbols_by_name_.find(name);
  if (it == symbols_by_name_.end()) return std::nullopt;
  return it->second;
}

Expr Session::apply(SymbolId sym, const std::vector<Expr>& args) const {
  return apply(sym, std::vector<int>(symbols_.at(sym).arity, 0), args);
}

Expr Session::apply(SymbolId sym, const std::vector<int>& deriv,
                    const std::vector<Expr>& args) const {
  const OpaqueSymbol& sd = symbols_.at(sym);
  if (static_cast<int>(args.size()) != sd.arity || deriv.size() != args.size())
    throw Error("arity mismatch applying '" + sd.name + "'");
  for (int d : deriv)
    if (d < 0) throw Error("negative derivative order");

  // Declared antiderivative-style overrides collapse the formal derivative.
  for (std::size_t k = 0; k < deriv.size(); ++k) {
    if (deriv[k] > 0 && sd.deriv_override.count(static_cast<int>(k))) {
      for (std::size_t i = 0; i < args.size(); ++i) {
        Expr pc = coord(sd.params[i]);
        if (!args[i].same(pc))
          throw Error("derivative override of '" + sd.name +
                      "' requires application to its declared parameters");
      }
      Expr e = sd.deriv_override.at(static_cast<int>(k));
      std::vector<int> rest = deriv;
      rest[k] -= 1;
      for (std::size_t j = 0; j < rest.size(); ++j)
        for (int r = 0; r < rest[j]; ++r) e = diff_partial(e, sd.params[j]);
      return e;
    }
  }

  OpaqueApp app;
  app.sym = sym;
  app.deriv = deriv;
  app.args = args;
  return from_poly(Poly::atom(intern_app(std::move(app))));
}

const AtomData& Session::atom(AtomId id) const {
  std::lock_guard<std::mutex> lk(mu_);
  return atoms_.at(id);
}

AtomId Session::intern_coord_atom(CoordId c) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = coord_atoms_.find(c);
  if (it != coord_atoms_.end()) return it->second;
  AtomData a;
  a.is_coord = true;
  a.coord = c;
  a.hash = hash_mix(0xC0DE, c);
  atoms_.push_back(std::move(a));
  AtomId id = static_cast<AtomId>(atoms_.size() - 1);
  coord_atoms_[c] = id;
  return id;
}

AtomId Session::intern_app(OpaqueApp app) const {
  std::size_t h = hash_mix(0xA99, app.sym);
  for (int d : app.deriv) h = hash_mix(h, static_cast<std::size_t>(d));
  for (const Expr& e : app.args) h = hash_mix(h, e.hash());

  std::lock_guard<std::mutex> lk(mu_);
  auto& bucket = app_buckets_[h];
  for (AtomId id : bucket) {
    const AtomData& a = atoms_[id];
    if (a.is_coord || a.app.sym != app.sym || a.app.deriv != app.deriv) continue;
    bool eq = true;
    for (std::size_t i = 0; i < app.args.size() && eq; ++i)
      eq = a.app.args[i].same(app.args[i]);
    if (eq) return id;
  }
  AtomData a;
  a.is_coord = false;
  a.app = std::move(app);
  a.hash = h;
  atoms_.push_back(std::move(a));
  AtomId id = static_cast<AtomId>(atoms_.size() - 1);
  bucket.push_back(id);
  return id;
}

bool Session::atom_less(AtomId a, AtomId b) const {
  if (a == b) return false;
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = less_memo_.find({a, b});
    if (it != less_memo_.end()) return it->second;
  }
  AtomData da, db;
  {
    std::lock_guard<std::mutex> lk(mu_);
    da = atoms_.at(a);
    db = atoms_.at(b);
  }
  bool result;
  if (da.is_coord != db.is_coord) {
    result = da.is_coord;  // coordinates order before opaque applications
  } else if (da.is_coord) {
    result = chart_.coord_less(da.coord, db.coord);
  } else {
    const std::string& na = symbols_.at(da.app.sym).name;
    const std::string& nb = symbols_.at(db.app.sym).name;
    if (na != nb) {
      result = na < nb;
    } else if (da.app.deriv != db.app.deriv) {
      result = da.app.deriv < db.app.deriv;
    } else {
      int c = 0;
      for (std::size_t i = 0; i < da.app.args.size() && c == 0; ++i)
        c = expr_cmp(da.app.args[i], db.app.args[i]);
      result = c < 0;
    }
  }
  std::lock_guard<std::mutex> lk(mu_);
  less_memo_[{a, b}] = result;
  less_memo_[{b, a}] = a == b ? false : !result;
  return result;
}

// --- rendering ----------------------------------------------------------

std::string Session::render_atom(AtomId id) const {
  AtomData a = atom(id);
  if (a.is_coord) return chart_.name(a.coord);
  const OpaqueSymbol& sd = symbols_.at(a.app.sym);
  std::ostringstream os;
  os << sd.name;
  int total = 0;
  for (int d : a.app.deriv) total += d;
  if (total > 0) {
    if (sd.arity == 1) {
      if (a.app.deriv[0] <= 3)
        for (int i = 0; i < a.app.deriv[0]; ++i) os << "'";
      else
        os << "^(" << a.app.deriv[0] << ")";
    } else {
      os << "_(";
      for (int i = 0; i < sd.arity; ++i) os << (i ? "," : "") << a.app.deriv[i];
      os << ")";
    }
  }
  if (sd.arity > 0) {
    os << "(";
    for (int i = 0; i < sd.arity; ++i) os << (i ? "," : "") << a.app.args[i].str();
    os << ")";
  }
  return os.str();
}

std::string Session::render_poly(const Poly& p) const {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : p.t) {
    Rat q = c;
    bool neg = q < 0;
    if (neg) q = -q;
    if (first) {
      if (neg) os << "-";
      first = false;
    } else {
      os << (neg ? " - " : " + ");
    }
    bool unit_coeff = (q == 1) && !m.is_unit();
    if (!unit_coeff) os << to_string(q);
    bool need_star = !unit_coeff;
    for (const auto& [a, e] : m.f) {
      if (need_star) os << "*";
      os << render_atom(a);
      if (e != 1) os << "^" << e;
      need_star = true;
    }
  }
  return os.str();
}

// --- operations -----------------------------------------------------------

Expr normalize(const Expr& e) {
  return e.session().from_fraction(e.num(), e.den());
}

namespace {

// Derivative of a single atom; fractions can appear through opaque args.
Expr atom_diff(const Session& s, AtomId id, CoordId c) {
  AtomData a = s.atom(id);
  if (a.is_coord) return a.coord == c ? s.one() : s.zero();
  Expr acc = s.zero();
  for (std::size_t k = 0; k < a.app.args.size(); ++k) {
    Expr dk = diff_partial(a.app.args[k], c);
    if (dk.is_zero()) continue;
    std::vector<int> d = a.app.deriv;
    d[k] += 1;
    acc = acc + s.apply(a.app.sym, d, a.app.args) * dk;
  }
  return acc;
}

Expr poly_diff(const Session& s, const Poly& p, CoordId c) {
  Expr acc = s.zero();
  for (const auto& [m, q] : p.t) {
    for (std::size_t i = 0; i < m.f.size(); ++i) {
      auto [atom, e] = m.f[i];
      Expr da = atom_diff(s, atom, c);
      if (da.is_zero()) continue;
      Monomial rest;
      for (std::size_t j = 0; j < m.f.size(); ++j) {
        if (j == i) {
          if (e > 1) rest.f.emplace_back(atom, e - 1);
        } else {
          rest.f.push_back(m.f[j]);
        }
      }
      Poly term;
      term.t.emplace_back(std::move(rest), q * e);
      acc = acc + s.from_poly(std::move(term)) * da;
    }
  }
  return acc;
}

}  // namespace

Expr diff_partial(const Expr& e, CoordId c) {
  const Session& s = e.session();
  if (!depends_on(e, c)) return s.zero();
  Expr dn = poly_diff(s, e.num(), c);
  if (e.den().is_constant()) {
    Rat d = e.den().constant_value();
    return dn * s.rational(Rat(1) / d);
  }
  Expr dd = poly_diff(s, e.den(), c);
  Expr N = s.from_poly(e.num());
  Expr D = s.from_poly(e.den());
  return (dn * D - N * dd) / (D * D);
}

Expr diff_partial(const Expr& e, CoordId c, int times) {
  Expr r = e;
  for (int i = 0; i < times; ++i) r = diff_partial(r, c);
  return r;
}

namespace {

void atom_support(const Session& s, AtomId id, std::set<CoordId>& out,
                  std::set<AtomId>& seen) {
  if (!seen.insert(id).second) return;
  AtomData a = s.atom(id);
  if (a.is_coord) {
    out.insert(a.coord);
    return;
  }
  for (const Expr& arg : a.app.args) {
    std::set<AtomId> sub;
    poly_atoms(arg.num(), sub);
    poly_atoms(arg.den(), sub);
    for (AtomId x : sub) atom_support(s, x, out, seen);
  }
}

}  // namespace

std::set<CoordId> support(const Expr& e) {
  std::set<CoordId> out;
  std::set<AtomId> atoms, seen;
  poly_atoms(e.num(), atoms);
  poly_atoms(e.den(), atoms);
  for (AtomId a : atoms) atom_support(e.session(), a, out, seen);
  return out;
}

bool depends_on(const Expr& e, CoordId c) { return support(e).count(c) > 0; }

namespace {

Expr poly_map(const Session& s, const Poly& p,
              const std::function<Expr(AtomId)>& image) {
  Expr acc = s.zero();
  for (const auto& [m, q] : p.t) {
    Expr term = s.rational(q);
    for (const auto& [a, e] : m.f) term = term * image(a).pow(e);
    acc = acc + term;
  }
  return acc;
}

Expr map_atoms(const Expr& e, const std::function<Expr(AtomId)>& image) {
  const Session& s = e.session();
  Expr num = poly_map(s, e.num(), image);
  Expr den = poly_map(s, e.den(), image);
  return num / den;
}

}  // namespace

Expr substitute(const Expr& e, const std::map<CoordId, Expr>& bindings) {
  if (bindings.empty()) return normalize(e);
  const Session& s = e.session();
  std::map<AtomId, Expr> cache;
  std::function<Expr(AtomId)> image = [&](AtomId id) -> Expr {
    auto it = cache.find(id);
    if (it != cache.end()) return it->second;
    AtomData a = s.atom(id);
    Expr r;
    if (a.is_coord) {
      auto b = bindings.find(a.coord);
      r = b != bindings.end() ? b->second : s.coord(a.coord);
    } else {
      bool changed = false;
      std::vector<Expr> args;
      args.reserve(a.app.args.size());
      for (const Expr& arg : a.app.args) {
        Expr na = map_atoms(arg, image);
        changed = changed || !na.same(arg);
        args.push_back(std::move(na));
      }
      r = changed ? s.apply(a.app.sym, a.app.deriv, args) : s.atom_expr(id);
    }
    cache.emplace(id, r);
    return r;
  };
  return map_atoms(e, image);
}

Expr instantiate(const Expr& e, const std::map<SymbolId, Expr>& bodies) {
  if (bodies.empty()) return e;
  const Session& s = e.session();
  std::map<AtomId, Expr> cache;
  std::function<Expr(AtomId)> image = [&](AtomId id) -> Expr {
    auto it = cache.find(id);
    if (it != cache.end()) return it->second;
    AtomData a = s.atom(id);
    Expr r;
    if (a.is_coord) {
      r = s.coord(a.coord);
    } else {
      std::vector<Expr> args;
      args.reserve(a.app.args.size());
      for (const Expr& arg : a.app.args) args.push_back(map_atoms(arg, image));
      auto b = bodies.find(a.app.sym);
      if (b != bodies.end()) {
        const OpaqueSymbol& sd = s.symbol(a.app.sym);
        if (sd.params.empty())
          throw Error("instantiate: symbol '" + sd.name + "' has no declared parameters");
        for (std::size_t i = 0; i < args.size(); ++i)
          if (!args[i].same(s.coord(sd.params[i])))
            throw Error("instantiate: '" + sd.name +
                        "' must be applied to its declared parameters");
        Expr body = instantiate(b->second, bodies);
        for (std::size_t k = 0; k < a.app.deriv.size(); ++k)
          body = diff_partial(body, sd.params[k], a.app.deriv[k]);
        r = body;
      } else {
        r = s.apply(a.app.sym, a.app.deriv, args);
      }
    }
    cache.emplace(id, r);
    return r;
  };
  return map_atoms(e, image);
}

Expr instantiate(const Expr& e, SymbolId sym, const Expr& body) {
  return instantiate(e, std::map<SymbolId, Expr>{{sym, body}});
}

namespace {

struct EvalCtx {
  const std::map<CoordId, Rat>& point;
  const NumericInterps& interps;
  std::map<AtomId, Rat> atom_cache;
  // derivative bodies per (symbol, deriv)
  std::map<std::pair<SymbolId, std::vector<int>>, Expr> body_cache;
};

Rat eval_expr(const Session& s, const Expr& e, EvalCtx& ctx);

Rat eval_atom(const Session& s, AtomId id, EvalCtx& ctx) {
  auto it = ctx.atom_cache.find(id);
  if (it != ctx.atom_cache.end()) return it->second;
  AtomData a = s.atom(id);
  Rat v;
  if (a.is_coord) {
    auto p = ctx.point.find(a.coord);
    if (p == ctx.point.end())
      throw Error("eval: unbound coordinate '" + s.chart().name(a.coord) + "'");
    v = p->second;
  } else {
    auto ii = ctx.interps.find(a.app.sym);
    if (ii == ctx.interps.end())
      throw Error("eval: no interpretation for '" + s.symbol(a.app.sym).name + "'");
    const Interp& interp = ii->second;
    auto key = std::make_pair(a.app.sym, a.app.deriv);
    auto bc = ctx.body_cache.find(key);
    Expr body;
    if (bc != ctx.body_cache.end()) {
      body = bc->second;
    } else {
      body = interp.body;
      for (std::size_t k = 0; k < a.app.deriv.size(); ++k)
        body = diff_partial(body, interp.params.at(k), a.app.deriv[k]);
      ctx.body_cache.emplace(key, body);
    }
    std::map<CoordId, Rat> inner = ctx.point;
    for (std::size_t k = 0; k < a.app.args.size(); ++k)
      inner[interp.params.at(k)] = eval_expr(s, a.app.args[k], ctx);
    EvalCtx inner_ctx{inner, ctx.interps, {}, {}};
    v = eval_expr(s, body, inner_ctx);
  }
  ctx.atom_cache.emplace(id, v);
  return v;
}

Rat eval_poly(const Session& s, const Poly& p, EvalCtx& ctx) {
  Rat acc(0);
  for (const auto& [m, c] : p.t) {
    Rat term = c;
    for (const auto& [a, e] : m.f) {
      Rat av = eval_atom(s, a, ctx);
      for (int i = 0; i < e; ++i) term *= av;
    }
    acc += term;
  }
  return acc;
}

Rat eval_expr(const Session& s, const Expr& e, EvalCtx& ctx) {
  Rat den = eval_poly(s, e.den(), ctx);
  if (den == 0) throw Error("eval: division by numeric zero");
  return eval_poly(s, e.num(), ctx) / den;
}

}  // namespace

Rat eval_rational(const Expr& e, const std::map<CoordId, Rat>& point,
                  const NumericInterps& interps) {
  EvalCtx ctx{point, interps, {}, {}};
  return eval_expr(e.session(), e, ctx);
}

double eval_numeric(const Expr& e, const std::map<CoordId, Rat>& point,
                    const NumericInterps& interps) {
  return eval_rational(e, point, interps).get_d();
}

}  // namespace diffiety
