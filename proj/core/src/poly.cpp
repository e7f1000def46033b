#include "diffiety/poly.hpp"

#include <algorithm>
#include <map>

#include "diffiety/expr.hpp"

namespace diffiety {

int Monomial::degree() const {
  int d = 0;
  for (const auto& [a, e] : f) d += e;
  return d;
}

Monomial mono_mul(const Session& s, const Monomial& a, const Monomial& b) {
  Monomial r;
  r.f.reserve(a.f.size() + b.f.size());
  std::size_t i = 0, j = 0;
  while (i < a.f.size() && j < b.f.size()) {
    if (a.f[i].first == b.f[j].first) {
      r.f.emplace_back(a.f[i].first, a.f[i].second + b.f[j].second);
      ++i, ++j;
    } else if (s.atom_less(a.f[i].first, b.f[j].first)) {
      r.f.push_back(a.f[i++]);
    } else {
      r.f.push_back(b.f[j++]);
    }
  }
  for (; i < a.f.size(); ++i) r.f.push_back(a.f[i]);
  for (; j < b.f.size(); ++j) r.f.push_back(b.f[j]);
  return r;
}

bool mono_divides(const Monomial& a, const Monomial& b) {
  std::size_t j = 0;
  for (const auto& [atom, e] : a.f) {
    while (j < b.f.size() && b.f[j].first != atom) ++j;
    if (j == b.f.size() || b.f[j].second < e) return false;
  }
  return true;
}

Monomial mono_div(const Session& s, const Monomial& b, const Monomial& a) {
  (void)s;
  Monomial r;
  std::size_t j = 0;
  for (const auto& [atom, e] : b.f) {
    int sub = 0;
    if (j < a.f.size() && a.f[j].first == atom) sub = a.f[j++].second;
    if (e - sub < 0) throw Error("mono_div: not divisible");
    if (e - sub > 0) r.f.emplace_back(atom, e - sub);
  }
  if (j != a.f.size()) throw Error("mono_div: not divisible");
  return r;
}

Monomial mono_gcd(const Session& s, const Monomial& a, const Monomial& b) {
  (void)s;
  Monomial r;
  std::size_t j = 0;
  for (const auto& [atom, e] : a.f) {
    while (j < b.f.size() && b.f[j].first != atom) ++j;
    if (j < b.f.size() && b.f[j].first == atom)
      r.f.emplace_back(atom, std::min(e, b.f[j].second));
  }
  return r;
}

int mono_cmp(const Session& s, const Monomial& a, const Monomial& b) {
  int da = a.degree(), db = b.degree();
  if (da != db) return da < db ? -1 : 1;
  std::size_t i = 0, j = 0;
  while (i < a.f.size() && j < b.f.size()) {
    AtomId aa = a.f[i].first, bb = b.f[j].first;
    if (aa != bb) return s.atom_less(aa, bb) ? 1 : -1;  // earlier atom => larger
    if (a.f[i].second != b.f[j].second)
      return a.f[i].second > b.f[j].second ? 1 : -1;
    ++i, ++j;
  }
  return 0;  // equal total degree with equal shared prefix forces equality
}

Rat Poly::constant_value() const {
  if (t.empty()) return Rat(0);
  if (!is_constant()) throw Error("poly: not a constant");
  return t[0].second;
}

const Rat& Poly::lead_coeff() const {
  if (t.empty()) throw Error("poly: lead of zero");
  return t[0].second;
}

const Monomial& Poly::lead_mono() const {
  if (t.empty()) throw Error("poly: lead of zero");
  return t[0].first;
}

int Poly::total_degree() const {
  int d = 0;
  for (const auto& [m, c] : t) d = std::max(d, m.degree());
  return d;
}

Poly Poly::constant(const Rat& c) {
  Poly p;
  if (c != 0) p.t.emplace_back(Monomial{}, c);
  return p;
}

Poly Poly::atom(AtomId a) {
  Poly p;
  Monomial m;
  m.f.emplace_back(a, 1);
  p.t.emplace_back(std::move(m), Rat(1));
  return p;
}

Poly poly_add(const Session& s, const Poly& a, const Poly& b) {
  Poly r;
  r.t.reserve(a.t.size() + b.t.size());
  std::size_t i = 0, j = 0;
  while (i < a.t.size() && j < b.t.size()) {
    int c = mono_cmp(s, a.t[i].first, b.t[j].first);
    if (c == 0) {
      Rat v = a.t[i].second + b.t[j].second;
      if (v != 0) r.t.emplace_back(a.t[i].first, v);
      ++i, ++j;
    } else if (c > 0) {
      r.t.push_back(a.t[i++]);
    } else {
      r.t.push_back(b.t[j++]);
    }
  }
  for (; i < a.t.size(); ++i) r.t.push_back(a.t[i]);
  for (; j < b.t.size(); ++j) r.t.push_back(b.t[j]);
  return r;
}

Poly poly_neg(const Poly& a) {
  Poly r = a;
  for (auto& [m, c] : r.t) c = -c;
  return r;
}

Poly poly_sub(const Session& s, const Poly& a, const Poly& b) {
  return poly_add(s, a, poly_neg(b));
}

Poly poly_scale(const Poly& a, const Rat& c) {
  if (c == 0) return Poly::zero();
  Poly r = a;
  for (auto& [m, q] : r.t) q *= c;
  return r;
}

Poly poly_mono_mul(const Session& s, const Poly& a, const Monomial& m, const Rat& c) {
  if (c == 0) return Poly::zero();
  Poly r;
  r.t.reserve(a.t.size());
  for (const auto& [am, ac] : a.t) r.t.emplace_back(mono_mul(s, am, m), ac * c);
  // multiplying by a fixed monomial preserves the term order
  return r;
}

Poly poly_mul(const Session& s, const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly::zero();
  if (a.t.size() == 1) return poly_mono_mul(s, b, a.t[0].first, a.t[0].second);
  if (b.t.size() == 1) return poly_mono_mul(s, a, b.t[0].first, b.t[0].second);
  auto cmp = [&s](const Monomial& x, const Monomial& y) { return mono_cmp(s, x, y) > 0; };
  std::map<Monomial, Rat, decltype(cmp)> acc(cmp);
  for (const auto& [am, ac] : a.t)
    for (const auto& [bm, bc] : b.t) {
      Monomial m = mono_mul(s, am, bm);
      auto [it, fresh] = acc.emplace(std::move(m), ac * bc);
      if (!fresh) it->second += ac * bc;
    }
  Poly r;
  for (const auto& [m, c] : acc)
    if (c != 0) r.t.emplace_back(m, c);
  return r;
}

Poly poly_pow(const Session& s, const Poly& a, int e) {
  if (e < 0) throw Error("poly_pow: negative exponent");
  Poly r = Poly::constant(Rat(1));
  Poly base = a;
  while (e > 0) {
    if (e & 1) r = poly_mul(s, r, base);
    e >>= 1;
    if (e) base = poly_mul(s, base, base);
  }
  return r;
}

std::optional<Poly> poly_try_divexact(const Session& s, const Poly& a, const Poly& b) {
  if (b.is_zero()) throw Error("poly division by zero");
  Poly r = a;
  Poly q;
  while (!r.is_zero()) {
    if (!mono_divides(b.lead_mono(), r.lead_mono())) return std::nullopt;
    Monomial qm = mono_div(s, r.lead_mono(), b.lead_mono());
    Rat qc = r.lead_coeff() / b.lead_coeff();
    Poly term;
    term.t.emplace_back(qm, qc);
    q = poly_add(s, q, term);
    r = poly_sub(s, r, poly_mono_mul(s, b, qm, qc));
  }
  return q;
}

Monomial poly_mono_content(const Session& s, const Poly& a) {
  Monomial g;
  bool first = true;
  for (const auto& [m, c] : a.t) {
    if (first) {
      g = m;
      first = false;
    } else {
      g = mono_gcd(s, g, m);
    }
    if (g.is_unit()) break;
  }
  return g;
}

Rat poly_content(const Poly& a) {
  if (a.is_zero()) return Rat(0);
  Int gnum = 0, lden = 1;
  for (const auto& [m, c] : a.t) {
    Int n = abs(c.get_num());
    Int d = c.get_den();
    mpz_gcd(gnum.get_mpz_t(), gnum.get_mpz_t(), n.get_mpz_t());
    mpz_lcm(lden.get_mpz_t(), lden.get_mpz_t(), d.get_mpz_t());
  }
  Rat r(gnum, lden);
  r.canonicalize();
  return r;
}

void poly_atoms(const Poly& a, std::set<AtomId>& out) {
  for (const auto& [m, c] : a.t)
    for (const auto& [atom, e] : m.f) out.insert(atom);
}

int poly_cmp(const Session& s, const Poly& a, const Poly& b) {
  std::size_t n = std::min(a.t.size(), b.t.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = mono_cmp(s, a.t[i].first, b.t[i].first);
    if (c != 0) return c;
    int cc = cmp(a.t[i].second, b.t[i].second);
    if (cc != 0) return cc;
  }
  if (a.t.size() != b.t.size()) return a.t.size() < b.t.size() ? -1 : 1;
  return 0;
}

// --- gcd ------------------------------------------------------------------

namespace {

// Univariate view in a main atom: degree -> coefficient polynomial.
using Uni = std::map<int, Poly>;

Uni to_uni(const Session& s, const Poly& p, AtomId v) {
  Uni u;
  for (const auto& [m, c] : p.t) {
    int deg = 0;
    Monomial rest;
    for (const auto& [atom, e] : m.f) {
      if (atom == v)
        deg = e;
      else
        rest.f.emplace_back(atom, e);
    }
    Poly term;
    term.t.emplace_back(std::move(rest), c);
    auto [it, fresh] = u.emplace(deg, term);
    if (!fresh) it->second = poly_add(s, it->second, term);
  }
  for (auto it = u.begin(); it != u.end();)
    it = it->second.is_zero() ? u.erase(it) : std::next(it);
  return u;
}

Poly from_uni(const Session& s, const Uni& u, AtomId v) {
  Poly r;
  for (const auto& [deg, coeff] : u) {
    Poly vpow = deg == 0 ? Poly::constant(Rat(1)) : poly_pow(s, Poly::atom(v), deg);
    r = poly_add(s, r, poly_mul(s, coeff, vpow));
  }
  return r;
}

int uni_deg(const Uni& u) { return u.empty() ? -1 : u.rbegin()->first; }

Uni uni_scale(const Session& s, const Uni& u, const Poly& f) {
  Uni r;
  for (const auto& [d, c] : u) {
    Poly p = poly_mul(s, c, f);
    if (!p.is_zero()) r.emplace(d, std::move(p));
  }
  return r;
}

Uni uni_sub(const Session& s, const Uni& a, const Uni& b) {
  Uni r = a;
  for (const auto& [d, c] : b) {
    auto it = r.find(d);
    if (it == r.end()) {
      r.emplace(d, poly_neg(c));
    } else {
      it->second = poly_sub(s, it->second, c);
      if (it->second.is_zero()) r.erase(it);
    }
  }
  return r;
}

Uni uni_shift(const Uni& u, int k) {
  Uni r;
  for (const auto& [d, c] : u) r.emplace(d + k, c);
  return r;
}

Poly gcd_fold(const Session& s, const Uni& u) {
  Poly g = Poly::zero();
  for (const auto& [d, c] : u) {
    g = poly_gcd(s, g, c);
    if (g.is_constant() && !g.is_zero()) return Poly::constant(Rat(1));
  }
  return g;
}

Uni uni_divexact(const Session& s, const Uni& u, const Poly& f) {
  Uni r;
  for (const auto& [d, c] : u) {
    auto q = poly_try_divexact(s, c, f);
    if (!q) throw Error("gcd: content division failed");
    r.emplace(d, std::move(*q));
  }
  return r;
}

// Pseudo-remainder of a by b in the main atom.
Uni uni_prem(const Session& s, Uni a, const Uni& b) {
  int db = uni_deg(b);
  const Poly& lb = b.rbegin()->second;
  while (uni_deg(a) >= db) {
    int da = uni_deg(a);
    Poly la = a.rbegin()->second;
    a = uni_sub(s, uni_scale(s, a, lb), uni_shift(uni_scale(s, b, la), da - db));
    if (uni_deg(a) == da) throw Error("gcd: pseudo-division stalled");
  }
  return a;
}

}  // namespace

Poly poly_gcd(const Session& s, const Poly& a, const Poly& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.is_constant() || b.is_constant()) return Poly::constant(Rat(1));

  // split monomial content
  Monomial ma = poly_mono_content(s, a);
  Monomial mb = poly_mono_content(s, b);
  Monomial mg = mono_gcd(s, ma, mb);
  Poly A = a, B = b;
  if (!ma.is_unit()) {
    Poly da;
    da.t.emplace_back(ma, Rat(1));
    A = *poly_try_divexact(s, a, da);
  }
  if (!mb.is_unit()) {
    Poly db;
    db.t.emplace_back(mb, Rat(1));
    B = *poly_try_divexact(s, b, db);
  }
  Poly mono_part;
  mono_part.t.emplace_back(mg, Rat(1));
  if (A.is_constant() || B.is_constant()) return mono_part;

  std::set<AtomId> sa, sb;
  poly_atoms(A, sa);
  poly_atoms(B, sb);
  std::vector<AtomId> common;
  for (AtomId x : sa)
    if (sb.count(x)) common.push_back(x);
  if (common.empty()) return mono_part;
  AtomId v = common.front();
  for (AtomId x : common)
    if (s.atom_less(v, x)) v = x;  // use the largest common atom as main

  Uni ua = to_uni(s, A, v);
  Uni ub = to_uni(s, B, v);
  Poly ca = gcd_fold(s, ua);
  Poly cb = gcd_fold(s, ub);
  Uni pa = uni_divexact(s, ua, ca);
  Uni pb = uni_divexact(s, ub, cb);
  Poly gc = poly_gcd(s, ca, cb);

  if (uni_deg(pa) < uni_deg(pb)) std::swap(pa, pb);
  while (true) {
    Uni r = uni_prem(s, pa, pb);
    if (r.empty()) break;
    if (uni_deg(r) == 0) {
      // coprime in the main atom
      pb.clear();
      pb.emplace(0, Poly::constant(Rat(1)));
      break;
    }
    Poly cr = gcd_fold(s, r);
    pa = pb;
    pb = uni_divexact(s, r, cr);
  }
  Poly cpb = gcd_fold(s, pb);
  Poly g = from_uni(s, uni_divexact(s, pb, cpb), v);
  return poly_mul(s, mono_part, poly_mul(s, gc, g));
}

}  // namespace diffiety
