#pragma once
// Dense univariate polynomials over GF(3^k).
//
// A UPoly carries a pointer to its coefficient field; binary operations
// require both operands to live over the same FieldCtx (the singletons from
// field(k) make pointer identity the right equality).  The zero polynomial
// has degree -1.

#include <algorithm>
#include <cassert>
#include <string>
#include <utility>
#include <vector>

#include "gf3.hpp"

namespace k3lines {

struct UPoly {
  const FieldCtx* F = nullptr;
  std::vector<Fe> c;  // c[i] multiplies x^i; no trailing zeros after normalize()

  UPoly() = default;
  explicit UPoly(const FieldCtx& f) : F(&f) {}
  UPoly(const FieldCtx& f, std::vector<Fe> cc) : F(&f), c(std::move(cc)) { normalize(); }

  void normalize() {
    while (!c.empty() && c.back().is_zero()) c.pop_back();
  }
  int deg() const { return (int)c.size() - 1; }
  bool is_zero() const { return c.empty(); }
  Fe lc() const { return c.back(); }
  Fe coeff(int i) const { return (i >= 0 && i < (int)c.size()) ? c[i] : Fe{0}; }

  bool operator==(const UPoly& o) const { return F == o.F && c == o.c; }
  bool operator!=(const UPoly& o) const { return !(*this == o); }
};

inline UPoly up_zero(const FieldCtx& F) { return UPoly(F); }
inline UPoly up_const(const FieldCtx& F, Fe a) { return UPoly(F, {a}); }
inline UPoly up_x(const FieldCtx& F) { return UPoly(F, {F.zero(), F.one()}); }
inline UPoly up_monomial(const FieldCtx& F, Fe a, int n) {
  std::vector<Fe> v(n + 1, F.zero());
  v[n] = a;
  return UPoly(F, std::move(v));
}

inline UPoly up_add(const UPoly& a, const UPoly& b) {
  assert(a.F == b.F);
  const FieldCtx& F = *a.F;
  std::vector<Fe> r(std::max(a.c.size(), b.c.size()), F.zero());
  for (size_t i = 0; i < r.size(); ++i) r[i] = F.add(a.coeff((int)i), b.coeff((int)i));
  return UPoly(F, std::move(r));
}

inline UPoly up_neg(const UPoly& a) {
  UPoly r = a;
  for (auto& x : r.c) x = a.F->neg(x);
  return r;
}

inline UPoly up_sub(const UPoly& a, const UPoly& b) { return up_add(a, up_neg(b)); }

inline UPoly up_scale(const UPoly& a, Fe s) {
  const FieldCtx& F = *a.F;
  if (s.is_zero()) return up_zero(F);
  UPoly r = a;
  for (auto& x : r.c) x = F.mul(x, s);
  return r;
}

inline UPoly up_shift(const UPoly& a, int n) {  // multiply by x^n
  if (a.is_zero()) return a;
  UPoly r(*a.F);
  r.c.assign(a.c.size() + n, a.F->zero());
  std::copy(a.c.begin(), a.c.end(), r.c.begin() + n);
  return r;
}

inline UPoly up_mul(const UPoly& a, const UPoly& b) {
  assert(a.F == b.F);
  const FieldCtx& F = *a.F;
  if (a.is_zero() || b.is_zero()) return up_zero(F);
  std::vector<Fe> r(a.c.size() + b.c.size() - 1, F.zero());
  for (size_t i = 0; i < a.c.size(); ++i) {
    if (a.c[i].is_zero()) continue;
    for (size_t j = 0; j < b.c.size(); ++j)
      r[i + j] = F.add(r[i + j], F.mul(a.c[i], b.c[j]));
  }
  return UPoly(F, std::move(r));
}

inline UPoly up_pow(const UPoly& a, long long e) {
  assert(e >= 0);
  UPoly r = up_const(*a.F, a.F->one());
  UPoly base = a;
  while (e) {
    if (e & 1) r = up_mul(r, base);
    e >>= 1;
    if (e) base = up_mul(base, base);
  }
  return r;
}

inline std::pair<UPoly, UPoly> up_divmod(const UPoly& a, const UPoly& b);
inline UPoly up_mod(const UPoly& a, const UPoly& b);

/// a^e mod m by binary powering with reduction at every step.
inline UPoly up_powmod(UPoly a, uint64_t e, const UPoly& m) {
  const FieldCtx& F = *a.F;
  UPoly r = up_mod(up_const(F, F.one()), m);
  a = up_mod(a, m);
  while (e) {
    if (e & 1) r = up_mod(up_mul(r, a), m);
    e >>= 1;
    if (e) a = up_mod(up_mul(a, a), m);
  }
  return r;
}

/// Quotient and remainder; divisor must be nonzero.
inline std::pair<UPoly, UPoly> up_divmod(const UPoly& a, const UPoly& b) {
  assert(a.F == b.F);
  if (b.is_zero()) throw DivisionByZero{};
  const FieldCtx& F = *a.F;
  UPoly rem = a, quo(F);
  if (a.deg() >= b.deg()) quo.c.assign(a.deg() - b.deg() + 1, F.zero());
  Fe binv = F.inv(b.lc());
  while (rem.deg() >= b.deg()) {
    int d = rem.deg() - b.deg();
    Fe f = F.mul(rem.lc(), binv);
    quo.c[d] = f;
    for (int i = 0; i <= b.deg(); ++i)
      rem.c[d + i] = F.sub(rem.c[d + i], F.mul(f, b.c[i]));
    rem.normalize();
  }
  quo.normalize();
  return {quo, rem};
}

inline UPoly up_mod(const UPoly& a, const UPoly& b) { return up_divmod(a, b).second; }
inline UPoly up_quo(const UPoly& a, const UPoly& b) { return up_divmod(a, b).first; }

/// Division known to be exact; the remainder must vanish.
inline UPoly up_exact_div(const UPoly& a, const UPoly& b) {
  auto [q, r] = up_divmod(a, b);
  if (!r.is_zero()) throw Error("univariate division not exact");
  return q;
}

inline UPoly up_monic(const UPoly& a) {
  if (a.is_zero()) return a;
  return up_scale(a, a.F->inv(a.lc()));
}

/// Monic gcd.
inline UPoly up_gcd(UPoly a, UPoly b) {
  assert(a.F == b.F);
  while (!b.is_zero()) {
    UPoly r = up_mod(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return up_monic(a);
}

inline UPoly up_derivative(const UPoly& a) {
  const FieldCtx& F = *a.F;
  UPoly r(F);
  if (a.deg() < 1) return r;
  r.c.assign(a.c.size() - 1, F.zero());
  for (int i = 1; i <= a.deg(); ++i) {
    Fe m = F.from_int(i % 3);
    r.c[i - 1] = F.mul(m, a.c[i]);
  }
  r.normalize();
  return r;
}

inline Fe up_eval(const UPoly& a, Fe x) {
  const FieldCtx& F = *a.F;
  Fe acc = F.zero();
  for (int i = a.deg(); i >= 0; --i) acc = F.add(F.mul(acc, x), a.c[i]);
  return acc;
}

/// Coefficient-wise field map (e.g. Frobenius or its inverse).
template <class Fn>
inline UPoly up_map_coeffs(const UPoly& a, Fn&& fn) {
  UPoly r = a;
  for (auto& x : r.c) x = fn(x);
  r.normalize();
  return r;
}

/// Lift coefficients into an extension field K (source field divides K's degree).
inline UPoly up_embed(const UPoly& a, const FieldCtx& K) {
  UPoly r(K);
  r.c.reserve(a.c.size());
  for (Fe x : a.c) r.c.push_back(K.embed_from(*a.F, x));
  r.normalize();
  return r;
}

/// x^(3^m) mod f, by m-fold cubing.
inline UPoly up_frob_power_mod(const UPoly& f, int m) {
  const FieldCtx& F = *f.F;
  UPoly y = up_mod(up_x(F), f);
  for (int i = 0; i < m; ++i) y = up_mod(up_mul(up_mul(y, y), y), f);
  return y;
}

/// The radical: product of the distinct irreducible factors, monic.
inline UPoly up_squarefree_part(const UPoly& a) {
  const FieldCtx& F = *a.F;
  if (a.deg() <= 0) return a.is_zero() ? a : up_const(F, F.one());
  UPoly d = up_derivative(a);
  if (d.is_zero()) {
    // a = h(x^3) = (cube-root-coeffs h)(x)^3 over the perfect field F.
    UPoly h(F);
    h.c.assign(a.deg() / 3 + 1, F.zero());
    for (int i = 0; 3 * i <= a.deg(); ++i)
      h.c[i] = F.frobenius(a.coeff(3 * i), F.k - 1);
    h.normalize();
    return up_squarefree_part(h);
  }
  UPoly g = up_gcd(a, d);
  UPoly w = up_exact_div(a, g);
  // w holds every distinct factor whose multiplicity is prime to 3; the rest
  // sit inside g with derivative contributions stripped.  Recurse on g.
  if (g.deg() == 0) return up_monic(w);
  UPoly rest = up_squarefree_part(g);
  UPoly merged = up_mul(w, up_exact_div(rest, up_gcd(w, rest)));
  return up_monic(merged);
}

/// Resultant via the Euclidean remainder chain.
inline Fe up_resultant(UPoly a, UPoly b) {
  assert(a.F == b.F);
  const FieldCtx& F = *a.F;
  if (a.is_zero() || b.is_zero()) return F.zero();
  Fe acc = F.one();
  while (b.deg() > 0) {
    UPoly r = up_mod(a, b);
    if (r.is_zero()) return F.zero();
    // res(a,b) = (-1)^(da db) lc(b)^(da - dr) res(b, r)
    int da = a.deg(), db = b.deg(), dr = r.deg();
    Fe s = ((da & 1) && (db & 1)) ? F.neg(F.one()) : F.one();
    acc = F.mul(acc, F.mul(s, F.pow(b.lc(), da - dr)));
    a = std::move(b);
    b = std::move(r);
  }
  // b is a nonzero constant: res(a, b) = b^deg(a)
  return F.mul(acc, F.pow(b.lc(), a.deg()));
}

/// All roots in the coefficient field, with multiplicities.
inline std::vector<std::pair<Fe, int>> up_roots_in_field(const UPoly& a) {
  std::vector<std::pair<Fe, int>> out;
  const FieldCtx& F = *a.F;
  if (a.deg() <= 0) return out;
  UPoly f = a;
  for (uint32_t i = 0; i < F.q && f.deg() > 0; ++i) {
    Fe r = F.from_index(i);
    if (!up_eval(f, r).is_zero()) continue;
    UPoly lin(F, {F.neg(r), F.one()});
    int m = 0;
    while (!f.is_zero() && up_eval(f, r).is_zero()) {
      f = up_exact_div(f, lin);
      ++m;
    }
    out.push_back({r, m});
  }
  return out;
}

/// Multiplicity of a single root (0 if not a root).
inline int up_root_multiplicity(const UPoly& a, Fe r) {
  const FieldCtx& F = *a.F;
  UPoly f = a;
  UPoly lin(F, {F.neg(r), F.one()});
  int m = 0;
  while (f.deg() >= 1 && up_eval(f, r).is_zero()) {
    f = up_exact_div(f, lin);
    ++m;
  }
  return m;
}

/// Distinct-degree profile of the squarefree part: pairs (degree d, number of
/// irreducible factors of degree d over the coefficient field).
inline std::vector<std::pair<int, int>> up_distinct_degree_profile(const UPoly& a) {
  const FieldCtx& F = *a.F;
  std::vector<std::pair<int, int>> out;
  UPoly f = up_squarefree_part(a);
  if (f.deg() <= 0) return out;
  UPoly x = up_x(F);
  UPoly h = up_mod(x, f);
  int d = 0;
  while (f.deg() >= 1) {
    ++d;
    if (2 * d > f.deg()) {  // remainder is a single irreducible factor
      out.push_back({f.deg(), 1});
      break;
    }
    for (int i = 0; i < F.k; ++i) h = up_mod(up_mul(up_mul(h, h), h), f);  // h <- h^q
    UPoly g = up_gcd(up_sub(h, up_mod(x, f)), f);
    if (g.deg() > 0) {
      out.push_back({d, g.deg() / d});
      f = up_exact_div(f, g);
      h = up_mod(h, f);
    }
  }
  return out;
}

/// Minimal polynomial over GF(3^sub_k) of r, an element of K; sub_k | K.k.
inline UPoly up_min_poly_over(const FieldCtx& K, Fe r, int sub_k) {
  if (K.k % sub_k != 0) throw NotASubfield(sub_k, K.k);
  // Conjugates under the relative Frobenius a -> a^(3^sub_k).
  std::vector<Fe> conj;
  Fe x = r;
  do {
    conj.push_back(x);
    x = K.frobenius(x, sub_k);
  } while (x != r);
  UPoly m = up_const(K, K.one());
  for (Fe cc : conj) m = up_mul(m, UPoly(K, {K.neg(cc), K.one()}));
  // Coefficients are fixed by Frobenius^sub_k, so they restrict to the subfield.
  UPoly out(field(sub_k));
  out.c.reserve(m.c.size());
  for (Fe cc : m.c) out.c.push_back(K.restrict_to(sub_k, cc));
  out.normalize();
  return out;
}

/// Lagrange interpolation through distinct nodes xs.
inline UPoly up_interpolate(const FieldCtx& F, const std::vector<Fe>& xs,
                            const std::vector<Fe>& ys) {
  assert(xs.size() == ys.size());
  UPoly acc(F);
  for (size_t i = 0; i < xs.size(); ++i) {
    UPoly num = up_const(F, F.one());
    Fe den = F.one();
    for (size_t j = 0; j < xs.size(); ++j) {
      if (j == i) continue;
      num = up_mul(num, UPoly(F, {F.neg(xs[j]), F.one()}));
      den = F.mul(den, F.sub(xs[i], xs[j]));
    }
    acc = up_add(acc, up_scale(num, F.div(ys[i], den)));
  }
  return acc;
}

inline std::string up_to_string(const UPoly& a, const std::string& var = "t") {
  if (a.is_zero()) return "0";
  const FieldCtx& F = *a.F;
  std::string s;
  for (int i = a.deg(); i >= 0; --i) {
    Fe cc = a.coeff(i);
    if (cc.is_zero()) continue;
    if (!s.empty()) s += " + ";
    std::string cs = F.to_string(cc);
    bool needs_paren = cs.find('+') != std::string::npos;
    if (i == 0) {
      s += needs_paren ? "(" + cs + ")" : cs;
    } else {
      std::string mono = (i == 1) ? var : var + "^" + std::to_string(i);
      if (cs == "1") {
        s += mono;
      } else {
        s += (needs_paren ? "(" + cs + ")" : cs) + "*" + mono;
      }
    }
  }
  return s;
}

}  // namespace k3lines
