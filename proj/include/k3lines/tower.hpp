#pragma once
// Field towers above GF(3^k).  The concrete contexts stop at absolute degree
// 8, but counting solutions of a triangular system over the algebraic closure
// needs arithmetic in larger fields: a tower level is the quotient of the
// polynomial ring over the level below by an irreducible modulus, and an
// element is its coefficient vector.  All field operations recurse down to
// machine arithmetic at the concrete root.
//
// Frobenius powers give every large exponentiation: |K| = 3^D, so x^|K| is D
// successive cubes and x^((|K|^d - 1)/2) — the equal-degree splitting
// exponent — is the product of x^(3^t) over t < D*d, never a big-integer
// exponent.

#include "unipoly.hpp"

namespace k3lines {

struct TField;

/// Element of a tower field: a bare value at a concrete level, a coefficient
/// vector (low -> high, fixed length = relative degree) above it.
struct TEl {
  Fe leaf{0};
  std::vector<TEl> up;
};

/// A concrete field GF(3^k), or an extension of the level below by a monic
/// irreducible modulus.
struct TField {
  const FieldCtx* F = nullptr;  // concrete level
  const TField* parent = nullptr;
  std::vector<TEl> mod;  // monic modulus over parent, size rel_deg + 1
  int rel_deg = 1;
  int abs_deg = 0;  // over GF(3)

  bool concrete() const { return F != nullptr; }
};

inline TField tf_concrete(const FieldCtx& F) {
  TField K;
  K.F = &F;
  K.abs_deg = F.k;
  return K;
}

/// The concrete field at the root of the tower.
inline const FieldCtx& tf_root(const TField& K) {
  const TField* p = &K;
  while (!p->concrete()) p = p->parent;
  return *p->F;
}

inline TEl tf_zero(const TField& K) {
  if (K.concrete()) return TEl{K.F->zero(), {}};
  TEl e;
  e.up.assign(K.rel_deg, tf_zero(*K.parent));
  return e;
}

inline TEl tf_from_fe(const TField& K, Fe a) {
  if (K.concrete()) return TEl{a, {}};
  TEl e = tf_zero(K);
  e.up[0] = tf_from_fe(*K.parent, a);
  return e;
}

inline TEl tf_one(const TField& K) { return tf_from_fe(K, tf_root(K).one()); }

/// Coefficient-wise lift of a parent element into the extension.
inline TEl tf_lift(const TField& K, const TEl& a) {
  assert(!K.concrete());
  TEl e = tf_zero(K);
  e.up[0] = a;
  return e;
}

inline bool tf_is_zero(const TField& K, const TEl& a) {
  if (K.concrete()) return a.leaf.is_zero();
  for (auto& c : a.up)
    if (!tf_is_zero(*K.parent, c)) return false;
  return true;
}

inline bool tf_eq(const TField& K, const TEl& a, const TEl& b) {
  if (K.concrete()) return a.leaf == b.leaf;
  for (int i = 0; i < K.rel_deg; ++i)
    if (!tf_eq(*K.parent, a.up[i], b.up[i])) return false;
  return true;
}

inline TEl tf_add(const TField& K, const TEl& a, const TEl& b) {
  if (K.concrete()) return TEl{K.F->add(a.leaf, b.leaf), {}};
  TEl e = a;
  for (int i = 0; i < K.rel_deg; ++i) e.up[i] = tf_add(*K.parent, e.up[i], b.up[i]);
  return e;
}

inline TEl tf_neg(const TField& K, const TEl& a) {
  if (K.concrete()) return TEl{K.F->neg(a.leaf), {}};
  TEl e = a;
  for (auto& c : e.up) c = tf_neg(*K.parent, c);
  return e;
}

inline TEl tf_sub(const TField& K, const TEl& a, const TEl& b) {
  return tf_add(K, a, tf_neg(K, b));
}

inline TEl tf_mul(const TField& K, const TEl& a, const TEl& b) {
  if (K.concrete()) return TEl{K.F->mul(a.leaf, b.leaf), {}};
  const TField& P = *K.parent;
  int r = K.rel_deg;
  std::vector<TEl> conv(2 * r - 1, tf_zero(P));
  for (int i = 0; i < r; ++i) {
    if (tf_is_zero(P, a.up[i])) continue;
    for (int j = 0; j < r; ++j)
      conv[i + j] = tf_add(P, conv[i + j], tf_mul(P, a.up[i], b.up[j]));
  }
  // reduce by the monic modulus
  for (int i = 2 * r - 2; i >= r; --i) {
    if (tf_is_zero(P, conv[i])) continue;
    for (int j = 0; j < r; ++j)
      conv[i - r + j] = tf_sub(P, conv[i - r + j], tf_mul(P, conv[i], K.mod[j]));
    conv[i] = tf_zero(P);
  }
  TEl e;
  e.up.assign(conv.begin(), conv.begin() + r);
  return e;
}

inline TEl tf_cube(const TField& K, const TEl& a) {
  return tf_mul(K, tf_mul(K, a, a), a);
}

/// Cube root: the inverse of Frobenius, x -> x^(3^(abs_deg - 1)).
inline TEl tf_cuberoot(const TField& K, TEl a) {
  for (int i = 1; i < K.abs_deg; ++i) a = tf_cube(K, a);
  return a;
}

inline TEl tf_rand(const TField& K, Rng& rng) {
  if (K.concrete()) return TEl{K.F->from_index((uint32_t)rng.below(K.F->q)), {}};
  TEl e;
  e.up.reserve(K.rel_deg);
  for (int i = 0; i < K.rel_deg; ++i) e.up.push_back(tf_rand(*K.parent, rng));
  return e;
}

// ---------------------------------------------------------------------------
// Univariate polynomials over a tower field.

struct TPoly {
  const TField* K = nullptr;
  std::vector<TEl> c;  // low -> high, no trailing zeros

  int deg() const { return (int)c.size() - 1; }
  bool is_zero() const { return c.empty(); }
  void normalize() {
    while (!c.empty() && tf_is_zero(*K, c.back())) c.pop_back();
  }
};

inline TPoly tp_zero(const TField& K) { return TPoly{&K, {}}; }

inline TPoly tp_const(const TField& K, const TEl& a) {
  TPoly p{&K, {a}};
  p.normalize();
  return p;
}

inline TPoly tp_x(const TField& K) { return TPoly{&K, {tf_zero(K), tf_one(K)}}; }

inline TPoly tp_add(const TPoly& a, const TPoly& b) {
  const TField& K = *a.K;
  TPoly r{&K, {}};
  r.c.resize(std::max(a.c.size(), b.c.size()), tf_zero(K));
  for (size_t i = 0; i < a.c.size(); ++i) r.c[i] = a.c[i];
  for (size_t i = 0; i < b.c.size(); ++i) r.c[i] = tf_add(K, r.c[i], b.c[i]);
  r.normalize();
  return r;
}

inline TPoly tp_neg(const TPoly& a) {
  TPoly r = a;
  for (auto& x : r.c) x = tf_neg(*a.K, x);
  return r;
}

inline TPoly tp_sub(const TPoly& a, const TPoly& b) { return tp_add(a, tp_neg(b)); }

inline TPoly tp_scale(const TPoly& a, const TEl& s) {
  const TField& K = *a.K;
  if (tf_is_zero(K, s)) return tp_zero(K);
  TPoly r = a;
  for (auto& x : r.c) x = tf_mul(K, x, s);
  r.normalize();
  return r;
}

inline TPoly tp_mul(const TPoly& a, const TPoly& b) {
  const TField& K = *a.K;
  if (a.is_zero() || b.is_zero()) return tp_zero(K);
  TPoly r{&K, {}};
  r.c.assign(a.c.size() + b.c.size() - 1, tf_zero(K));
  for (size_t i = 0; i < a.c.size(); ++i) {
    if (tf_is_zero(K, a.c[i])) continue;
    for (size_t j = 0; j < b.c.size(); ++j)
      r.c[i + j] = tf_add(K, r.c[i + j], tf_mul(K, a.c[i], b.c[j]));
  }
  r.normalize();
  return r;
}

inline TEl tp_eval(const TPoly& a, const TEl& x) {
  const TField& K = *a.K;
  TEl v = tf_zero(K);
  for (size_t i = a.c.size(); i-- > 0;) v = tf_add(K, tf_mul(K, v, x), a.c[i]);
  return v;
}

inline TEl tf_inv(const TField& K, const TEl& a);

/// Quotient and remainder; the divisor must be nonzero.
inline std::pair<TPoly, TPoly> tp_divmod(const TPoly& a, const TPoly& b) {
  const TField& K = *a.K;
  if (b.is_zero()) throw DivisionByZero();
  TPoly q = tp_zero(K), r = a;
  TEl linv = tf_inv(K, b.c.back());
  while (!r.is_zero() && r.deg() >= b.deg()) {
    int shift = r.deg() - b.deg();
    TEl coef = tf_mul(K, r.c.back(), linv);
    if (q.deg() < shift) q.c.resize(shift + 1, tf_zero(K));
    q.c[shift] = tf_add(K, q.c[shift], coef);
    for (int i = 0; i <= b.deg(); ++i)
      r.c[shift + i] = tf_sub(K, r.c[shift + i], tf_mul(K, coef, b.c[i]));
    r.normalize();
  }
  q.normalize();
  return {q, r};
}

inline TPoly tp_mod(const TPoly& a, const TPoly& b) { return tp_divmod(a, b).second; }

inline TPoly tp_monic(const TPoly& a) {
  if (a.is_zero()) return a;
  return tp_scale(a, tf_inv(*a.K, a.c.back()));
}

inline TPoly tp_gcd(TPoly a, TPoly b) {
  while (!b.is_zero()) {
    TPoly r = tp_mod(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return tp_monic(a);
}

inline TPoly tp_derivative(const TPoly& a) {
  const TField& K = *a.K;
  TPoly r{&K, {}};
  for (int i = 1; i <= a.deg(); ++i) {
    Fe fi = tf_root(K).from_int(i);
    r.c.push_back(tf_mul(K, a.c[i], tf_from_fe(K, fi)));
  }
  r.normalize();
  return r;
}

/// Inverse in the field: extended Euclid against the modulus one level down.
inline TEl tf_inv(const TField& K, const TEl& a) {
  if (tf_is_zero(K, a)) throw DivisionByZero();
  if (K.concrete()) return TEl{K.F->inv(a.leaf), {}};
  const TField& P = *K.parent;
  // Treat a as a polynomial over the parent; xgcd with the modulus.
  TPoly r0{&P, K.mod}, r1{&P, a.up};
  r1.normalize();
  TPoly s0 = tp_zero(P), s1 = tp_const(P, tf_one(P));
  while (!r1.is_zero()) {
    auto [q, r2] = tp_divmod(r0, r1);
    TPoly s2 = tp_sub(s0, tp_mul(q, s1));
    r0 = std::move(r1);
    r1 = std::move(r2);
    s0 = std::move(s1);
    s1 = std::move(s2);
  }
  // r0 = gcd is a nonzero constant (the modulus is irreducible), so
  // a^(-1) = s0 / r0.
  if (r0.deg() != 0) throw Error("tower inverse: modulus is not irreducible");
  TPoly inv = tp_scale(s0, tf_inv(P, r0.c[0]));
  TEl e = tf_zero(K);
  for (size_t i = 0; i < inv.c.size(); ++i) e.up[i] = inv.c[i];
  return e;
}

/// x^(3^m) mod g by m successive cubings of h (pass h = x mod g, m = abs_deg
/// for the Frobenius x -> x^|K|).
inline TPoly tp_frob_step(TPoly h, int m, const TPoly& g) {
  for (int i = 0; i < m; ++i) h = tp_mod(tp_mul(tp_mul(h, h), h), g);
  return h;
}

/// r^((|K|^d - 1)/2) mod g via the Frobenius chain: the exponent is the sum
/// of 3^t over t < abs_deg * d.
inline TPoly tp_half_norm(const TPoly& r, int d, const TPoly& g) {
  const TField& K = *g.K;
  int steps = K.abs_deg * d;
  TPoly pw = tp_mod(r, g), acc = pw;
  for (int t = 1; t < steps; ++t) {
    pw = tp_mod(tp_mul(tp_mul(pw, pw), pw), g);  // pw <- pw^3
    acc = tp_mod(tp_mul(acc, pw), g);
  }
  return acc;
}

/// Squarefree part (char 3: a vanishing derivative means a perfect cube).
inline TPoly tp_squarefree_part(const TPoly& a) {
  const TField& K = *a.K;
  if (a.deg() <= 0) return tp_monic(a);
  TPoly d = tp_derivative(a);
  if (d.is_zero()) {
    // a = h(x^3) = (cube-root coefficient-wise)(x)^3
    TPoly h{&K, {}};
    for (int i = 0; i <= a.deg(); i += 3) h.c.push_back(tf_cuberoot(K, a.c[i]));
    h.normalize();
    return tp_squarefree_part(h);
  }
  TPoly g = tp_gcd(a, d);
  TPoly w = tp_divmod(a, g).first;
  // factors hidden in g but coprime to w are cubes; fold them in
  TPoly rest = tp_squarefree_part(g);
  TPoly extra = tp_divmod(rest, tp_gcd(w, rest)).first;
  return tp_monic(tp_mul(w, extra));
}

/// Distinct-degree split of a monic squarefree polynomial: (d, product of the
/// irreducible factors of degree d).
inline std::vector<std::pair<int, TPoly>> tp_distinct_degree(const TPoly& f_in) {
  const TField& K = *f_in.K;
  std::vector<std::pair<int, TPoly>> out;
  TPoly f = f_in;
  if (f.deg() <= 0) return out;
  TPoly x = tp_x(K);
  TPoly h = tp_mod(x, f);
  int d = 0;
  while (f.deg() >= 1) {
    ++d;
    if (2 * d > f.deg()) {
      out.push_back({f.deg(), f});
      break;
    }
    h = tp_frob_step(std::move(h), K.abs_deg, f);
    TPoly g = tp_gcd(tp_sub(h, tp_mod(x, f)), f);
    if (g.deg() > 0) {
      out.push_back({d, g});
      f = tp_divmod(f, g).first;
      h = tp_mod(h, f);
    }
  }
  return out;
}

/// Split a monic product of distinct irreducible factors of equal degree d
/// into the factors (Cantor–Zassenhaus, odd characteristic).
inline void tp_equal_degree_split(const TPoly& g, int d, std::vector<TPoly>& out,
                                  Rng& rng) {
  const TField& K = *g.K;
  if (g.deg() == d) {
    out.push_back(tp_monic(g));
    return;
  }
  for (int tries = 0; tries < 200; ++tries) {
    TPoly r{&K, {}};
    r.c.reserve(g.deg());
    for (int i = 0; i < g.deg(); ++i) r.c.push_back(tf_rand(K, rng));
    r.normalize();
    if (r.deg() < 1) continue;
    TPoly h = tp_sub(tp_half_norm(r, d, g), tp_const(K, tf_one(K)));
    TPoly u = tp_gcd(g, h);
    if (u.deg() > 0 && u.deg() < g.deg()) {
      tp_equal_degree_split(u, d, out, rng);
      tp_equal_degree_split(tp_divmod(g, u).first, d, out, rng);
      return;
    }
  }
  throw Error("equal-degree splitting did not converge in a tower field");
}

/// All monic irreducible factors of a nonzero polynomial (multiplicity
/// dropped), as (degree, factor) pairs sorted by degree.
inline std::vector<std::pair<int, TPoly>> tp_factor_squarefree(const TPoly& a, Rng& rng) {
  std::vector<std::pair<int, TPoly>> out;
  TPoly f = tp_squarefree_part(a);
  if (f.deg() <= 0) return out;
  for (auto& [d, part] : tp_distinct_degree(f)) {
    std::vector<TPoly> fs;
    tp_equal_degree_split(part, d, fs, rng);
    for (auto& q : fs) out.push_back({d, q});
  }
  std::sort(out.begin(), out.end(),
            [](auto& x, auto& y) { return x.first < y.first; });
  return out;
}

/// The root of a linear monic factor x + c0.
inline TEl tp_linear_root(const TPoly& q) {
  assert(q.deg() == 1);
  return tf_neg(*q.K, tf_mul(*q.K, q.c[0], tf_inv(*q.K, q.c[1])));
}

/// Extension of K by a monic irreducible polynomial.  The caller owns the
/// storage of both fields; parents must outlive children.
inline TField tf_extend(const TField& K, const TPoly& q) {
  assert(q.deg() >= 2);
  TField E;
  E.parent = &K;
  E.mod = tp_monic(q).c;
  E.rel_deg = q.deg();
  E.abs_deg = K.abs_deg * q.deg();
  return E;
}

/// Convert a concrete-level UPoly into a TPoly over the matching tower field.
inline TPoly tp_from_upoly(const TField& K, const UPoly& u) {
  assert(K.concrete() && K.F == u.F);
  TPoly p{&K, {}};
  p.c.reserve(u.c.size());
  for (Fe a : u.c) p.c.push_back(TEl{a, {}});
  return p;
}

}  // namespace k3lines
