#pragma once
// Homogeneous binary forms F(s,u) of fixed degree over GF(3^k), stored as the
// coefficient vector of s^i u^(d-i).  Thin wrappers over the univariate layer
// via dehomogenization at u = 1, with the point at infinity [1:0] tracked
// through the degree drop.

#include "elim.hpp"

namespace k3lines {

struct BForm {
  const FieldCtx* F = nullptr;
  int d = 0;               // declared degree
  std::vector<Fe> c;       // c[i] multiplies s^i u^(d-i); size d+1

  BForm() = default;
  BForm(const FieldCtx& f, int deg) : F(&f), d(deg), c(deg + 1, f.zero()) {}
  BForm(const FieldCtx& f, int deg, std::vector<Fe> cc) : F(&f), d(deg), c(std::move(cc)) {
    assert((int)c.size() == d + 1);
  }
  bool is_zero() const {
    for (auto& x : c)
      if (!x.is_zero()) return false;
    return true;
  }
  bool operator==(const BForm& o) const { return F == o.F && d == o.d && c == o.c; }
  Fe eval(Fe s, Fe u) const {
    Fe acc = F->zero();
    for (int i = 0; i <= d; ++i)
      acc = F->add(acc, F->mul(c[i], F->mul(F->pow(s, i), F->pow(u, d - i))));
    return acc;
  }
};

inline BForm bf_add(const BForm& a, const BForm& b) {
  assert(a.F == b.F && a.d == b.d);
  BForm r(*a.F, a.d);
  for (int i = 0; i <= a.d; ++i) r.c[i] = a.F->add(a.c[i], b.c[i]);
  return r;
}
inline BForm bf_neg(const BForm& a) {
  BForm r = a;
  for (auto& x : r.c) x = a.F->neg(x);
  return r;
}
inline BForm bf_scale(const BForm& a, Fe s) {
  BForm r = a;
  for (auto& x : r.c) x = a.F->mul(x, s);
  return r;
}
inline BForm bf_mul(const BForm& a, const BForm& b) {
  assert(a.F == b.F);
  BForm r(*a.F, a.d + b.d);
  for (int i = 0; i <= a.d; ++i) {
    if (a.c[i].is_zero()) continue;
    for (int j = 0; j <= b.d; ++j)
      r.c[i + j] = a.F->add(r.c[i + j], a.F->mul(a.c[i], b.c[j]));
  }
  return r;
}
inline BForm bf_pow(const BForm& a, int e) {
  BForm r(*a.F, 0);
  r.c[0] = a.F->one();
  for (int i = 0; i < e; ++i) r = bf_mul(r, a);
  return r;
}

/// Partial derivatives with respect to s and u.
inline BForm bf_ds(const BForm& a) {
  BForm r(*a.F, std::max(a.d - 1, 0));
  if (a.d == 0) return r;
  for (int i = 1; i <= a.d; ++i) r.c[i - 1] = a.F->mul(a.F->from_int(i % 3), a.c[i]);
  return r;
}
inline BForm bf_du(const BForm& a) {
  BForm r(*a.F, std::max(a.d - 1, 0));
  if (a.d == 0) return r;
  for (int i = 0; i < a.d; ++i) r.c[i] = a.F->mul(a.F->from_int((a.d - i) % 3), a.c[i]);
  return r;
}

/// Dehomogenize at u = 1 (a univariate polynomial in s).
inline UPoly bf_dehom(const BForm& a) { return UPoly(*a.F, a.c); }
/// Rebuild a form of declared degree d from a univariate in s (deg <= d).
inline BForm bf_hom(const UPoly& p, int d) {
  BForm r(*p.F, d);
  for (int i = 0; i <= p.deg(); ++i) r.c[i] = p.coeff(i);
  return r;
}

inline BForm bf_embed(const BForm& a, const FieldCtx& K) {
  BForm r(K, a.d);
  for (int i = 0; i <= a.d; ++i) r.c[i] = K.embed_from(*a.F, a.c[i]);
  return r;
}

/// Exact division of forms (degrees subtract).
inline BForm bf_exact_div(const BForm& a, const BForm& b) {
  assert(a.F == b.F);
  // a = q b exactly; match the s-adic valuations first
  int va = 0, vb = 0;
  while (va <= a.d && a.c[va].is_zero()) ++va;
  while (vb <= b.d && b.c[vb].is_zero()) ++vb;
  if (vb > b.d) throw DivisionByZero{};
  if (va < vb) throw Error("binary form division not exact (s-valuation)");
  UPoly pa = bf_dehom(a), pb = bf_dehom(b);
  UPoly q = up_exact_div(pa, pb);
  return bf_hom(q, a.d - b.d);
}

/// Monic-normalized gcd of two binary forms (degree = its own natural degree).
inline BForm bf_gcd(const BForm& a, const BForm& b) {
  assert(a.F == b.F);
  const FieldCtx& F = *a.F;
  if (a.is_zero() && b.is_zero()) return BForm(F, 0);
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  // split off powers of u (roots at s-infinity are powers of... u divides F iff
  // the top coefficient chain vanishes).  Dehomogenized gcd handles the rest;
  // shared powers of u correspond to shared degree drop.
  int ta = a.d, tb = b.d;  // degrees in s of the dehomogenizations
  UPoly pa = bf_dehom(a), pb = bf_dehom(b);
  int ua = ta - pa.deg(), ub = tb - pb.deg();  // multiplicity of u in each
  UPoly g = up_gcd(pa, pb);
  int ug = std::min(ua, ub);
  BForm r = bf_hom(g, g.deg() + ug);  // multiply back the shared u-power
  (void)F;
  return r;
}

/// A projective root of a binary form: the point [s0:u0] with multiplicity.
struct BFRoot {
  int k;        // field degree of the coordinates
  Fe s, u;      // normalized: u = 1, or (s,u) = (1,0) for the point at infinity
  int mult;
};

struct BFRoots {
  std::vector<BFRoot> roots;
  int residual = 0;  // root mass beyond the field cap
};

/// All roots of a nonzero form in P^1, over extensions bounded by max_ext.
inline BFRoots bf_roots_up_to(const BForm& a, int max_ext = FieldCtx::kMaxDegree) {
  assert(!a.is_zero());
  const FieldCtx& F = *a.F;
  BFRoots out;
  UPoly p = bf_dehom(a);
  int inf_mult = a.d - p.deg();  // u^inf_mult divides the form
  if (inf_mult > 0) out.roots.push_back({F.k, F.one(), F.zero(), inf_mult});
  auto rr = up_roots_up_to(p, max_ext);
  out.residual = rr.residual;
  for (auto& r : rr.roots) out.roots.push_back({r.k, r.r, field(r.k).one(), r.mult});
  return out;
}

/// Discriminant of a binary quadratic a2 s^2 + a1 s u + a0 u^2 in char 3:
/// b^2 - 4ac = a1^2 - a2 a0.
inline Fe bf_quadratic_disc(const BForm& q) {
  assert(q.d == 2);
  const FieldCtx& F = *q.F;
  return F.sub(F.mul(q.c[1], q.c[1]), F.mul(q.c[2], q.c[0]));
}

/// The Wronskian W = F G_s - G F_s ... for separability tests the relevant
/// covariant is F * dG - G * dF with respect to one chart variable.
inline BForm bf_wronskian(const BForm& f, const BForm& g) {
  assert(f.F == g.F);
  return bf_add(bf_mul(f, bf_ds(g)), bf_neg(bf_mul(g, bf_ds(f))));
}

inline std::string bf_to_string(const BForm& a, const std::string& s = "s",
                                const std::string& u = "u") {
  if (a.is_zero()) return "0";
  const FieldCtx& F = *a.F;
  std::string out;
  for (int i = a.d; i >= 0; --i) {
    if (a.c[i].is_zero()) continue;
    std::string mono;
    if (i > 0) mono += s + (i > 1 ? "^" + std::to_string(i) : "");
    if (a.d - i > 0) {
      if (!mono.empty()) mono += "*";
      mono += u + (a.d - i > 1 ? "^" + std::to_string(a.d - i) : "");
    }
    std::string cs = F.to_string(a.c[i]);
    std::string piece;
    if (mono.empty()) piece = cs.find('+') != std::string::npos ? "(" + cs + ")" : cs;
    else if (cs == "1") piece = mono;
    else piece = (cs.find('+') != std::string::npos ? "(" + cs + ")" : cs) + "*" + mono;
    out += out.empty() ? piece : " + " + piece;
  }
  return out;
}

}  // namespace k3lines
