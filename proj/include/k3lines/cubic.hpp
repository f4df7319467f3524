#pragma once
// Component decomposition of plane conics and plane cubics over GF(3^k).
//
// Both routines operate on homogeneous forms in three of the four ambient
// variables (the `vars` triple); the fourth variable must not occur.  Lines
// are returned as linear forms in those variables, written over the smallest
// common extension field that holds every component, with ExtensionExceeded
// thrown whenever a genuine component lives beyond GF(3^8).

#include <algorithm>
#include <optional>

#include "binform.hpp"
#include "proj.hpp"

namespace k3lines {

namespace cubic_detail {

using Vec3 = std::array<Fe, 3>;

inline Vec3 cross3(const FieldCtx& F, const Vec3& a, const Vec3& b) {
  return {F.sub(F.mul(a[1], b[2]), F.mul(a[2], b[1])),
          F.sub(F.mul(a[2], b[0]), F.mul(a[0], b[2])),
          F.sub(F.mul(a[0], b[1]), F.mul(a[1], b[0]))};
}

/// Coefficient vector of a linear form in the three `vars` slots.
inline Vec3 form_to_vec(const MPoly& L, const std::array<int, 3>& vars) {
  const FieldCtx& F = *L.F;
  Vec3 v{F.zero(), F.zero(), F.zero()};
  for (int i = 0; i < 3; ++i) {
    Mono m{0, 0, 0, 0};
    m[vars[i]] = 1;
    v[i] = L.coeff(m);
  }
  return v;
}

inline MPoly vec_to_form(const FieldCtx& F, const Vec3& v, const std::array<int, 3>& vars) {
  MPoly L = mp_zero(F);
  for (int i = 0; i < 3; ++i) {
    Mono m{0, 0, 0, 0};
    m[vars[i]] = 1;
    L.add_term(m, v[i]);
  }
  return L;
}

/// Scale so the graded-lex largest monomial has coefficient 1.
inline MPoly normalize_leading(const MPoly& p) {
  if (p.t.empty()) return p;
  Fe lead = p.t.rbegin()->second;
  return mp_scale(p, p.F->inv(lead));
}

/// Gram matrix of a quadratic form in the `vars` triple (char 3: 1/2 = 2).
inline std::array<std::array<Fe, 3>, 3> conic_gram(const MPoly& q,
                                                   const std::array<int, 3>& vars) {
  const FieldCtx& F = *q.F;
  std::array<std::array<Fe, 3>, 3> M;
  for (auto& row : M) row = {F.zero(), F.zero(), F.zero()};
  Fe half = F.from_int(2);
  for (auto& [key, c] : q.t) {
    Mono m = mono_unkey(key);
    int idx[2];
    int n = 0;
    for (int i = 0; i < 3; ++i)
      for (int e = 0; e < m[vars[i]]; ++e) idx[n++] = i;
    assert(n == 2);
    if (idx[0] == idx[1]) {
      M[idx[0]][idx[0]] = c;
    } else {
      Fe h = F.mul(half, c);
      M[idx[0]][idx[1]] = h;
      M[idx[1]][idx[0]] = h;
    }
  }
  return M;
}

inline Fe gram_pair(const FieldCtx& F, const std::array<std::array<Fe, 3>, 3>& M,
                    const Vec3& a, const Vec3& b) {
  Fe acc = F.zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) acc = F.add(acc, F.mul(a[i], F.mul(M[i][j], b[j])));
  return acc;
}

/// Rank and (for rank < 3) a kernel vector / nonzero row of a symmetric 3x3.
inline int mat3_rank(const FieldCtx& F, std::array<std::array<Fe, 3>, 3> M,
                     Vec3* kernel_out = nullptr) {
  // Gaussian elimination on a copy; track column operations implicitly by
  // solving for the kernel afterwards from the RREF.
  std::vector<Row4> rows(3);
  for (int i = 0; i < 3; ++i) rows[i] = {M[i][0], M[i][1], M[i][2], F.zero()};
  auto [rank, piv] = rref(rows, F);
  if (kernel_out && rank < 3) {
    // free column = smallest column not a pivot (column 3 is padding)
    std::array<bool, 3> is_piv{false, false, false};
    for (int p : piv)
      if (p < 3) is_piv[p] = true;
    int fc = 0;
    while (fc < 3 && is_piv[fc]) ++fc;
    assert(fc < 3);
    Vec3 v{F.zero(), F.zero(), F.zero()};
    v[fc] = F.one();
    for (int r = 0; r < (int)piv.size(); ++r)
      if (piv[r] < 3) v[piv[r]] = F.neg(rows[r][fc]);
    *kernel_out = v;
  }
  return rank;
}

/// Exact divisibility by a linear form in the `vars` triple: c vanishes on
/// the plane L = 0 iff L divides c.
inline bool linear_divides(const MPoly& c, const MPoly& L, const std::array<int, 3>& vars) {
  const FieldCtx& F = *c.F;
  Vec3 a = form_to_vec(L, vars);
  int piv = -1;
  for (int i = 0; i < 3; ++i)
    if (!a[i].is_zero()) {
      piv = i;
      break;
    }
  assert(piv >= 0);
  Fe ia = F.inv(a[piv]);
  std::array<MPoly, 4> images{mp_var(F, 0), mp_var(F, 1), mp_var(F, 2), mp_var(F, 3)};
  MPoly sub = mp_zero(F);
  for (int j = 0; j < 3; ++j)
    if (j != piv) sub = mp_add(sub, mp_scale(mp_var(F, vars[j]), F.neg(F.mul(ia, a[j]))));
  images[vars[piv]] = sub;
  return mp_compose(c, images).t.empty();
}

}  // namespace cubic_detail

// ---------------------------------------------------------------------------
// Conic splitting
// ---------------------------------------------------------------------------

enum class ConicKind { Irreducible, TwoLines, DoubleLine };

struct ConicSplit {
  ConicKind kind;
  int field_k;                // field the line forms are written over
  std::vector<MPoly> lines;   // empty / two distinct forms / one form (doubled)
};

/// Decompose a nonzero homogeneous quadratic in the `vars` triple.
inline ConicSplit split_conic(const MPoly& q, const std::array<int, 3>& vars,
                              int max_ext = FieldCtx::kMaxDegree) {
  using namespace cubic_detail;
  const FieldCtx& F = *q.F;
  int hdeg = -1;
  if (q.t.empty() || !q.is_homogeneous(&hdeg) || hdeg != 2)
    throw Error("split_conic: expected a nonzero homogeneous quadratic");
  if (q.uses_var(0 + 1 + 2 + 3 - vars[0] - vars[1] - vars[2]))
    throw VariableClash("split_conic: quadratic uses the off-plane variable");
  auto M = conic_gram(q, vars);
  Vec3 ker;
  int rank = mat3_rank(F, M, &ker);
  if (rank == 3) return {ConicKind::Irreducible, F.k, {}};
  if (rank == 1) {
    // q = c * L^2 where L is (proportional to) any nonzero row of the Gram.
    Vec3 row{F.zero(), F.zero(), F.zero()};
    for (int i = 0; i < 3 && row[0].is_zero() && row[1].is_zero() && row[2].is_zero(); ++i)
      row = M[i];
    MPoly L = normalize_leading(vec_to_form(F, row, vars));
    MPoly L2 = mp_mul(L, L);
    Fe scale = F.div(q.t.rbegin()->second, L2.t.rbegin()->second);
    if (!(mp_sub(q, mp_scale(L2, scale)).t.empty()))
      throw Error("split_conic: rank-1 reconstruction failed");
    return {ConicKind::DoubleLine, F.k, {L}};
  }
  assert(rank == 2);
  // Kernel point is the vertex; restrict to a complementary coordinate pair.
  int kpiv = 0;
  while (ker[kpiv].is_zero()) ++kpiv;
  int i1 = -1, i2 = -1;
  for (int i = 0; i < 3; ++i)
    if (i != kpiv) (i1 < 0 ? i1 : i2) = i;
  Vec3 f1{F.zero(), F.zero(), F.zero()}, f2 = f1;
  f1[i1] = F.one();
  f2[i2] = F.one();
  Fe A = gram_pair(F, M, f1, f1);
  Fe B = F.mul(F.from_int(2), gram_pair(F, M, f1, f2));
  Fe C = gram_pair(F, M, f2, f2);
  BForm bq(F, 2, {C, B, A});  // A s^2 + B s u + C u^2 with s <-> f1-coordinate
  auto rts = bf_roots_up_to(bq, max_ext);
  if (rts.residual > 0)
    throw ExtensionExceeded("split_conic: component lines beyond the field cap");
  if (rts.roots.size() == 1 && rts.roots[0].mult == 2)
    throw Error("split_conic: rank-2 form with a double root");
  // Two distinct projective roots (possibly over a quadratic extension).
  int kk = F.k;
  for (auto& r : rts.roots) kk = compositum_degree(kk, r.k);
  const FieldCtx& K = field(kk);
  std::vector<MPoly> lines;
  for (auto& r : rts.roots) {
    const FieldCtx& Kr = field(r.k);
    Vec3 d{K.zero(), K.zero(), K.zero()};
    Fe s = K.embed_from(Kr, r.s), u = K.embed_from(Kr, r.u);
    for (int i = 0; i < 3; ++i)
      d[i] = K.add(K.mul(s, K.embed_from(F, f1[i])), K.mul(u, K.embed_from(F, f2[i])));
    Vec3 kerK;
    for (int i = 0; i < 3; ++i) kerK[i] = K.embed_from(F, ker[i]);
    Vec3 n = cross3(K, kerK, d);
    lines.push_back(normalize_leading(vec_to_form(K, n, vars)));
  }
  assert(lines.size() == 2);
  MPoly prod = mp_mul(lines[0], lines[1]);
  MPoly qK = mp_embed(q, K);
  Fe scale = K.div(qK.t.rbegin()->second, prod.t.rbegin()->second);
  if (!(mp_sub(qK, mp_scale(prod, scale)).t.empty()))
    throw Error("split_conic: rank-2 reconstruction failed");
  return {ConicKind::TwoLines, kk, std::move(lines)};
}

// ---------------------------------------------------------------------------
// Cubic splitting
// ---------------------------------------------------------------------------

enum class CubicKind {
  SmoothIrreducible,
  NodalIrreducible,
  CuspidalIrreducible,
  ConicLineTransversal,
  ConicLineTangent,
  ThreeLinesTriangle,
  ThreeLinesConcurrent,
  DoubleLinePlusLine,
  TripleLine,
};

inline const char* cubic_kind_name(CubicKind k) {
  switch (k) {
    case CubicKind::SmoothIrreducible: return "smooth";
    case CubicKind::NodalIrreducible: return "nodal";
    case CubicKind::CuspidalIrreducible: return "cuspidal";
    case CubicKind::ConicLineTransversal: return "conic+line";
    case CubicKind::ConicLineTangent: return "conic+tangent";
    case CubicKind::ThreeLinesTriangle: return "three-lines";
    case CubicKind::ThreeLinesConcurrent: return "three-lines-concurrent";
    case CubicKind::DoubleLinePlusLine: return "double-line+line";
    case CubicKind::TripleLine: return "triple-line";
  }
  return "?";
}

struct CubicSplit {
  CubicKind kind;
  int field_k;  // field over which the component forms are written
  std::vector<std::pair<MPoly, int>> lines;  // (normalized linear form, multiplicity)
  std::optional<MPoly> conic;                // irreducible conic component
  // Singular points of the curve, as points of P^3 with the unused coordinate
  // zero.  Filled only when the cubic is reduced; a non-reduced cubic is
  // singular along a whole line and the kind already says so.
  std::vector<PPoint> sing;
};

/// Full component decomposition of a nonzero homogeneous cubic in `vars`.
inline CubicSplit split_ternary_cubic(const MPoly& c, const std::array<int, 3>& vars,
                                      int max_ext = FieldCtx::kMaxDegree) {
  using namespace cubic_detail;
  const FieldCtx& F = *c.F;
  int hdeg = -1;
  if (c.t.empty() || !c.is_homogeneous(&hdeg) || hdeg != 3)
    throw Error("split_ternary_cubic: expected a nonzero homogeneous cubic");
  int unused = 0 + 1 + 2 + 3 - vars[0] - vars[1] - vars[2];
  if (c.uses_var(unused))
    throw VariableClash("split_ternary_cubic: cubic uses the off-plane variable");

  // --- (A) Frobenius cube: only cube monomials <=> c = L^3 -----------------
  {
    bool all_cubes = true;
    for (auto& [key, coeff] : c.t) {
      Mono m = mono_unkey(key);
      (void)coeff;
      for (int i = 0; i < 4; ++i)
        if (m[i] % 3 != 0) all_cubes = false;
    }
    if (all_cubes) {
      MPoly L = mp_zero(F);
      for (auto& [key, coeff] : c.t) {
        Mono m = mono_unkey(key);
        Mono r{m[0] / 3, m[1] / 3, m[2] / 3, m[3] / 3};
        L.add_term(r, F.frobenius(coeff, F.k - 1));  // cube root
      }
      MPoly L3 = mp_mul(L, mp_mul(L, L));
      if (!(mp_sub(L3, c).t.empty()))
        throw Error("split_ternary_cubic: cube-root reconstruction failed");
      CubicSplit out;
      out.kind = CubicKind::TripleLine;
      out.field_k = F.k;
      out.lines.push_back({normalize_leading(L), 3});
      return out;
    }
  }

  // --- (B) Repeated linear factor: L divides every partial -----------------
  {
    MPoly part = mp_zero(F);
    for (int i = 0; i < 3 && part.t.empty(); ++i) part = mp_derivative(c, vars[i]);
    assert(!part.t.empty());  // all partials zero would be case (A)
    std::vector<MPoly> cands;
    try {
      ConicSplit cs = split_conic(part, vars, max_ext);
      for (auto& L : cs.lines) cands.push_back(L);
    } catch (const ExtensionExceeded&) {
      // Conjugate factors beyond the cap cannot be the (rational) repeated
      // factor, so there is nothing to test.
    }
    for (auto& Lc : cands) {
      const FieldCtx& KL = field(Lc.F->k);
      MPoly cK = mp_embed(c, KL);
      if (!linear_divides(cK, Lc, vars)) continue;
      MPoly q1 = mp_exact_div(cK, Lc);
      if (!linear_divides(q1, Lc, vars)) continue;
      // Repeated factors of a form are rational over the base field.
      MPoly M = mp_exact_div(q1, Lc);
      MPoly Lr = mp_restrict(normalize_leading(Lc), F.k);
      MPoly Mr = mp_restrict(normalize_leading(M), F.k);
      CubicSplit out;
      out.kind = CubicKind::DoubleLinePlusLine;
      out.field_k = F.k;
      out.lines.push_back({Lr, 2});
      out.lines.push_back({Mr, 1});
      MPoly prod = mp_mul(mp_mul(Lr, Lr), Mr);
      Fe scale = F.div(c.t.rbegin()->second, prod.t.rbegin()->second);
      if (!(mp_sub(c, mp_scale(prod, scale)).t.empty()))
        throw Error("split_ternary_cubic: double-line reconstruction failed");
      return out;
    }
  }

  // --- (C) Reduced cubic: enumerate the singular points --------------------
  // On the chart vars[0] = 1 the Euler relation (degree 3 = 0 in char 3)
  // makes d/d vars[0] redundant; on vars[0] = 0 it is not, so the second
  // chart carries all four equations.
  struct SingPt {
    int k;   // absolute field degree of the coordinates
    Vec3 x;  // coordinates in the vars-triple, first nonzero = 1
  };
  std::vector<SingPt> sing;
  {
    auto subst = [&](const MPoly& p, int var, Fe val) { return mp_substitute(p, var, val); };
    // chart vars[0] = 1
    {
      std::vector<MPoly> sys;
      for (const MPoly& p :
           {c, mp_derivative(c, vars[1]), mp_derivative(c, vars[2])})
        sys.push_back(subst(p, vars[0], F.one()));
      SolveResult sr = solve2(sys, vars[1], vars[2], max_ext);
      if (!sr.complete)
        throw ExtensionExceeded("split_ternary_cubic: singular point beyond the field cap");
      for (auto& s : sr.sols) {
        const FieldCtx& K = field(s.k);
        sing.push_back({s.k, {K.one(), s.x[0], s.x[1]}});
      }
    }
    // chart vars[0] = 0, vars[1] = 1: all four equations, one variable left
    {
      std::vector<UPoly> kept;
      bool all_zero = true;
      for (const MPoly& p : {c, mp_derivative(c, vars[0]), mp_derivative(c, vars[1]),
                             mp_derivative(c, vars[2])}) {
        MPoly r = subst(subst(p, vars[0], F.zero()), vars[1], F.one());
        if (r.t.empty()) continue;
        all_zero = false;
        kept.push_back(mp_to_upoly(r, vars[2]));
      }
      if (all_zero)
        throw Error("split_ternary_cubic: singular along a line on a reduced cubic");
      UPoly g = kept[0];
      for (size_t i = 1; i < kept.size(); ++i) g = up_gcd(g, kept[i]);
      if (g.deg() > 0) {
        RootsResult rr = up_roots_up_to(g, max_ext);
        if (rr.residual > 0)
          throw ExtensionExceeded("split_ternary_cubic: singular point beyond the field cap");
        for (auto& r : rr.roots) {
          const FieldCtx& K = field(r.k);
          sing.push_back({r.k, {K.zero(), K.one(), r.r}});
        }
      }
    }
    // chart vars[0] = vars[1] = 0, vars[2] = 1: a single point
    {
      Row4 pt{F.zero(), F.zero(), F.zero(), F.zero()};
      pt[vars[2]] = F.one();
      std::array<Fe, 4> at{pt[0], pt[1], pt[2], pt[3]};
      bool is_sing = mp_eval(c, at).is_zero();
      for (int i = 0; i < 3 && is_sing; ++i)
        is_sing = mp_eval(mp_derivative(c, vars[i]), at).is_zero();
      if (is_sing) sing.push_back({1, {F.zero(), F.zero(), F.one()}});
    }
  }

  CubicSplit out;
  if (sing.empty()) {
    out.kind = CubicKind::SmoothIrreducible;
    out.field_k = F.k;
    return out;
  }

  // --- (D) Lines through each singular point via the tangent pencil --------
  // Restrict c to P + t*(alpha f1 + beta f2): the coefficient of t^i is a
  // binary form B_i(alpha, beta); B_0 = B_1 = 0 at a singular point and the
  // lines through P inside c are the common roots of B_2 (tangent cone) and
  // B_3.
  struct FoundLine {
    int k;
    MPoly form;  // normalized, over field(k)
  };
  std::vector<FoundLine> found;
  std::vector<Fe> disc_of_sing;  // tangent-cone discriminant per singular point
  for (auto& P : sing) {
    int k1 = compositum_degree(F.k, P.k);
    const FieldCtx& K1 = field(k1);
    const FieldCtx& KP = field(P.k);
    MPoly cK = mp_embed(c, K1);
    Vec3 Pv;
    for (int i = 0; i < 3; ++i) Pv[i] = K1.embed_from(KP, P.x[i]);
    int ppiv = 0;
    while (Pv[ppiv].is_zero()) ++ppiv;
    int j1 = -1, j2 = -1;
    for (int i = 0; i < 3; ++i)
      if (i != ppiv) (j1 < 0 ? j1 : j2) = i;
    Vec3 f1{K1.zero(), K1.zero(), K1.zero()}, f2 = f1;
    f1[j1] = K1.one();
    f2[j2] = K1.one();
    // images: vars[j] -> P_j + T * (alpha f1_j + beta f2_j), reusing the three
    // vars slots as (T, alpha, beta) — composition substitutes simultaneously.
    MPoly T = mp_var(K1, vars[0]), al = mp_var(K1, vars[1]), be = mp_var(K1, vars[2]);
    std::array<MPoly, 4> images{mp_zero(K1), mp_zero(K1), mp_zero(K1), mp_zero(K1)};
    for (int j = 0; j < 3; ++j) {
      MPoly dir = mp_add(mp_scale(al, f1[j]), mp_scale(be, f2[j]));
      images[vars[j]] = mp_add(mp_const(K1, Pv[j]), mp_mul(T, dir));
    }
    MPoly g = mp_compose(cK, images);
    std::vector<MPoly> Bs = mp_coeffs_wrt(g, vars[0]);
    Bs.resize(4, mp_zero(K1));
    if (!Bs[0].t.empty() || !Bs[1].t.empty())
      throw Error("split_ternary_cubic: pencil expansion inconsistent at a singular point");
    auto to_bform = [&](const MPoly& p, int d) {
      BForm b(K1, d);
      for (auto& [key, coeff] : p.t) {
        Mono m = mono_unkey(key);
        assert(m[vars[1]] + m[vars[2]] == d);
        b.c[m[vars[1]]] = coeff;
      }
      return b;
    };
    BForm B2 = to_bform(Bs[2], 2), B3 = to_bform(Bs[3], 3);
    if (B2.is_zero() && B3.is_zero())
      throw Error("split_ternary_cubic: cubic vanishes on every line through a point");
    disc_of_sing.push_back(B2.is_zero() ? K1.zero() : bf_quadratic_disc(B2));
    BForm G = bf_gcd(B2, B3);
    if (G.d > 0) {
      auto rts = bf_roots_up_to(G, max_ext);
      if (rts.residual > 0)
        throw ExtensionExceeded("split_ternary_cubic: component line beyond the field cap");
      for (auto& r : rts.roots) {
        int k2 = compositum_degree(k1, r.k);
        const FieldCtx& K2 = field(k2);
        const FieldCtx& Kr = field(r.k);
        Fe s = K2.embed_from(Kr, r.s), u = K2.embed_from(Kr, r.u);
        Vec3 d2, P2;
        for (int i = 0; i < 3; ++i) {
          d2[i] = K2.add(K2.mul(s, K2.embed_from(K1, f1[i])),
                         K2.mul(u, K2.embed_from(K1, f2[i])));
          P2[i] = K2.embed_from(K1, Pv[i]);
        }
        Vec3 n = cross3(K2, P2, d2);
        MPoly Lf = normalize_leading(vec_to_form(K2, n, vars));
        int mk = mp_min_field(Lf);
        found.push_back({mk, mp_restrict(Lf, mk)});
      }
    }
  }

  // Common field for every component, dedup, then divide out.
  int kstar = F.k;
  for (auto& f : found) kstar = compositum_degree(kstar, f.k);
  const FieldCtx& KS = field(kstar);
  std::vector<MPoly> lineforms;
  for (auto& f : found) {
    MPoly L = mp_embed(f.form, KS);
    bool dup = false;
    for (auto& e : lineforms)
      if (mp_sub(e, L).t.empty()) dup = true;
    if (!dup) lineforms.push_back(L);
  }
  std::sort(lineforms.begin(), lineforms.end(), [](const MPoly& a, const MPoly& b) {
    auto ia = a.t.begin();
    auto ib = b.t.begin();
    for (; ia != a.t.end() && ib != b.t.end(); ++ia, ++ib) {
      if (ia->first != ib->first) return ia->first < ib->first;
      if (ia->second.v != ib->second.v) return ia->second.v < ib->second.v;
    }
    return a.t.size() < b.t.size();
  });

  MPoly rest = mp_embed(c, KS);
  for (auto& L : lineforms) {
    int mult = 0;
    while (linear_divides(rest, L, vars)) {
      rest = mp_exact_div(rest, L);
      ++mult;
    }
    if (mult != 1)
      throw Error("split_ternary_cubic: unexpected line multiplicity on a reduced cubic");
    out.lines.push_back({L, 1});
  }
  out.field_k = kstar;
  for (auto& P : sing) {
    const FieldCtx& K = field(P.k);
    Row4 x{K.zero(), K.zero(), K.zero(), K.zero()};
    for (int i = 0; i < 3; ++i) x[vars[i]] = P.x[i];
    out.sing.push_back(PPoint(K, x));
  }
  std::sort(out.sing.begin(), out.sing.end(), [](const PPoint& a, const PPoint& b) {
    if (a.F->k != b.F->k) return a.F->k < b.F->k;
    for (int i = 0; i < 4; ++i)
      if (a.x[i].v != b.x[i].v) return a.x[i].v < b.x[i].v;
    return false;
  });

  int rdeg = rest.total_degree();
  if (out.lines.empty()) {
    // Irreducible singular cubic: one double point, node or cusp.
    if (sing.size() != 1)
      throw Error("split_ternary_cubic: lineless cubic with several singular points");
    out.kind = disc_of_sing[0].is_zero() ? CubicKind::CuspidalIrreducible
                                         : CubicKind::NodalIrreducible;
    return out;
  }
  if (rdeg == 1) {
    // Defensive: a leftover line means a singular point escaped the charts,
    // which the completeness contract above should rule out.
    out.lines.push_back({normalize_leading(rest), 1});
    rest = mp_const(KS, KS.one());
    rdeg = 0;
  }
  if (rdeg == 0) {
    if (out.lines.size() != 3)
      throw Error("split_ternary_cubic: reduced cubic split into a wrong line count");
    std::vector<std::vector<Fe>> m(3, std::vector<Fe>(3, KS.zero()));
    for (int i = 0; i < 3; ++i) {
      Vec3 v = form_to_vec(out.lines[i].first, vars);
      for (int j = 0; j < 3; ++j) m[i][j] = v[j];
    }
    bool conc = fe_det(m, KS).is_zero();
    out.kind = conc ? CubicKind::ThreeLinesConcurrent : CubicKind::ThreeLinesTriangle;
  } else if (rdeg == 2) {
    if (out.lines.size() != 1)
      throw Error("split_ternary_cubic: conic leftover with a wrong line count");
    ConicSplit cs = split_conic(rest, vars, max_ext);
    if (cs.kind != ConicKind::Irreducible)
      throw Error("split_ternary_cubic: reducible conic leftover after line extraction");
    out.conic = normalize_leading(rest);
    // Tangency: restrict the conic to the line and test the discriminant.
    Vec3 a = form_to_vec(out.lines[0].first, vars);
    int piv = 0;
    while (a[piv].is_zero()) ++piv;
    Vec3 w1{KS.zero(), KS.zero(), KS.zero()}, w2 = w1;
    int j1 = -1, j2 = -1;
    for (int i = 0; i < 3; ++i)
      if (i != piv) (j1 < 0 ? j1 : j2) = i;
    Fe ia = KS.inv(a[piv]);
    w1[j1] = KS.one();
    w1[piv] = KS.neg(KS.mul(ia, a[j1]));
    w2[j2] = KS.one();
    w2[piv] = KS.neg(KS.mul(ia, a[j2]));
    auto M = conic_gram(*out.conic, vars);
    Fe A = gram_pair(KS, M, w1, w1);
    Fe Bq = KS.mul(KS.from_int(2), gram_pair(KS, M, w1, w2));
    Fe C = gram_pair(KS, M, w2, w2);
    Fe disc = KS.sub(KS.mul(Bq, Bq), KS.mul(A, C));
    out.kind = disc.is_zero() ? CubicKind::ConicLineTangent : CubicKind::ConicLineTransversal;
  } else {
    throw Error("split_ternary_cubic: leftover degree inconsistent");
  }

  // Reconstruction: product of components matches c up to a scalar.
  MPoly prod = mp_const(KS, KS.one());
  for (auto& [L, mult] : out.lines)
    for (int i = 0; i < mult; ++i) prod = mp_mul(prod, L);
  if (out.conic) prod = mp_mul(prod, *out.conic);
  MPoly cK = mp_embed(c, KS);
  Fe scale = KS.div(cK.t.rbegin()->second, prod.t.rbegin()->second);
  if (!(mp_sub(cK, mp_scale(prod, scale)).t.empty()))
    throw Error("split_ternary_cubic: reconstruction failed");
  return out;
}

}  // namespace k3lines
