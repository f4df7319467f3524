#pragma once
// Invariants of a single line lying on a smooth-or-mildly-singular quartic
// surface: the pencil of planes through the line, the degree and separability
// of the projection that pencil induces on the line, ramification data, the
// hessian-resultant dichotomy (first or second kind), singular-fiber
// classification with local valencies, quasi-elliptic and cuspidal detection,
// fiber counts (p, q), the valency of the line, and bound audits.
//
// Conventions.  normalize_to_standard carries the surface to coordinates in
// which the line is {x0 = x1 = 0}; the planes containing it are x0 = t*x1,
// with t = infinity denoting {x1 = 0}.  The plane section of the surface
// splits off the line, leaving a residual cubic; collecting the residual
// cubics of the whole pencil gives
//
//   g = sum a(i0,i1,i2,i3) t^i0 x1^(i0+i1-1) x2^i2 x3^i3,
//
// a cubic in (x1, x2, x3) whose coefficients are polynomials in t.  Because
// x0 has been substituted away, monomial slot 0 is recycled as the parameter
// t inside `g`; symmetrically, slot 1 is recycled as the reciprocal parameter
// u (planes x1 = u*x0) inside `g_flip`.  The trace of the pencil on the line
// itself is t*alpha + beta with
//
//   alpha = sum a(1,0,i2,i3) x2^i2 x3^i3,   beta = sum a(0,1,i2,i3) x2^i2 x3^i3,
//
// stored as binary forms with s <-> x2 and u <-> x3.

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cubic.hpp"
#include "lines.hpp"

namespace k3lines {

struct LineNotOnSurface : Error {
  LineNotOnSurface() : Error("line does not lie on the surface") {}
};
struct DegreeZeroLine : Error {
  DegreeZeroLine() : Error("operation undefined for a line of degree 0") {}
};
struct InseparableLine : Error {
  InseparableLine() : Error("ramification profile undefined for an inseparable line") {}
};
struct IncompleteProfile : Error {
  IncompleteProfile() : Error("bound audit requires a complete line profile") {}
};

// ---------------------------------------------------------------------------
// The standard chart of a line on a surface.

struct LineChart {
  const FieldCtx* F = nullptr;  // compositum of the surface and line fields
  MPoly fstd;                   // surface equation with the line at {x0 = x1 = 0}
  std::array<std::array<Fe, 4>, 4> move;      // original x = move * chart y
  std::array<std::array<Fe, 4>, 4> move_inv;  // chart y = move_inv * original x
  PLine line;                   // the original line, over the chart field
  MPoly g;                      // pencil cubic: t in slot 0, cubic in x1, x2, x3
  MPoly g_flip;                 // flipped pencil: u in slot 1, cubic in x0, x2, x3
  BForm alpha, beta;            // pencil trace on the line, in (x2 : x3)

  Fe a(int i0, int i1, int i2, int i3) const {
    return fstd.coeff({i0, i1, i2, i3});
  }

  PPoint from_chart(const PPoint& p) const { return apply(move, p); }
  PPoint to_chart(const PPoint& p) const { return apply(move_inv, p); }

  /// Residual cubic of the plane x0 = t*x1 over K (K must contain F and t).
  MPoly residual_cubic(const FieldCtx& K, Fe t) const {
    return mp_substitute(mp_embed(g, K), 0, t);
  }
  /// Residual cubic of the plane x1 = 0, in variables {0, 2, 3}.
  MPoly residual_cubic_inf() const { return mp_substitute(g_flip, 1, F->zero()); }

 private:
  PPoint apply(const std::array<std::array<Fe, 4>, 4>& M, const PPoint& p) const {
    int kk = compositum_degree(F->k, p.F->k);
    const FieldCtx& K = field(kk);
    Row4 y{};
    for (int i = 0; i < 4; ++i) y[i] = K.embed_from(*p.F, p.x[i]);
    Row4 x{K.zero(), K.zero(), K.zero(), K.zero()};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        x[i] = K.add(x[i], K.mul(K.embed_from(*F, M[i][j]), y[j]));
    return PPoint(K, x);
  }
};

namespace line_detail {

inline std::array<std::array<Fe, 4>, 4> mat4_inverse(
    const std::array<std::array<Fe, 4>, 4>& M, const FieldCtx& F) {
  std::array<std::array<Fe, 8>, 4> w{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) w[i][j] = M[i][j];
    for (int j = 4; j < 8; ++j) w[i][j] = (j - 4 == i) ? F.one() : F.zero();
  }
  for (int col = 0; col < 4; ++col) {
    int piv = -1;
    for (int r = col; r < 4 && piv < 0; ++r)
      if (!w[r][col].is_zero()) piv = r;
    if (piv < 0) throw SingularMatrix();
    std::swap(w[col], w[piv]);
    Fe inv = F.inv(w[col][col]);
    for (int j = 0; j < 8; ++j) w[col][j] = F.mul(w[col][j], inv);
    for (int r = 0; r < 4; ++r) {
      if (r == col || w[r][col].is_zero()) continue;
      Fe f = w[r][col];
      for (int j = 0; j < 8; ++j) w[r][j] = F.sub(w[r][j], F.mul(f, w[col][j]));
    }
  }
  std::array<std::array<Fe, 4>, 4> inv{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) inv[i][j] = w[i][j + 4];
  return inv;
}

}  // namespace line_detail

/// Move the surface so that l becomes {x0 = x1 = 0} and assemble the pencil
/// data.  The coordinate change extends the canonical basis of the line by
/// the two smallest standard vectors completing a basis, so the chart is
/// deterministic.  Throws LineNotOnSurface if l is not on the surface.
inline LineChart normalize_to_standard(const Surface& S, const PLine& l) {
  LineChart C;
  int kk = compositum_degree(S.f.F->k, l.F->k);
  const FieldCtx& K = field(kk);
  C.F = &K;
  C.line = pl_embed(l, K);
  C.move = move_line_to_standard(C.line);
  C.move_inv = line_detail::mat4_inverse(C.move, K);
  C.fstd = mp_linear_subst(mp_embed(S.f, K), C.move);
  // The line lies on the surface exactly when the chart has no monomial in
  // x2, x3 alone.
  for (int i2 = 0; i2 <= 4; ++i2)
    if (!C.a(0, 0, i2, 4 - i2).is_zero()) throw LineNotOnSurface();
  C.g = MPoly(K);
  C.g_flip = MPoly(K);
  for (auto& [key, c] : C.fstd.t) {
    Mono m = mono_unkey(key);
    C.g.add_term({m[0], m[0] + m[1] - 1, m[2], m[3]}, c);
    C.g_flip.add_term({m[0] + m[1] - 1, m[1], m[2], m[3]}, c);
  }
  C.alpha = BForm(K, 3);
  C.beta = BForm(K, 3);
  for (int i = 0; i <= 3; ++i) {
    C.alpha.c[i] = C.a(1, 0, i, 3 - i);
    C.beta.c[i] = C.a(0, 1, i, 3 - i);
  }
  return C;
}

/// The pencil cubic and its trace on the line.
inline std::tuple<const MPoly&, const BForm&, const BForm&> pencil_forms(
    const LineChart& C) {
  return {C.g, C.alpha, C.beta};
}

// ---------------------------------------------------------------------------
// Degree and separability of the projection induced on the line.

struct PencilDegree {
  int degree = 0;            // 0..3
  bool separable = false;    // meaningful only when degree > 0
  BForm base;                // gcd of (alpha, beta): base locus on the line
  BForm alpha_red, beta_red; // the gcd-free pair
  BForm wronskian;           // of the reduced pair, declared degree 2*degree-2
  std::vector<std::pair<PPoint, int>> base_points;  // chart coords [0:0:s:u]
  bool base_points_complete = true;
};

inline PencilDegree degree_and_separability(const LineChart& C,
                                            int max_ext = FieldCtx::kMaxDegree) {
  const FieldCtx& F = *C.F;
  if (C.alpha.is_zero() && C.beta.is_zero())
    throw DegenerateParameter(
        "pencil trace vanishes identically: the surface is singular along the line");
  PencilDegree D;
  if (C.alpha.is_zero() || C.beta.is_zero()) {
    D.base = C.alpha.is_zero() ? C.beta : C.alpha;
  } else {
    D.base = bf_gcd(C.alpha, C.beta);
  }
  D.degree = 3 - D.base.d;
  if (D.degree > 0) {
    D.alpha_red = C.alpha.is_zero() ? C.alpha : bf_exact_div(C.alpha, D.base);
    D.beta_red = C.beta.is_zero() ? C.beta : bf_exact_div(C.beta, D.base);
    BForm W = bf_wronskian(D.alpha_red, D.beta_red);  // declared degree 2d-1
    if (!W.c[2 * D.degree - 1].is_zero())
      throw Error("internal: wronskian of equal-degree forms has a nonzero top term");
    D.wronskian = BForm(F, 2 * D.degree - 2);
    for (int i = 0; i <= 2 * D.degree - 2; ++i) D.wronskian.c[i] = W.c[i];
    D.separable = !D.wronskian.is_zero();
    if (!D.separable) {
      // Only a degree-3 projection can be inseparable in characteristic 3,
      // and then the reduced pair must lie in the span of s^3 and u^3.
      if (D.degree != 3) throw Error("internal: inseparable projection of degree < 3");
      for (int i = 1; i <= 2; ++i)
        if (!D.alpha_red.c[i].is_zero() || !D.beta_red.c[i].is_zero())
          throw Error("internal: inseparable pair with exponents not divisible by 3");
    }
  }
  if (D.base.d > 0) {
    auto rr = bf_roots_up_to(D.base, max_ext);
    D.base_points_complete = rr.residual == 0;
    for (auto& r : rr.roots) {
      const FieldCtx& K = field(r.k);
      D.base_points.push_back(
          {PPoint(K, {K.zero(), K.zero(), r.s, r.u}), r.mult});
    }
  }
  return D;
}

// ---------------------------------------------------------------------------
// Ramification of a separable projection.

struct RamPoint {
  PPoint point;  // chart coordinates [0 : 0 : s : u]
  int n = 1;     // ramification index
  int m = 0;     // length of the different at the point (m = n-1 when tame)
};

namespace line_detail {

constexpr int kSeriesPrec = 12;

inline UPoly ps_trunc(const UPoly& a, int prec) {
  std::vector<Fe> c(a.c.begin(), a.c.begin() + std::min<size_t>(a.c.size(), prec));
  return UPoly(*a.F, c);
}

inline UPoly ps_mul(const UPoly& a, const UPoly& b, int prec) {
  return ps_trunc(up_mul(a, b), prec);
}

inline UPoly ps_inv(const UPoly& a, int prec) {
  const FieldCtx& F = *a.F;
  if (a.c.empty() || a.c[0].is_zero()) throw DivisionByZero();
  std::vector<Fe> c(prec, F.zero());
  Fe i0 = F.inv(a.c[0]);
  c[0] = i0;
  for (int k = 1; k < prec; ++k) {
    Fe s = F.zero();
    for (int i = 1; i <= k; ++i) {
      Fe ai = i < (int)a.c.size() ? a.c[i] : F.zero();
      s = F.add(s, F.mul(ai, c[k - i]));
    }
    c[k] = F.neg(F.mul(i0, s));
  }
  return UPoly(F, c);
}

inline int ps_ord(const UPoly& a, int prec) {
  for (int i = 0; i < prec && i < (int)a.c.size(); ++i)
    if (!a.c[i].is_zero()) return i;
  return prec;
}

/// p(x + s0), by Horner.
inline UPoly up_taylor_shift(const UPoly& p, Fe s0) {
  const FieldCtx& F = *p.F;
  UPoly shift(F, {s0, F.one()});
  UPoly r = up_zero(F);
  for (int i = p.deg(); i >= 0; --i)
    r = up_add(up_mul(r, shift), up_const(F, p.c[i]));
  return r;
}

}  // namespace line_detail

/// Ramification points of the separable projection, each with its index n and
/// the length m of the different.  The candidate points are the roots of the
/// wronskian; n and m are read off a truncated power-series expansion of the
/// parameter in a local coordinate, and m is cross-checked against the
/// wronskian multiplicity.  Degree 1 gives an empty list.
inline std::vector<RamPoint> ramification_profile(const LineChart& C,
                                                  const PencilDegree& D,
                                                  int max_ext = FieldCtx::kMaxDegree) {
  using namespace line_detail;
  if (D.degree == 0) throw DegreeZeroLine();
  if (!D.separable) throw InseparableLine();
  std::vector<RamPoint> out;
  if (D.degree == 1) return out;
  if (D.wronskian.is_zero()) throw InseparableLine();
  auto rr = bf_roots_up_to(D.wronskian, max_ext);
  if (rr.residual != 0)
    throw Error("internal: wronskian root beyond the field cap");
  int mass = 0;
  for (auto& root : rr.roots) {
    int kk = compositum_degree(C.F->k, root.k);
    const FieldCtx& K = field(kk);
    BForm ar = bf_embed(D.alpha_red, K), br = bf_embed(D.beta_red, K);
    // Dehomogenize so the point sits at the series origin.
    UPoly A(K, {}), B(K, {});
    if (!root.u.is_zero()) {
      Fe s0 = K.embed_from(field(root.k), root.s);
      A = up_taylor_shift(bf_dehom(ar), s0);
      B = up_taylor_shift(bf_dehom(br), s0);
    } else {  // the point [1:0]: reverse the coefficients (chart s = 1)
      std::vector<Fe> ca(ar.c.rbegin(), ar.c.rend()), cb(br.c.rbegin(), br.c.rend());
      A = UPoly(K, ca);
      B = UPoly(K, cb);
    }
    // t = -B/A in the local coordinate; at a pole expand 1/t = -A/B instead.
    UPoly num = A.c.empty() || A.c[0].is_zero() ? up_neg(A) : up_neg(B);
    UPoly den = A.c.empty() || A.c[0].is_zero() ? B : A;
    UPoly series = ps_mul(num, ps_inv(den, kSeriesPrec), kSeriesPrec);
    UPoly drop = series;
    if (!drop.c.empty()) drop.c[0] = K.zero();
    int n = ps_ord(drop, kSeriesPrec);
    int m = ps_ord(up_derivative(series), kSeriesPrec);
    if (n >= kSeriesPrec || m >= kSeriesPrec)
      throw Error("internal: ramification series truncated before its order");
    if (m != root.mult)
      throw Error("internal: series length of the different disagrees with the wronskian");
    RamPoint P;
    const FieldCtx& Kr = field(root.k);
    P.point = PPoint(Kr, {Kr.zero(), Kr.zero(), root.s, root.u});
    P.n = n;
    P.m = m;
    out.push_back(P);
    mass += m;
  }
  if (mass != 2 * D.degree - 2)
    throw Error("internal: total different mass is not 2d - 2");
  std::sort(out.begin(), out.end(), [](const RamPoint& a, const RamPoint& b) {
    if (a.point.F->k != b.point.F->k) return a.point.F->k < b.point.F->k;
    if (a.point.x[2].v != b.point.x[2].v) return a.point.x[2].v < b.point.x[2].v;
    return a.point.x[3].v < b.point.x[3].v;
  });
  return out;
}

/// The multiset {n_m} as a canonical string, e.g. "2_1^4", "2_1 3_3", "3_4".
inline std::string ramification_profile_name(const std::vector<RamPoint>& ram) {
  std::vector<std::pair<int, int>> nm;
  for (auto& r : ram) nm.push_back({r.n, r.m});
  std::sort(nm.begin(), nm.end());
  std::string s;
  for (size_t i = 0; i < nm.size();) {
    size_t j = i;
    while (j < nm.size() && nm[j] == nm[i]) ++j;
    if (!s.empty()) s += " ";
    s += std::to_string(nm[i].first) + "_" + std::to_string(nm[i].second);
    if (j - i > 1) s += "^" + std::to_string(j - i);
    i = j;
  }
  return s;
}

// ---------------------------------------------------------------------------
// The hessian resultant and the first/second kind dichotomy.

struct KindResult {
  MPoly hess;      // det of the second partials at x1 = 0: t in slot 0, cubic in x2, x3
  BForm resultant; // degree-18 binary form in (x2 : x3)
  bool second_kind = false;
};

/// Eliminate t between the pencil trace t*alpha + beta and the hessian
/// determinant h of the residual cubics restricted to the line.  The line is
/// of the second kind exactly when the resultant vanishes identically.
inline KindResult line_resultant(const LineChart& C, const PencilDegree& D) {
  if (D.degree == 0) throw DegreeZeroLine();
  const FieldCtx& F = *C.F;
  KindResult R;
  std::vector<std::vector<MPoly>> M(3, std::vector<MPoly>(3, mp_zero(F)));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      M[i][j] = mp_substitute(
          mp_derivative(mp_derivative(C.g, i + 1), j + 1), 1, F.zero());
  R.hess = mp_matrix_det(M, F);
  if (R.hess.degree_in(0) > 5)
    throw Error("internal: hessian determinant exceeds degree 5 in t");
  std::array<BForm, 6> h{BForm(F, 3), BForm(F, 3), BForm(F, 3),
                         BForm(F, 3), BForm(F, 3), BForm(F, 3)};
  for (auto& [key, c] : R.hess.t) {
    Mono m = mono_unkey(key);
    if (m[1] != 0 || m[2] + m[3] != 3)
      throw Error("internal: hessian determinant is not a binary cubic over K[t]");
    h[m[0]].c[m[2]] = c;
  }
  // Res_t(t*alpha + beta, h) with declared degrees (1, 5).
  BForm res(F, 18);
  BForm nbeta = bf_neg(C.beta);
  for (int j = 0; j <= 5; ++j) {
    BForm term = bf_mul(h[j], bf_mul(bf_pow(nbeta, j), bf_pow(C.alpha, 5 - j)));
    res = bf_add(res, term);
  }
  R.resultant = res;
  R.second_kind = res.is_zero();
  return R;
}

// ---------------------------------------------------------------------------
// Parameters of singular members of the pencil.

enum class Fibration { Elliptic, QuasiElliptic };

struct SingularParams {
  bool generic_singular = false;            // quasi-elliptic pencil
  std::vector<std::pair<int, Fe>> roots;    // (field, t): finite candidates
  bool complete = true;                     // false if roots fell beyond the cap
};

namespace line_detail {

/// One elimination stage: all pairwise resultants with respect to v among the
/// polynomials using v, plus the ones that never use v.
inline std::vector<MPoly> elim_stage(const std::vector<MPoly>& polys, int v) {
  std::vector<MPoly> users, others;
  for (auto& p : polys) {
    if (p.is_zero()) continue;
    (p.uses_var(v) ? users : others).push_back(p);
  }
  std::vector<MPoly> out = others;
  for (size_t i = 0; i < users.size(); ++i)
    for (size_t j = i + 1; j < users.size(); ++j)
      out.push_back(mp_resultant_wrt(users[i], users[j], v));
  return out;
}

/// Eliminate the two plane coordinates from the partials in one affine chart,
/// collecting a univariate polynomial in t; the zero polynomial means the
/// elimination degenerated in that chart.
inline UPoly chart_eliminant(const std::vector<MPoly>& partials, const FieldCtx& F,
                             int chart_var, int o1, int o2) {
  std::vector<MPoly> sys;
  for (auto& p : partials) sys.push_back(mp_substitute(p, chart_var, F.one()));
  std::vector<UPoly> finals;
  for (int order = 0; order < 2; ++order) {
    int va = order == 0 ? o2 : o1, vb = order == 0 ? o1 : o2;
    std::vector<MPoly> stage2 = elim_stage(elim_stage(sys, va), vb);
    for (auto& p : stage2) {
      if (p.is_zero()) continue;
      if (p.uses_var(1) || p.uses_var(2) || p.uses_var(3))
        throw Error("internal: eliminant still uses a plane coordinate");
      finals.push_back(mp_to_upoly(p, 0));
    }
  }
  if (finals.empty()) return up_zero(F);
  UPoly d = finals[0];
  for (size_t i = 1; i < finals.size(); ++i) d = up_gcd(d, finals[i]);
  return d;
}

/// Dedup key of a parameter value: minimal field and index therein.
inline std::pair<int, uint32_t> param_key(const FieldCtx& K, Fe t) {
  int mk = K.min_subfield(t);
  return {mk, K.restrict_to(mk, t).v};
}

inline bool cubic_is_singular(const MPoly& c, const std::array<int, 3>& vars,
                              int max_ext) {
  try {
    return split_ternary_cubic(c, vars, max_ext).kind != CubicKind::SmoothIrreducible;
  } catch (const ExtensionExceeded&) {
    return true;  // a singular point or component exists beyond the cap
  }
}

}  // namespace line_detail

/// Decide which members of the plane pencil through the line are singular
/// cubics.  Either the generic member is singular (quasi-elliptic pencil) or
/// there are finitely many singular parameters, all contained in `roots`
/// (parasite values possible; callers verify each candidate).  The decision
/// is exact: a chart eliminant that is not identically zero bounds its
/// singular parameters, and when every chart degenerates, singularity of the
/// residual cubic at 49 distinct parameters forces the singular locus of the
/// pencil to be infinite, because an incidence argument bounds a finite locus
/// by 48 (three divisors of bidegree (4,2) on P^1 x P^2 meet in at most
/// 3*4*2^2 points when the intersection is finite).
inline SingularParams singular_fiber_params(const LineChart& C,
                                            int max_ext = FieldCtx::kMaxDegree) {
  using namespace line_detail;
  const FieldCtx& F = *C.F;
  SingularParams out;

  auto attempt = [&](const MPoly& g) -> std::optional<SingularParams> {
    std::vector<MPoly> partials;
    for (int v = 1; v <= 3; ++v) partials.push_back(mp_derivative(g, v));
    static const int others[4][2] = {{0, 0}, {2, 3}, {1, 3}, {1, 2}};
    SingularParams sp;
    for (int chart = 1; chart <= 3; ++chart) {
      UPoly d = chart_eliminant(partials, F, chart, others[chart][0], others[chart][1]);
      if (d.is_zero()) return std::nullopt;
      auto rr = up_roots_up_to(d, max_ext);
      if (rr.residual != 0) sp.complete = false;
      for (auto& r : rr.roots) {
        int kk = compositum_degree(F.k, r.k);
        const FieldCtx& K = field(kk);
        sp.roots.push_back({kk, K.embed_from(field(r.k), r.r)});
      }
    }
    // Deduplicate across charts.
    std::vector<std::pair<int, Fe>> uniq;
    std::vector<std::pair<int, uint32_t>> seen;
    for (auto& [k, t] : sp.roots) {
      auto key = param_key(field(k), t);
      if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
        seen.push_back(key);
        uniq.push_back({key.first, field(k).restrict_to(key.first, t)});
      }
    }
    std::sort(uniq.begin(), uniq.end(), [](auto& a, auto& b) {
      return a.first != b.first ? a.first < b.first : a.second.v < b.second.v;
    });
    sp.roots = uniq;
    return sp;
  };

  if (auto sp = attempt(C.g)) return *sp;

  // Some chart degenerated.  Decide quasi-ellipticity by the 49-point test.
  int m = F.k;
  while (m <= FieldCtx::kMaxDegree) {
    long q = 1;
    for (int i = 0; i < m; ++i) q *= 3;
    if (q >= 49) break;
    m += F.k;
  }
  if (m > FieldCtx::kMaxDegree)
    throw Error("internal: no sampling field for the singular-pencil test");
  const FieldCtx& K = field(m);
  bool all_singular = true;
  for (uint32_t i = 0; i < 49 && all_singular; ++i) {
    MPoly Et = C.residual_cubic(K, K.from_index(i));
    all_singular = cubic_is_singular(Et, {1, 2, 3}, max_ext);
  }
  if (all_singular) {
    out.generic_singular = true;
    return out;
  }

  // Elliptic pencil with a degenerate chart: retry in sheared plane
  // coordinates (they fix the pencil parameter, so roots carry over).
  Rng rng(0x11EAF1B5u);
  for (int tries = 0; tries < 8; ++tries) {
    const FieldCtx& FF = F;
    auto rnd = [&] { return FF.from_index((uint32_t)(rng.next() % FF.q)); };
    Fe a00 = rnd(), a01 = rnd(), a10 = rnd(), a11 = rnd();
    if (FF.sub(FF.mul(a00, a11), FF.mul(a01, a10)).is_zero()) continue;
    std::array<MPoly, 4> images = {mp_var(FF, 0), mp_var(FF, 1), mp_zero(FF),
                                   mp_zero(FF)};
    images[2] = mp_add(mp_add(mp_scale(mp_var(FF, 2), a00), mp_scale(mp_var(FF, 3), a01)),
                       mp_scale(mp_var(FF, 1), rnd()));
    images[3] = mp_add(mp_add(mp_scale(mp_var(FF, 2), a10), mp_scale(mp_var(FF, 3), a11)),
                       mp_scale(mp_var(FF, 1), rnd()));
    if (auto sp = attempt(mp_compose(C.g, images))) return *sp;
  }
  throw Error("internal: singular-parameter elimination degenerate for an elliptic pencil");
}

inline Fibration quasi_elliptic_test(const LineChart& C,
                                     int max_ext = FieldCtx::kMaxDegree) {
  return singular_fiber_params(C, max_ext).generic_singular
             ? Fibration::QuasiElliptic
             : Fibration::Elliptic;
}

// ---------------------------------------------------------------------------
// Cuspidal test for inseparable lines of degree 3.

struct CuspidalResult {
  bool applicable = false;  // the line is inseparable of degree 3
  bool cuspidal = false;
  bool family_c = false;    // normalized chart has the x0 x3^3 - x1 x2^3 + ... shape
  UPoly phi;                // obstruction polynomial in s (t = s^3), normalized chart
};

namespace line_detail {

/// For an inseparable degree-3 line, change (x2, x3) so that alpha = x3^3 and
/// beta = -x2^3.  Only the last two coordinates move, so the pencil parameter
/// is untouched.
inline LineChart insep_normalized_chart(const LineChart& C, const PencilDegree& D) {
  const FieldCtx& F = *C.F;
  if (D.degree != 3 || D.separable)
    throw Error("internal: normalization requires an inseparable degree-3 line");
  // alpha = (a2 x2 + a3 x3)^3, beta = (b2 x2 + b3 x3)^3: cube roots of the
  // pure-cube coefficients are Frobenius preimages.
  auto croot = [&](Fe v) { return F.frobenius(v, F.k == 1 ? 0 : F.k - 1); };
  Fe a2 = croot(C.alpha.c[3]), a3 = croot(C.alpha.c[0]);
  Fe b2 = croot(C.beta.c[3]), b3 = croot(C.beta.c[0]);
  if ((a2.is_zero() && a3.is_zero()) || (b2.is_zero() && b3.is_zero()))
    throw NormalizationImpossible("a pencil trace form is not a nonzero cube");
  // New coordinates: x2' = -(b2 x2 + b3 x3), x3' = a2 x2 + a3 x3.
  std::array<std::array<Fe, 2>, 2> n{{{F.neg(b2), F.neg(b3)}, {a2, a3}}};
  Fe det = F.sub(F.mul(n[0][0], n[1][1]), F.mul(n[0][1], n[1][0]));
  if (det.is_zero())
    throw NormalizationImpossible("pencil trace forms share their root");
  Fe dinv = F.inv(det);
  // Inverse: old (x2, x3) in terms of new.
  std::array<std::array<Fe, 2>, 2> ninv{
      {{F.mul(n[1][1], dinv), F.neg(F.mul(n[0][1], dinv))},
       {F.neg(F.mul(n[1][0], dinv)), F.mul(n[0][0], dinv)}}};
  std::array<std::array<Fe, 4>, 4> M{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) M[i][j] = i == j ? F.one() : F.zero();
  M[2][2] = ninv[0][0]; M[2][3] = ninv[0][1];
  M[3][2] = ninv[1][0]; M[3][3] = ninv[1][1];

  LineChart C2;
  C2.F = &F;
  C2.fstd = mp_linear_subst(C.fstd, M);
  // Compose the two moves: original x = C.move * (M * new).
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Fe s = F.zero();
      for (int l = 0; l < 4; ++l) s = F.add(s, F.mul(C.move[i][l], M[l][j]));
      C2.move[i][j] = s;
    }
  C2.move_inv = mat4_inverse(C2.move, F);
  C2.line = C.line;
  C2.g = MPoly(F);
  C2.g_flip = MPoly(F);
  for (auto& [key, c] : C2.fstd.t) {
    Mono m = mono_unkey(key);
    C2.g.add_term({m[0], m[0] + m[1] - 1, m[2], m[3]}, c);
    C2.g_flip.add_term({m[0] + m[1] - 1, m[1], m[2], m[3]}, c);
  }
  C2.alpha = BForm(F, 3);
  C2.beta = BForm(F, 3);
  for (int i = 0; i <= 3; ++i) {
    C2.alpha.c[i] = C2.a(1, 0, i, 3 - i);
    C2.beta.c[i] = C2.a(0, 1, i, 3 - i);
  }
  if (!(C2.a(1, 0, 0, 3) == F.one()) || !(C2.a(0, 1, 3, 0) == F.neg(F.one())))
    throw Error("internal: inseparable normalization missed its target");
  for (int i = 1; i <= 3; ++i)
    if (!C2.a(1, 0, i, 3 - i).is_zero())
      throw Error("internal: inseparable normalization left an alpha term");
  for (int i = 0; i <= 2; ++i)
    if (!C2.a(0, 1, i, 3 - i).is_zero())
      throw Error("internal: inseparable normalization left a beta term");
  return C2;
}

}  // namespace line_detail

/// Decide whether an inseparable degree-3 line is cuspidal: the intersection
/// point of each residual cubic with the line traces the section [0:0:s:1]
/// with t = s^3 in the normalized chart, and that point is singular on its
/// cubic exactly when phi(s) = 0, where
///
///   phi(s) = a(2,0,2,0) s^8 + a(2,0,1,1) s^7 + a(2,0,0,2) s^6
///          + a(1,1,2,0) s^5 + a(1,1,1,1) s^4 + a(1,1,0,2) s^3
///          + a(0,2,2,0) s^2 + a(0,2,1,1) s  + a(0,2,0,2).
///
/// The line is cuspidal exactly when phi vanishes identically, which in the
/// normalized chart coincides with membership in the family
/// x0 x3^3 - x1 x2^3 + x2 q(x0,x1) + x3 q'(x0,x1) + q''(x0,x1).
inline CuspidalResult cuspidal_test(const LineChart& C, const PencilDegree& D) {
  CuspidalResult R;
  if (D.degree != 3 || D.separable) return R;
  R.applicable = true;
  const FieldCtx& F = *C.F;
  LineChart C2 = line_detail::insep_normalized_chart(C, D);
  std::vector<Fe> pc(9, F.zero());
  pc[8] = C2.a(2, 0, 2, 0);
  pc[7] = C2.a(2, 0, 1, 1);
  pc[6] = C2.a(2, 0, 0, 2);
  pc[5] = C2.a(1, 1, 2, 0);
  pc[4] = C2.a(1, 1, 1, 1);
  pc[3] = C2.a(1, 1, 0, 2);
  pc[2] = C2.a(0, 2, 2, 0);
  pc[1] = C2.a(0, 2, 1, 1);
  pc[0] = C2.a(0, 2, 0, 2);
  R.phi = UPoly(F, pc);
  R.cuspidal = R.phi.is_zero();
  // Independent family-membership check: every chart coefficient outside the
  // family shape must vanish.
  R.family_c = true;
  for (auto& [key, c] : C2.fstd.t) {
    Mono m = mono_unkey(key);
    int tail = m[2] + m[3];
    bool allowed = tail <= 1 || (m[0] == 1 && m[1] == 0 && m[2] == 0 && m[3] == 3) ||
                   (m[0] == 0 && m[1] == 1 && m[2] == 3 && m[3] == 0);
    if (!allowed) R.family_c = false;
    (void)c;
  }
  if (R.family_c != R.cuspidal)
    throw Error("internal: family shape and phi disagree in the normalized chart");
  return R;
}

// ---------------------------------------------------------------------------
// Singular members of the pencil, classified, with local valencies.

struct FiberRecord {
  bool at_infinity = false;
  int t_field = 1;      // field degree of the parameter (chart-compatible)
  Fe t{};               // unused when at_infinity
  CubicKind splitting = CubicKind::SmoothIrreducible;
  int local_valency = 0;
  std::string config_label;  // empty when the residual data does not decide it
};

struct FiberAnalysis {
  Fibration fibration = Fibration::Elliptic;
  // Elliptic pencil: every singular member (reducible or not).  Quasi-elliptic
  // pencil: every member whose residual cubic is reducible (the generic member
  // is already singular there).
  std::vector<FiberRecord> fibers;
  bool complete = true;
  int p = 0;  // members splitting into three lines (with multiplicity)
  int q = 0;  // members splitting as line + irreducible conic
  long long valency = 0;  // sum of the local valencies
};

/// True when no partial derivative of the surface vanishes at p (p on X).
inline bool surface_smooth_at(const Surface& S, const PPoint& p) {
  int kk = compositum_degree(S.f.F->k, p.F->k);
  const FieldCtx& K = field(kk);
  MPoly fK = mp_embed(S.f, K);
  Row4 x{};
  for (int i = 0; i < 4; ++i) x[i] = K.embed_from(*p.F, p.x[i]);
  for (int v = 0; v < 4; ++v)
    if (!mp_eval(mp_derivative(fK, v), x).is_zero()) return false;
  return true;
}

namespace line_detail {

/// Working data of one plane of the pencil.
struct PlaneCtx {
  const Surface* S;
  const LineChart* C;
  bool at_inf;
  const FieldCtx* K;         // field of the split components
  Fe t;                      // embedded in K (finite planes)
  std::array<int, 3> vars;   // {1,2,3} finite, {0,2,3} at infinity

  /// Plane coordinates -> point of the original surface.
  PPoint ambient(const std::array<Fe, 3>& w) const {
    Row4 y{K->zero(), K->zero(), K->zero(), K->zero()};
    if (at_inf) {
      y[0] = w[0]; y[2] = w[1]; y[3] = w[2];
    } else {
      y[0] = K->mul(t, w[0]); y[1] = w[0]; y[2] = w[1]; y[3] = w[2];
    }
    return C->from_chart(PPoint(*K, y));
  }

};

/// Meet of two lines of the plane given by linear forms (coefficient vectors
/// over the plane coordinates): the cross product.
inline std::array<Fe, 3> form_coeffs(const MPoly& lin, const std::array<int, 3>& vars,
                                     const FieldCtx& K) {
  std::array<Fe, 3> c{K.zero(), K.zero(), K.zero()};
  MPoly l = mp_embed(lin, K);
  for (int i = 0; i < 3; ++i) {
    Mono m{0, 0, 0, 0};
    m[vars[i]] = 1;
    c[i] = l.coeff(m);
  }
  return c;
}

inline std::array<Fe, 3> cross3(const std::array<Fe, 3>& a,
                                const std::array<Fe, 3>& b, const FieldCtx& K) {
  return {K.sub(K.mul(a[1], b[2]), K.mul(a[2], b[1])),
          K.sub(K.mul(a[2], b[0]), K.mul(a[0], b[2])),
          K.sub(K.mul(a[0], b[1]), K.mul(a[1], b[0]))};
}

inline bool coords_zero(const std::array<Fe, 3>& a) {
  return a[0].is_zero() && a[1].is_zero() && a[2].is_zero();
}

inline bool pp_same(const PPoint& a, const PPoint& b) {
  int kk = compositum_degree(a.F->k, b.F->k);
  const FieldCtx& K = field(kk);
  PPoint ae = pp_embed(a, K), be = pp_embed(b, K);
  return ae.x == be.x;
}

/// Surface singular points lying on one component line of the plane, as
/// ambient points.  A singular point whose field cannot be composed with the
/// plane field makes the test undecidable; `decided` reports that.
inline std::vector<PPoint> sing_on_component(const PlaneCtx& P,
                                             const std::array<Fe, 3>& form,
                                             bool& decided) {
  std::vector<PPoint> out;
  for (auto& sp : P.S->sing) {
    try {
      int kk = compositum_degree(P.K->k, compositum_degree(P.C->F->k, sp.F->k));
      const FieldCtx& KK = field(kk);
      PPoint cp = pp_embed(P.C->to_chart(sp), KK);
      std::array<Fe, 3> w{};
      if (P.at_inf) {
        if (!cp.x[1].is_zero()) continue;
        w = {cp.x[0], cp.x[2], cp.x[3]};
      } else {
        if (!(cp.x[0] == KK.mul(KK.embed_from(*P.K, P.t), cp.x[1]))) continue;
        w = {cp.x[1], cp.x[2], cp.x[3]};
      }
      Fe v = KK.zero();
      for (int i = 0; i < 3; ++i)
        v = KK.add(v, KK.mul(KK.embed_from(*P.K, form[i]), w[i]));
      if (v.is_zero()) out.push_back(sp);
    } catch (const ExtensionExceeded&) {
      decided = false;
    }
  }
  return out;
}

/// Label a completely reducible plane (line + three line components) against
/// the triangle-bearing configurations, or a quasi-elliptic fiber against the
/// decidable fiber shapes.  Empty string when the data does not decide one.
inline std::string fiber_config_label(const PlaneCtx& P, const CubicSplit& split,
                                      Fibration fib) {
  const FieldCtx& K = *P.K;
  std::array<Fe, 3> lform{K.zero(), K.zero(), K.zero()};
  lform[0] = K.one();  // the base line is {w0 = 0} in plane coordinates

  std::vector<std::array<Fe, 3>> comps;   // distinct component forms
  std::vector<int> mult;
  for (auto& [lin, mm] : split.lines) {
    auto c = form_coeffs(lin, P.vars, K);
    if (c[1].is_zero() && c[2].is_zero()) return "";  // component equals the base line
    comps.push_back(c);
    mult.push_back(mm);
  }

  auto smooth_at = [&](const std::array<Fe, 3>& w) {
    return surface_smooth_at(*P.S, P.ambient(w));
  };
  auto meet = [&](const std::array<Fe, 3>& a, const std::array<Fe, 3>& b) {
    return cross3(a, b, K);
  };

  if (fib == Fibration::QuasiElliptic) {
    if (split.kind != CubicKind::ThreeLinesConcurrent) return "";
    std::array<Fe, 3> center = meet(comps[0], comps[1]);
    // Any surface singular point on a component away from the center blocks
    // the classification.
    bool decided = true;
    for (size_t i = 0; i < comps.size(); ++i)
      for (auto& sp : sing_on_component(P, comps[i], decided))
        if (!pp_same(sp, P.ambient(center))) return "";
    if (!decided) return "";
    return smooth_at(center) ? "IV_3" : "IV*_3";
  }

  // Elliptic fibers: configurations of four in-plane lines with a triangle.
  if (split.kind == CubicKind::ThreeLinesTriangle ||
      split.kind == CubicKind::ThreeLinesConcurrent) {
    // Vertices of the arrangement {base line} + components.
    std::vector<std::array<Fe, 3>> all = comps;
    all.push_back(lform);
    std::vector<std::array<Fe, 3>> verts;
    for (size_t i = 0; i < all.size(); ++i)
      for (size_t j = i + 1; j < all.size(); ++j) {
        auto v = meet(all[i], all[j]);
        if (coords_zero(v)) return "";
        bool dup = false;
        for (auto& u : verts) dup = dup || coords_zero(cross3(u, v, K));
        if (!dup) verts.push_back(v);
      }
    // Stray singular points (on a component but not at a vertex) block labels.
    bool decided = true;
    for (auto& cmp : all)
      for (auto& sp : sing_on_component(P, cmp, decided)) {
        bool at_vertex = false;
        for (auto& v : verts)
          at_vertex = at_vertex || pp_same(sp, P.ambient(v));
        if (!at_vertex) return "";
      }
    if (!decided) return "";
    int sing_verts = 0;
    for (auto& v : verts)
      if (!smooth_at(v)) ++sing_verts;

    if (split.kind == CubicKind::ThreeLinesConcurrent) {
      std::array<Fe, 3> center = meet(comps[0], comps[1]);
      bool base_through = center[0].is_zero();
      if (base_through) {
        // Four concurrent lines: a star when the center is smooth.
        return (smooth_at(center) && sing_verts == 0) ? "C0" : "";
      }
      if (!smooth_at(center)) return "";  // no triangle survives
      if (sing_verts > 3) return "";
      return "B" + std::to_string(sing_verts);
    }
    // Triangle of components: general position unless the base line passes
    // through a triangle vertex.
    std::vector<std::array<Fe, 3>> tverts = {meet(comps[0], comps[1]),
                                             meet(comps[0], comps[2]),
                                             meet(comps[1], comps[2])};
    int through = -1;
    for (int i = 0; i < 3; ++i)
      if (tverts[i][0].is_zero()) through = i;
    if (through < 0) {
      if ((int)verts.size() != 6 || sing_verts > 3) return "";
      return "A" + std::to_string(sing_verts);
    }
    // Base line through one triangle vertex: three concurrent lines plus the
    // remaining component as transversal.
    if (!smooth_at(tverts[through])) return "";
    int trans = through == 0 ? 2 : (through == 1 ? 1 : 0);
    int bullets = 0;
    for (auto& v : verts) {
      Fe on_trans = K.add(K.mul(comps[trans][0], v[0]),
                          K.add(K.mul(comps[trans][1], v[1]),
                                K.mul(comps[trans][2], v[2])));
      if (on_trans.is_zero() && !smooth_at(v)) ++bullets;
    }
    if (bullets > 3) return "";
    return "B" + std::to_string(bullets);
  }

  if (split.kind == CubicKind::DoubleLinePlusLine) {
    int dbl = mult[0] == 2 ? 0 : 1, simp = 1 - dbl;
    auto v01 = meet(comps[dbl], comps[simp]);
    auto vl0 = meet(lform, comps[dbl]);
    auto vl1 = meet(lform, comps[simp]);
    // Singular points on the simple line away from vertices block the label.
    bool decided = true;
    for (auto& sp : sing_on_component(P, comps[simp], decided)) {
      bool at_vertex = pp_same(sp, P.ambient(v01)) || pp_same(sp, P.ambient(vl1));
      if (!at_vertex) return "";
    }
    if (!decided) return "";
    bool concurrent = v01[0].is_zero();
    if (concurrent) return smooth_at(v01) ? "E0" : "";
    if (smooth_at(v01) && smooth_at(vl0) && smooth_at(vl1)) return "D0";
    return "";
  }
  return "";
}

/// Split and classify one plane of the pencil.  Returns nothing for a smooth
/// residual cubic, and for quasi-elliptic pencils nothing unless the cubic is
/// reducible.  classified_ok reports whether the split stayed within the cap.
inline std::optional<FiberRecord> fiber_record(const Surface& S, const LineChart& C,
                                               bool at_inf, int t_field, Fe t,
                                               Fibration fib, int max_ext,
                                               bool& classified_ok) {
  classified_ok = true;
  const FieldCtx& K = field(t_field);
  MPoly cubic;
  std::array<int, 3> vars{};
  if (at_inf) {
    cubic = mp_embed(C.residual_cubic_inf(), K);
    vars = {0, 2, 3};
  } else {
    cubic = C.residual_cubic(K, t);
    vars = {1, 2, 3};
  }
  if (cubic.is_zero())
    throw Error("internal: residual cubic vanished; the pencil member contains the line");
  CubicSplit split;
  try {
    split = split_ternary_cubic(cubic, vars, max_ext);
  } catch (const ExtensionExceeded&) {
    classified_ok = false;
    return std::nullopt;
  }
  if (split.kind == CubicKind::SmoothIrreducible) return std::nullopt;
  bool reducible = split.kind != CubicKind::NodalIrreducible &&
                   split.kind != CubicKind::CuspidalIrreducible;
  if (fib == Fibration::QuasiElliptic && !reducible) return std::nullopt;

  FiberRecord R;
  R.at_infinity = at_inf;
  R.t_field = t_field;
  R.t = t;
  R.splitting = split.kind;

  const FieldCtx& KS = field(split.field_k);
  PlaneCtx P{&S, &C, at_inf, &KS, KS.embed_from(K, t), vars};
  // Local valency: distinct component lines, other than the base line itself,
  // meeting the base line at a smooth surface point (a double line counts once).
  for (auto& [lin, mm] : split.lines) {
    auto c = form_coeffs(lin, vars, KS);
    if (c[1].is_zero() && c[2].is_zero()) continue;  // the component is the base line
    std::array<Fe, 3> w{KS.zero(), c[2], KS.neg(c[1])};
    if (surface_smooth_at(S, P.ambient(w))) ++R.local_valency;
    (void)mm;
  }
  R.config_label = fiber_config_label(P, split, fib);
  return R;
}

inline bool is_three_fiber(CubicKind k) {
  return k == CubicKind::ThreeLinesTriangle || k == CubicKind::ThreeLinesConcurrent ||
         k == CubicKind::DoubleLinePlusLine || k == CubicKind::TripleLine;
}
inline bool is_one_fiber(CubicKind k) {
  return k == CubicKind::ConicLineTransversal || k == CubicKind::ConicLineTangent;
}

/// Determinant of a small matrix of univariate polynomials (fraction-free).
inline UPoly up_mat_det(std::vector<std::vector<UPoly>> m, const FieldCtx& F) {
  int n = (int)m.size();
  UPoly prev = up_const(F, F.one());
  int sign = 1;
  for (int c = 0; c < n - 1; ++c) {
    int piv = -1;
    for (int r = c; r < n && piv < 0; ++r)
      if (!m[r][c].is_zero()) piv = r;
    if (piv < 0) return up_zero(F);
    if (piv != c) {
      std::swap(m[piv], m[c]);
      sign = -sign;
    }
    for (int r = c + 1; r < n; ++r) {
      for (int j = c + 1; j < n; ++j) {
        UPoly num = up_sub(up_mul(m[c][c], m[r][j]), up_mul(m[r][c], m[c][j]));
        m[r][j] = up_exact_div(num, prev);
      }
      m[r][c] = up_zero(F);
    }
    prev = m[c][c];
  }
  UPoly d = m[n - 1][n - 1];
  return sign < 0 ? up_neg(d) : d;
}

/// Resultant of two binary forms in (x_va : x_vb) whose coefficients are
/// polynomials in slot 0, with declared degrees (da, db): vanishes at s0
/// exactly when the specialized forms share a projective root.
inline UPoly binform_param_resultant(const MPoly& A, const MPoly& B, int va, int vb,
                                     int da, int db, const FieldCtx& F) {
  auto coeffs = [&](const MPoly& P, int d) {
    std::vector<UPoly> c(d + 1, up_zero(F));
    for (auto& [key, cf] : P.t) {
      Mono m = mono_unkey(key);
      if (m[va] + m[vb] != d)
        throw Error("internal: parameter resultant expects homogeneous forms");
      UPoly& slot = c[m[va]];
      std::vector<Fe> mono(m[0] + 1, F.zero());
      mono[m[0]] = cf;
      slot = up_add(slot, UPoly(F, mono));
    }
    return c;
  };
  auto syl = detail::sylvester(coeffs(A, da), da, coeffs(B, db), db, up_zero(F));
  return up_mat_det(syl, F);
}

}  // namespace line_detail

/// Classify the singular members of the pencil through the line.
///
/// Elliptic pencil: candidates come from the chart eliminants and every
/// singular member within the cap is recorded.  Quasi-elliptic pencil: the
/// generic member is a singular (cuspidal) cubic, so only reducible members
/// are recorded; candidates come from the obstruction polynomial phi for
/// inseparable lines (reducibility forces the moving intersection point to be
/// singular), from the resultant of the two trailing forms at the cusp
/// section for cuspidal lines, and from planes spanned with the other lines
/// of the surface otherwise (every component of a reducible member is a line
/// on the surface meeting the base line).
inline FiberAnalysis reducible_fibers(const Surface& S, const LineChart& C,
                                      const PencilDegree& D,
                                      const ExactLines* known = nullptr,
                                      int max_ext = FieldCtx::kMaxDegree) {
  using namespace line_detail;
  const FieldCtx& F = *C.F;
  FiberAnalysis out;
  SingularParams sp = singular_fiber_params(C, max_ext);
  out.fibration = sp.generic_singular ? Fibration::QuasiElliptic : Fibration::Elliptic;
  out.complete = true;

  std::vector<std::pair<int, Fe>> cands;
  auto add_cand = [&](int k, Fe t) {
    auto key = param_key(field(k), t);
    for (auto& [ek, et] : cands)
      if (param_key(field(ek), et) == key) return;
    cands.push_back({key.first, field(k).restrict_to(key.first, t)});
  };

  if (out.fibration == Fibration::Elliptic) {
    out.complete = sp.complete;
    for (auto& [k, t] : sp.roots) add_cand(k, t);
  } else if (D.degree == 3 && !D.separable) {
    LineChart C2 = insep_normalized_chart(C, D);
    // phi for the normalized chart (the normalization fixes the parameter).
    std::vector<Fe> pc(9, F.zero());
    pc[8] = C2.a(2, 0, 2, 0); pc[7] = C2.a(2, 0, 1, 1); pc[6] = C2.a(2, 0, 0, 2);
    pc[5] = C2.a(1, 1, 2, 0); pc[4] = C2.a(1, 1, 1, 1); pc[3] = C2.a(1, 1, 0, 2);
    pc[2] = C2.a(0, 2, 2, 0); pc[1] = C2.a(0, 2, 1, 1); pc[0] = C2.a(0, 2, 0, 2);
    UPoly phi(F, pc);
    UPoly psi = up_zero(F);
    if (phi.is_zero()) {
      // Cuspidal line: substitute t = s^3, move the cusp section [0:0:s:1] to
      // the origin of the plane, and split the cubic as x3*Q + C3 there; a
      // member is reducible exactly when Q and C3 share a root.
      MPoly gs(F);
      for (auto& [key, c] : C2.g.t) {
        Mono m = mono_unkey(key);
        gs.add_term({3 * m[0], m[1], m[2], m[3]}, c);
      }
      std::array<MPoly, 4> images = {mp_var(F, 0), mp_var(F, 1),
                                     mp_add(mp_var(F, 2), mp_mul(mp_var(F, 0), mp_var(F, 3))),
                                     mp_var(F, 3)};
      MPoly Es = mp_compose(gs, images);
      auto cs = mp_coeffs_wrt(Es, 3);
      while (cs.size() < 4) cs.push_back(mp_zero(F));
      if (!cs[3].is_zero() || !cs[2].is_zero())
        throw Error("internal: cusp section of a cuspidal line is not singular");
      if (cs[1].is_zero() || cs[0].is_zero())
        throw Error("internal: every pencil member reducible");
      psi = binform_param_resultant(cs[1], cs[0], 1, 2, 2, 3, F);
    } else {
      psi = phi;
    }
    if (psi.is_zero()) throw Error("internal: every pencil member reducible");
    auto rr = up_roots_up_to(psi, max_ext);
    if (rr.residual != 0) out.complete = false;
    for (auto& r : rr.roots) {
      int kk = compositum_degree(F.k, r.k);
      const FieldCtx& K = field(kk);
      Fe s0 = K.embed_from(field(r.k), r.r);
      add_cand(kk, K.mul(K.mul(s0, s0), s0));  // t = s^3
    }
  } else {
    // Separable (or low-degree) quasi-elliptic line: planes spanned with the
    // other lines of the surface.
    ExactLines local;
    const ExactLines* KL = known;
    if (!KL) {
      local = lines_on_surface_exact(S, max_ext);
      KL = &local;
    }
    if (!KL->closure_complete() || !KL->beyond.empty()) out.complete = false;
    for (auto& m : KL->lines) {
      int kk;
      try {
        kk = compositum_degree(C.F->k, m.F->k);
      } catch (const ExtensionExceeded&) {
        out.complete = false;
        continue;
      }
      const FieldCtx& K = field(kk);
      PLine lc = pl_embed(C.line, K), mc = pl_embed(m, K);
      if (lc.a == mc.a && lc.b == mc.b) continue;  // the base line itself
      if (!lines_meet(lc, mc)) continue;
      // Chart image of a point of m with a nonzero (y0, y1) part gives the
      // plane parameter: y0 = t*y1.
      PPoint pts[2] = {PPoint(K, mc.a), PPoint(K, mc.b)};
      bool placed = false;
      for (auto& pt : pts) {
        PPoint cp = C.to_chart(pt);
        Fe y0 = cp.x[0], y1 = cp.x[1];
        if (cp.F->k != K.k) throw Error("internal: chart image left the compositum");
        if (y0.is_zero() && y1.is_zero()) continue;
        if (y1.is_zero()) {
          placed = true;  // the plane x1 = 0; handled by the infinity check below
          break;
        }
        add_cand(kk, K.div(y0, y1));
        placed = true;
        break;
      }
      if (!placed)
        throw Error("internal: a meeting line lies inside the base line");
    }
  }

  bool ok_all = true;
  for (auto& [k, t] : cands) {
    bool ok = true;
    auto rec = fiber_record(S, C, false, k, t, out.fibration, max_ext, ok);
    ok_all = ok_all && ok;
    if (rec) out.fibers.push_back(*rec);
  }
  {
    bool ok = true;
    auto rec = fiber_record(S, C, true, F.k, F.zero(), out.fibration, max_ext, ok);
    ok_all = ok_all && ok;
    if (rec) out.fibers.push_back(*rec);
  }
  if (!ok_all) out.complete = false;

  std::sort(out.fibers.begin(), out.fibers.end(),
            [](const FiberRecord& a, const FiberRecord& b) {
              if (a.at_infinity != b.at_infinity) return b.at_infinity;
              if (a.t_field != b.t_field) return a.t_field < b.t_field;
              return a.t.v < b.t.v;
            });
  for (auto& f : out.fibers) {
    if (is_three_fiber(f.splitting)) ++out.p;
    if (is_one_fiber(f.splitting)) ++out.q;
    out.valency += f.local_valency;
  }
  return out;
}

// ---------------------------------------------------------------------------
// The full profile of a line.

struct LineProfile {
  PLine line;                 // original coordinates, minimal field
  int degree = 0;
  int sing_count = 0;         // distinct surface singular points on the line
  int base_mult = 0;          // base-locus multiplicity, 3 - degree
  bool separable = false;     // meaningful when degree > 0
  bool kind_defined = false;  // degree >= 1
  bool second_kind = false;
  std::vector<RamPoint> ramification;  // original coordinates; separable only
  Fibration fibration = Fibration::Elliptic;
  bool cuspidal = false;
  bool family_c = false;
  int p = 0, q = 0;
  std::vector<FiberRecord> fibers;
  long long valency = 0;      // fiberwise count
  bool valency_complete = true;
  std::optional<long long> valency_geometric;  // when the line list is supplied
};

/// Assemble every invariant of one line.  When `known` is supplied, the
/// valency is recomputed geometrically (lines of the list meeting this one in
/// smooth surface points) and checked against the fiberwise count.
inline LineProfile line_profile(const Surface& S, const PLine& l,
                                const ExactLines* known = nullptr,
                                int max_ext = FieldCtx::kMaxDegree) {
  LineChart C = normalize_to_standard(S, l);
  PencilDegree D = degree_and_separability(C, max_ext);
  LineProfile P;
  int lmin = pl_min_field(l);
  P.line = lmin == l.F->k ? l : pl_restrict(l, lmin);
  P.degree = D.degree;
  P.base_mult = D.base.d;
  if (!D.base_points_complete)
    throw Error("internal: base point of the pencil beyond the cap");
  P.sing_count = (int)D.base_points.size();
  {
    // The base locus of the projection is exactly the set of surface singular
    // points on the line; recount independently from the singular locus.
    int cnt = 0;
    bool cross = true;
    for (auto& sp : S.sing) {
      try {
        int kk = compositum_degree(l.F->k, sp.F->k);
        const FieldCtx& K = field(kk);
        if (line_contains(pl_embed(l, K), pp_embed(sp, K))) ++cnt;
      } catch (const ExtensionExceeded&) {
        cross = false;
      }
    }
    if (cross && cnt != P.sing_count)
      throw Error("internal: singular points on the line disagree with the base locus");
  }
  P.separable = D.separable;
  P.kind_defined = D.degree >= 1;
  if (P.kind_defined) P.second_kind = line_resultant(C, D).second_kind;
  if (D.degree >= 1 && D.separable)
    for (auto& r : ramification_profile(C, D, max_ext)) {
      RamPoint rp = r;
      rp.point = C.from_chart(r.point);
      int pmin = pp_min_field(rp.point);
      if (pmin != rp.point.F->k) rp.point = pp_restrict(rp.point, pmin);
      P.ramification.push_back(rp);
    }
  CuspidalResult cu = cuspidal_test(C, D);
  P.cuspidal = cu.applicable && cu.cuspidal;
  P.family_c = cu.applicable && cu.family_c;
  FiberAnalysis FA = reducible_fibers(S, C, D, known, max_ext);
  P.fibration = FA.fibration;
  P.fibers = FA.fibers;
  P.p = FA.p;
  P.q = FA.q;
  P.valency = FA.valency;
  P.valency_complete = FA.complete;
  if (P.cuspidal && P.fibration != Fibration::QuasiElliptic)
    throw Error("internal: cuspidal line with an elliptic pencil");

  if (known) {
    long long geo = 0;
    bool geo_complete = known->closure_complete();
    for (auto& m : known->lines) {
      int kk;
      try {
        kk = compositum_degree(l.F->k, m.F->k);
      } catch (const ExtensionExceeded&) {
        geo_complete = false;
        continue;
      }
      const FieldCtx& K = field(kk);
      PLine lc = pl_embed(l, K), mc = pl_embed(m, K);
      if (lc.a == mc.a && lc.b == mc.b) continue;
      if (!lines_meet(lc, mc)) continue;
      auto mp = line_meet_point(lc, mc);
      if (!mp) throw Error("internal: meeting lines without a meet point");
      if (surface_smooth_at(S, *mp)) ++geo;
    }
    P.valency_geometric = geo;
    if (geo_complete && P.valency_complete && geo != P.valency)
      throw Error("internal: geometric valency " + std::to_string(geo) +
                  " disagrees with the fiberwise count " + std::to_string(P.valency));
  }
  return P;
}

// ---------------------------------------------------------------------------
// Bound audits.

struct BoundCheck {
  std::string name;
  long long value = 0;
  long long bound = 0;
  bool ok = true;
};

struct AuditReport {
  std::vector<BoundCheck> checks;
  bool all_ok = true;
};

/// Check the profile against every applicable valency bound.  Throws
/// IncompleteProfile when the fiber search was not exhaustive.
inline AuditReport audit_bounds(const LineProfile& P) {
  if (!P.valency_complete) throw IncompleteProfile();
  AuditReport R;
  auto push = [&](const std::string& name, long long value, long long bound) {
    bool ok = value <= bound;
    R.checks.push_back({name, value, bound, ok});
    R.all_ok = R.all_ok && ok;
  };
  long long v = P.valency;
  if (P.degree >= 1)
    push("valency <= degree*p + q", v, (long long)P.degree * P.p + P.q);
  if (P.degree == 0) push("degree 0: valency <= 2", v, 2);
  if (P.kind_defined && !P.second_kind)
    push("first kind: valency <= 3 + 5*degree", v, 3 + 5 * P.degree);
  bool qe = P.fibration == Fibration::QuasiElliptic;
  if (qe) {
    push("quasi-elliptic: at most 10 reducible members", P.p + P.q, 10);
    if (P.degree == 3)
      push(P.cuspidal ? "quasi-elliptic cuspidal: valency <= 30"
                      : "quasi-elliptic degree 3, not cuspidal: valency <= 21",
           v, P.cuspidal ? 30 : 21);
    if (P.degree == 2) push("quasi-elliptic degree 2: valency <= 14", v, 14);
    if (P.degree == 1) push("quasi-elliptic degree 1: valency <= 10", v, 10);
  } else {
    if (P.degree == 3) {
      push("elliptic degree 3: valency <= 24", v, 24);
      if (P.separable) {
        push(P.second_kind ? "elliptic degree 3, second kind: valency <= 21"
                           : "elliptic degree 3, first kind: valency <= 18",
             v, P.second_kind ? 21 : 18);
        if (P.second_kind) {
          std::string prof = ramification_profile_name(P.ramification);
          if (prof == "2_1^4") push("second kind, ramification 2_1^4: valency <= 12", v, 12);
          else if (prof == "2_1 3_3" || prof == "3_4")
            push("second kind, ramification " + prof + ": valency <= 21", v, 21);
          else {
            R.checks.push_back({"degree-3 ramification profile is 2_1^4, 2_1 3_3 or 3_4",
                                0, 0, false});
            R.all_ok = false;
          }
        }
      }
    }
    if (P.degree == 2) {
      push("elliptic degree 2: valency <= 14", v, 14);
      if (!P.second_kind && P.kind_defined)
        push("elliptic degree 2, first kind: valency <= 13", v, 13);
    }
    if (P.degree == 1) {
      push(P.sing_count >= 2 ? "elliptic degree 1, two singular points: valency <= 9"
                             : "elliptic degree 1: valency <= 11",
           v, P.sing_count >= 2 ? 9 : 11);
      if (!P.second_kind && P.kind_defined)
        push("elliptic degree 1, first kind: valency <= 8", v, 8);
    }
  }
  if (P.degree == 3 && !P.separable && !P.cuspidal)
    push("inseparable, not cuspidal: valency <= 12", v, 12);
  if (P.degree == 3 && P.separable) {
    std::string prof = ramification_profile_name(P.ramification);
    bool allowed = prof == "2_1^4" || prof == "2_1 3_3" || prof == "3_4";
    R.checks.push_back({"degree-3 ramification profile is 2_1^4, 2_1 3_3 or 3_4",
                        0, 0, allowed});
    R.all_ok = R.all_ok && allowed;
  }
  return R;
}

}  // namespace k3lines
