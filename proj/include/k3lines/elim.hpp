#pragma once
// Elimination machinery: resultants of multivariate polynomials, root finding
// across the supported tower GF(3^1)..GF(3^8), and solvers for 0-dimensional
// systems in two or three affine variables.
//
// Resultants use the formal Sylvester convention (declared degrees), so
// specializing the resultant commutes with specializing the inputs — leading
// coefficient drops never create missed solutions.

#include <functional>
#include <optional>

#include "multipoly.hpp"

namespace k3lines {

/// Determinant of an n x n matrix of field elements (Gaussian elimination).
inline Fe fe_det(std::vector<std::vector<Fe>> m, const FieldCtx& F) {
  int n = (int)m.size();
  Fe d = F.one();
  for (int col = 0; col < n; ++col) {
    int sel = -1;
    for (int r = col; r < n; ++r)
      if (!m[r][col].is_zero()) { sel = r; break; }
    if (sel < 0) return F.zero();
    if (sel != col) { std::swap(m[sel], m[col]); d = F.neg(d); }
    d = F.mul(d, m[col][col]);
    Fe inv = F.inv(m[col][col]);
    for (int r = col + 1; r < n; ++r) {
      if (m[r][col].is_zero()) continue;
      Fe f = F.mul(m[r][col], inv);
      for (int cc = col; cc < n; ++cc) m[r][cc] = F.sub(m[r][cc], F.mul(f, m[col][cc]));
    }
  }
  return d;
}

/// Fraction-free determinant of a matrix of polynomials (Bareiss).
inline MPoly mp_matrix_det(std::vector<std::vector<MPoly>> m, const FieldCtx& F) {
  int n = (int)m.size();
  if (n == 0) return mp_const(F, F.one());
  MPoly prev = mp_const(F, F.one());
  bool negate = false;
  for (int col = 0; col < n - 1; ++col) {
    int sel = -1;
    for (int r = col; r < n; ++r)
      if (!m[r][col].is_zero()) { sel = r; break; }
    if (sel < 0) return mp_zero(F);
    if (sel != col) { std::swap(m[sel], m[col]); negate = !negate; }
    for (int r = col + 1; r < n; ++r)
      for (int cc = col + 1; cc < n; ++cc) {
        MPoly num = mp_sub(mp_mul(m[r][cc], m[col][col]), mp_mul(m[r][col], m[col][cc]));
        m[r][cc] = mp_exact_div(num, prev);
      }
    for (int r = col + 1; r < n; ++r) m[r][col] = mp_zero(F);
    prev = m[col][col];
  }
  MPoly d = m[n - 1][n - 1];
  return negate ? mp_neg(d) : d;
}

namespace detail {

/// Sylvester matrix rows for declared degrees df, dg (coefficient lists low->high).
template <class T>
std::vector<std::vector<T>> sylvester(const std::vector<T>& cf, int df,
                                      const std::vector<T>& cg, int dg, const T& zero) {
  int n = df + dg;
  std::vector<std::vector<T>> m(n, std::vector<T>(n, zero));
  for (int r = 0; r < dg; ++r)
    for (int i = 0; i <= df; ++i) m[r][r + (df - i)] = cf[i];
  for (int r = 0; r < df; ++r)
    for (int i = 0; i <= dg; ++i) m[dg + r][r + (dg - i)] = cg[i];
  return m;
}

}  // namespace detail

/// Formal resultant of f and g with respect to variable v (declared degrees =
/// their actual v-degrees).  Result does not involve v.  Symbolic Bareiss for
/// small matrices; tensor-grid interpolation with numeric determinants for
/// larger ones (at most two other variables in that case).
inline MPoly mp_resultant_wrt(const MPoly& f, const MPoly& g, int v) {
  assert(f.F == g.F);
  const FieldCtx& F = *f.F;
  if (f.is_zero() || g.is_zero()) return mp_zero(F);
  int df = std::max(f.degree_in(v), 0), dg = std::max(g.degree_in(v), 0);
  if (df == 0 && dg == 0) return mp_const(F, F.one());
  if (df == 0) return mp_pow(f, dg);
  if (dg == 0) return mp_pow(g, df);

  auto cf = mp_coeffs_wrt(f, v), cg = mp_coeffs_wrt(g, v);
  std::vector<int> others;
  for (int w = 0; w < 4; ++w)
    if (w != v && (f.uses_var(w) || g.uses_var(w))) others.push_back(w);

  int n = df + dg;
  if (others.empty()) {
    auto m = detail::sylvester(cf, df, cg, dg, mp_zero(F));
    std::vector<std::vector<Fe>> num(n, std::vector<Fe>(n, F.zero()));
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        if (!m[r][c].is_zero()) num[r][c] = m[r][c].t.begin()->second;
    return mp_const(F, fe_det(std::move(num), F));
  }
  if (n <= 8 || others.size() > 2) {
    if (others.size() > 2 && n > 12)
      throw ExtensionExceeded("resultant too large for symbolic elimination");
    auto m = detail::sylvester(cf, df, cg, dg, mp_zero(F));
    return mp_matrix_det(std::move(m), F);
  }

  // Interpolation route: bound degrees of the resultant in each spare variable.
  std::vector<int> bound;
  uint64_t max_nodes = 0;
  for (int w : others) {
    int bw = dg * std::max(f.degree_in(w), 0) + df * std::max(g.degree_in(w), 0);
    bound.push_back(bw);
    max_nodes = std::max<uint64_t>(max_nodes, bw + 1);
  }
  int M = 0;
  for (int cand = F.k; cand <= FieldCtx::kMaxDegree; cand += F.k) {
    uint64_t qm = 1;
    for (int i = 0; i < cand; ++i) qm *= 3;
    if (qm >= max_nodes) { M = cand; break; }
  }
  if (!M) throw ExtensionExceeded("resultant interpolation needs more than 3^8 nodes");
  const FieldCtx& K = field(M);
  MPoly fK = mp_embed(f, K), gK = mp_embed(g, K);

  auto numeric_res = [&](const std::array<std::optional<Fe>, 4>& vals) -> Fe {
    MPoly fs = fK, gs = gK;
    for (int w = 0; w < 4; ++w)
      if (vals[w]) {
        fs = mp_substitute(fs, w, *vals[w]);
        gs = mp_substitute(gs, w, *vals[w]);
      }
    auto cfs = mp_coeffs_wrt(fs, v), cgs = mp_coeffs_wrt(gs, v);
    cfs.resize(df + 1, MPoly(K));
    cgs.resize(dg + 1, MPoly(K));
    std::vector<Fe> vf(df + 1, K.zero()), vg(dg + 1, K.zero());
    for (int i = 0; i <= df; ++i)
      if (!cfs[i].is_zero()) vf[i] = cfs[i].t.begin()->second;
    for (int i = 0; i <= dg; ++i)
      if (!cgs[i].is_zero()) vg[i] = cgs[i].t.begin()->second;
    auto m = detail::sylvester(vf, df, vg, dg, K.zero());
    return fe_det(std::move(m), K);
  };

  MPoly resK(K);
  if (others.size() == 1) {
    int w = others[0];
    int N = bound[0] + 1;
    std::vector<Fe> xs(N), ys(N);
    for (int i = 0; i < N; ++i) {
      xs[i] = K.from_index(i);
      std::array<std::optional<Fe>, 4> vals{};
      vals[w] = xs[i];
      ys[i] = numeric_res(vals);
    }
    resK = mp_from_upoly(up_interpolate(K, xs, ys), w);
  } else {
    int w0 = others[0], w1 = others[1];
    int N0 = bound[0] + 1, N1 = bound[1] + 1;
    std::vector<Fe> xs0(N0), xs1(N1);
    for (int i = 0; i < N0; ++i) xs0[i] = K.from_index(i);
    for (int j = 0; j < N1; ++j) xs1[j] = K.from_index(j);
    // interpolate along w1 for each node of w0, then along w0 coefficient-wise
    std::vector<UPoly> rows;
    rows.reserve(N0);
    for (int i = 0; i < N0; ++i) {
      std::vector<Fe> ys(N1);
      for (int j = 0; j < N1; ++j) {
        std::array<std::optional<Fe>, 4> vals{};
        vals[w0] = xs0[i];
        vals[w1] = xs1[j];
        ys[j] = numeric_res(vals);
      }
      rows.push_back(up_interpolate(K, xs1, ys));
    }
    int maxd1 = -1;
    for (auto& r : rows) maxd1 = std::max(maxd1, r.deg());
    for (int c1 = 0; c1 <= maxd1; ++c1) {
      std::vector<Fe> ys(N0);
      for (int i = 0; i < N0; ++i) ys[i] = rows[i].coeff(c1);
      UPoly col = up_interpolate(K, xs0, ys);
      for (int c0 = 0; c0 <= col.deg(); ++c0) {
        Mono m{0, 0, 0, 0};
        m[w0] = c0;
        m[w1] = c1;
        resK.add_term(m, col.coeff(c0));
      }
    }
  }
  // the true resultant lives over the original field; restrict back
  return mp_restrict(resK, F.k);
}

// ---------------------------------------------------------------------------
// Root finding across the tower.

struct FieldRoot {
  int k;   // minimal ambient degree (a multiple of the coefficient field's)
  Fe r;    // the root, as an element of field(k)
  int mult;
};

struct RootsResult {
  std::vector<FieldRoot> roots;
  int residual = 0;  // degree mass of roots beyond the requested tower
};

/// All roots of f in extensions L of its coefficient field with [L:GF(3)] <= max_ext.
inline RootsResult up_roots_up_to(const UPoly& f, int max_ext = FieldCtx::kMaxDegree) {
  RootsResult out;
  const FieldCtx& F = *f.F;
  if (f.deg() <= 0) return out;
  int found_mass = 0;
  for (int M = F.k; M <= max_ext; M += F.k) {
    const FieldCtx& K = field(M);
    UPoly fK = up_embed(f, K);
    // restrict the scan to the part of f splitting over K
    UPoly frob = up_frob_power_mod(fK, M);
    UPoly split = up_gcd(up_sub(frob, up_mod(up_x(K), fK)), fK);
    if (split.deg() == 0) continue;
    for (uint32_t i = 0; i < K.q; ++i) {
      Fe r = K.from_index(i);
      if (!up_eval(split, r).is_zero()) continue;
      // report each root at the smallest admissible level only
      int abs_deg = K.min_subfield(r);
      int lcm_deg = F.k / std::gcd(F.k, abs_deg) * abs_deg;
      if (lcm_deg != M) continue;
      int mult = up_root_multiplicity(fK, r);
      out.roots.push_back({M, r, mult});
      found_mass += mult;
    }
  }
  out.residual = f.deg() - found_mass;
  return out;
}

// ---------------------------------------------------------------------------
// 0-dimensional system solving.

struct AffineSol {
  int k;                  // coordinates live in field(k)
  std::vector<Fe> x;
  bool operator==(const AffineSol& o) const { return k == o.k && [&] {
    if (x.size() != o.x.size()) return false;
    for (size_t i = 0; i < x.size(); ++i)
      if (x[i] != o.x[i]) return false;
    return true;
  }(); }
};

struct SolveResult {
  std::vector<AffineSol> sols;
  bool complete = true;   // false if some solutions live beyond the tower
};

namespace detail {

/// Univariate roots of the gcd of a family of univariate polynomials, in
/// extensions of their shared coefficient field bounded by max_ext.
inline std::optional<RootsResult> common_roots(const std::vector<UPoly>& polys,
                                               int max_ext) {
  const FieldCtx* F = polys.empty() ? nullptr : polys[0].F;
  UPoly g(*F);
  bool all_zero = true;
  for (auto& p : polys) {
    if (p.is_zero()) continue;
    all_zero = false;
    if (p.deg() == 0) return RootsResult{};  // a nonzero constant: no roots
    g = g.is_zero() ? p : up_gcd(g, p);
    if (g.deg() == 0) return RootsResult{};
  }
  if (all_zero) return std::nullopt;  // every value is a root
  return up_roots_up_to(g, max_ext);
}

}  // namespace detail

/// All common zeros of a system in the two variables (v0, v1); other variables
/// must be absent.  Throws Error if the solution set has positive dimension.
inline SolveResult solve2(const std::vector<MPoly>& sys_in, int v0, int v1,
                          int max_ext = FieldCtx::kMaxDegree) {
  const FieldCtx& F = *sys_in[0].F;
  std::vector<MPoly> sys;
  for (auto& p : sys_in) {
    if (p.is_zero()) continue;
    for (int w = 0; w < 4; ++w)
      if (w != v0 && w != v1 && p.uses_var(w))
        throw VariableClash("solve2 input uses a third variable");
    if (p.total_degree() == 0) return {};  // nonzero constant: empty
    sys.push_back(p);
  }
  if (sys.empty()) throw Error("solve2: system is identically zero");

  // Eliminate v1: polynomials free of v1 pass through; pairs using v1 give
  // resultants.  A single v1-user contributes no elimination constraint.
  std::vector<MPoly> users, elim;
  for (auto& p : sys)
    (p.uses_var(v1) ? users : elim).push_back(p);
  for (size_t i = 0; i < users.size(); ++i)
    for (size_t j = i + 1; j < users.size(); ++j)
      elim.push_back(mp_resultant_wrt(users[i], users[j], v1));

  std::vector<UPoly> cands;
  for (auto& p : elim) cands.push_back(p.is_zero() ? up_zero(F) : mp_to_upoly(p, v0));
  if (users.empty()) {
    // No equation involves v1, so solutions in v0 would extend to whole
    // v1-lines.  The system is still zero-dimensional when it is empty.
    auto r0 = detail::common_roots(cands, max_ext);
    if (!r0) throw PositiveDimensional("solve2: system vanishes");
    if (!r0->roots.empty() || r0->residual != 0)
      throw PositiveDimensional("solve2: no equation uses v1");
    SolveResult none;
    none.complete = true;
    return none;
  }
  if (cands.empty()) {
    // single user of v1 and nothing else: v0 unconstrained
    throw PositiveDimensional("solve2: v0 unconstrained");
  }
  auto roots0 = detail::common_roots(cands, max_ext);
  if (!roots0) throw PositiveDimensional("solve2: eliminant vanishes");

  SolveResult out;
  out.complete = roots0->residual == 0;
  for (auto& fr : roots0->roots) {
    const FieldCtx& L = field(fr.k);
    std::vector<UPoly> uni;
    for (auto& p : sys) {
      MPoly pL = mp_substitute(mp_embed(p, L), v0, fr.r);
      uni.push_back(pL.is_zero() ? up_zero(L) : mp_to_upoly(pL, v1));
    }
    auto roots1 = detail::common_roots(uni, max_ext);
    if (!roots1) throw PositiveDimensional("solve2: fiber over an eliminant root");
    if (roots1->residual != 0) out.complete = false;
    for (auto& fr1 : roots1->roots) {
      const FieldCtx& Ls = field(fr1.k);
      Fe x0 = Ls.embed_from(L, fr.r);
      // verify on the full system (guards against resultant parasites)
      bool ok = true;
      for (auto& p : sys) {
        MPoly pS = mp_substitute(mp_substitute(mp_embed(p, Ls), v0, x0), v1, fr1.r);
        if (!pS.is_zero()) { ok = false; break; }
      }
      if (ok) out.sols.push_back({fr1.k, {x0, fr1.r}});
    }
  }
  return out;
}

/// All common zeros of a system in three variables (v[0], v[1], v[2]).
inline SolveResult solve3(const std::vector<MPoly>& sys_in, const std::array<int, 3>& v,
                          int max_ext = FieldCtx::kMaxDegree) {
  std::vector<MPoly> sys;
  for (auto& p : sys_in) {
    if (p.is_zero()) continue;
    if (p.total_degree() == 0) return {};
    sys.push_back(p);
  }
  if (sys.empty()) throw Error("solve3: system is identically zero");

  std::vector<MPoly> users, reduced;
  for (auto& p : sys)
    (p.uses_var(v[2]) ? users : reduced).push_back(p);
  for (size_t i = 0; i < users.size(); ++i)
    for (size_t j = i + 1; j < users.size(); ++j)
      reduced.push_back(mp_resultant_wrt(users[i], users[j], v[2]));
  if (users.empty()) {
    // Mirror of the solve2 case: only an empty system stays zero-dimensional.
    SolveResult plane = solve2(reduced, v[0], v[1], max_ext);
    if (!plane.sols.empty() || !plane.complete)
      throw PositiveDimensional("solve3: no equation uses last var");
    SolveResult none;
    none.complete = true;
    return none;
  }

  bool any_nonzero = false;
  for (auto& p : reduced) any_nonzero = any_nonzero || !p.is_zero();
  if (!any_nonzero) throw PositiveDimensional("solve3: all eliminants vanish");

  SolveResult plane = solve2(reduced, v[0], v[1], max_ext);
  SolveResult out;
  out.complete = plane.complete;
  for (auto& s : plane.sols) {
    const FieldCtx& L = field(s.k);
    std::vector<UPoly> uni;
    for (auto& p : sys) {
      MPoly pL = mp_embed(p, L);
      pL = mp_substitute(pL, v[0], s.x[0]);
      pL = mp_substitute(pL, v[1], s.x[1]);
      uni.push_back(pL.is_zero() ? up_zero(L) : mp_to_upoly(pL, v[2]));
    }
    auto roots2 = detail::common_roots(uni, max_ext);
    if (!roots2) throw PositiveDimensional("solve3: fiber over an eliminant root");
    if (roots2->residual != 0) out.complete = false;
    for (auto& fr : roots2->roots) {
      const FieldCtx& Ls = field(fr.k);
      Fe a = Ls.embed_from(L, s.x[0]);
      Fe b = Ls.embed_from(L, s.x[1]);
      bool ok = true;
      for (auto& p : sys) {
        MPoly pS = mp_embed(p, Ls);
        pS = mp_substitute(pS, v[0], a);
        pS = mp_substitute(pS, v[1], b);
        pS = mp_substitute(pS, v[2], fr.r);
        if (!pS.is_zero()) { ok = false; break; }
      }
      if (ok) out.sols.push_back({fr.k, {a, b, fr.r}});
    }
  }
  return out;
}

}  // namespace k3lines
