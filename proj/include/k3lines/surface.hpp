#pragma once
// Quartic surfaces in P^3 over GF(3^k): admissibility validation (nonzero
// homogeneous quartic, squarefree, finite singular locus), enumeration of the
// singular points over extension fields, restriction of the equation to lines,
// and brute-force line searches over a fixed ground field.

#include <algorithm>

#include "binform.hpp"
#include "elim.hpp"
#include "proj.hpp"

namespace k3lines {

struct Surface {
  const FieldCtx* F = nullptr;
  MPoly f;
  std::vector<PPoint> sing;  // singular points, minimal fields, sorted
  bool smooth() const { return sing.empty(); }
};

namespace surface_detail {

/// Deterministic ordering for points that may live in different fields.
inline bool point_less(const PPoint& a, const PPoint& b) {
  if (a.F->k != b.F->k) return a.F->k < b.F->k;
  for (int i = 0; i < 4; ++i)
    if (a.x[i].v != b.x[i].v) return a.x[i].v < b.x[i].v;
  return false;
}

/// Singular points of f in the four disjoint standard charts of P^3.
/// Throws PositiveDimensional when a chart system has a solution curve and
/// ExtensionExceeded when points exist beyond the field cap.
inline std::vector<PPoint> sing_points_in_charts(const MPoly& f,
                                                 const std::array<int, 3>& order,
                                                 int max_ext) {
  const FieldCtx& F = *f.F;
  std::array<MPoly, 4> d{mp_derivative(f, 0), mp_derivative(f, 1), mp_derivative(f, 2),
                         mp_derivative(f, 3)};
  // Euler in degree 4 over characteristic 3: sum x_i d_i = 4f = f, so the
  // singular locus is cut out by the partials alone.
  std::vector<PPoint> pts;
  // chart x0 = 1
  {
    std::vector<MPoly> sys;
    for (auto& p : d) sys.push_back(mp_substitute(p, 0, F.one()));
    SolveResult sr = solve3(sys, order, max_ext);
    if (!sr.complete)
      throw ExtensionExceeded("singular point beyond the field cap");
    for (auto& s : sr.sols) {
      const FieldCtx& K = field(s.k);
      Row4 x{K.one(), K.zero(), K.zero(), K.zero()};
      for (int i = 0; i < 3; ++i) x[order[i]] = s.x[i];
      pts.push_back(PPoint(K, x));
    }
  }
  // chart x0 = 0, x1 = 1
  {
    std::vector<MPoly> sys;
    for (auto& p : d)
      sys.push_back(mp_substitute(mp_substitute(p, 0, F.zero()), 1, F.one()));
    SolveResult sr = solve2(sys, 2, 3, max_ext);
    if (!sr.complete)
      throw ExtensionExceeded("singular point beyond the field cap");
    for (auto& s : sr.sols) {
      const FieldCtx& K = field(s.k);
      pts.push_back(PPoint(K, {K.zero(), K.one(), s.x[0], s.x[1]}));
    }
  }
  // chart x0 = x1 = 0, x2 = 1
  {
    std::vector<UPoly> kept;
    bool all_zero = true;
    for (auto& p : d) {
      MPoly r = mp_substitute(mp_substitute(mp_substitute(p, 0, F.zero()), 1, F.zero()), 2,
                              F.one());
      if (r.t.empty()) continue;
      all_zero = false;
      kept.push_back(mp_to_upoly(r, 3));
    }
    if (all_zero) throw PositiveDimensional("surface singular along {x0 = x1 = 0}");
    UPoly g = kept[0];
    for (size_t i = 1; i < kept.size(); ++i) g = up_gcd(g, kept[i]);
    if (g.deg() > 0) {
      RootsResult rr = up_roots_up_to(g, max_ext);
      if (rr.residual > 0)
        throw ExtensionExceeded("singular point beyond the field cap");
      for (auto& r : rr.roots) {
        const FieldCtx& K = field(r.k);
        pts.push_back(PPoint(K, {K.zero(), K.zero(), K.one(), r.r}));
      }
    }
  }
  // chart point [0:0:0:1]
  {
    std::array<Fe, 4> at{F.zero(), F.zero(), F.zero(), F.one()};
    bool is_sing = true;
    for (auto& p : d) is_sing = is_sing && mp_eval(p, at).is_zero();
    if (is_sing) pts.push_back(PPoint(F, {F.zero(), F.zero(), F.zero(), F.one()}));
  }
  // store over minimal fields
  for (auto& p : pts) {
    int mk = pp_min_field(p);
    if (mk != p.F->k) p = pp_restrict(p, mk);
  }
  std::sort(pts.begin(), pts.end(), point_less);
  return pts;
}

}  // namespace surface_detail

/// Enumerate the singular points of an admissible quartic.  Chart elimination
/// can hit degenerate projections even for finite singular loci, so the
/// variable order is rotated and then random coordinate shears are tried;
/// when every attempt reports a solution curve the locus really is infinite
/// and PositiveDimensional escapes to the caller.
inline std::vector<PPoint> surface_singular_points(const MPoly& f,
                                                   int max_ext = FieldCtx::kMaxDegree,
                                                   uint64_t seed = 0x5eedULL) {
  using namespace surface_detail;
  const FieldCtx& F = *f.F;
  const std::array<std::array<int, 3>, 3> orders{{{1, 2, 3}, {2, 3, 1}, {3, 1, 2}}};
  for (auto& ord : orders) {
    try {
      return sing_points_in_charts(f, ord, max_ext);
    } catch (const PositiveDimensional&) {
      // retry with the next elimination order
    }
  }
  Rng rng(seed);
  for (int attempt = 0; attempt < 5; ++attempt) {
    // random invertible shear M; solve for g(y) = f(My), map back by x = My
    std::array<std::array<Fe, 4>, 4> M;
    Fe det;
    do {
      for (auto& row : M)
        for (auto& e : row) e = F.from_index(uint32_t(rng.below(F.q)));
      std::vector<Row4> rows(4);
      for (int i = 0; i < 4; ++i) rows[i] = {M[i][0], M[i][1], M[i][2], M[i][3]};
      det = det_rows(rows, F, 4);
    } while (det.is_zero());
    MPoly g = mp_linear_subst(f, M);
    std::vector<PPoint> pts;
    try {
      pts = sing_points_in_charts(g, {1, 2, 3}, max_ext);
    } catch (const PositiveDimensional&) {
      continue;
    }
    std::vector<PPoint> back;
    for (auto& p : pts) {
      const FieldCtx& K = *p.F;
      Row4 x{K.zero(), K.zero(), K.zero(), K.zero()};
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          x[i] = K.add(x[i], K.mul(K.embed_from(F, M[i][j]), p.x[j]));
      PPoint q(K, x);
      int mk = pp_min_field(q);
      back.push_back(mk == K.k ? q : pp_restrict(q, mk));
    }
    std::sort(back.begin(), back.end(), point_less);
    return back;
  }
  throw PositiveDimensional("surface singular locus");
}

/// Validate and build a Surface.  Throws NotK3 with the failing reason.
inline Surface make_surface(const MPoly& f, int max_ext = FieldCtx::kMaxDegree) {
  const FieldCtx& F = *f.F;
  if (f.t.empty()) throw NotK3(NotK3::Reason::Zero, "the zero polynomial");
  int deg = -1;
  if (!f.is_homogeneous(&deg))
    throw NotK3(NotK3::Reason::NotHomogeneous, "inhomogeneous polynomial");
  if (deg != 4)
    throw NotK3(NotK3::Reason::NotQuartic, "degree " + std::to_string(deg) + " form");
  // Squarefree: a repeated factor divides every partial (degree 4 is prime to
  // 3, so not all partials vanish), and conversely a common factor of f and
  // all partials has derivative zero, forcing a cube — impossible squarefree.
  MPoly g = f;
  for (int i = 0; i < 4; ++i) {
    MPoly di = mp_derivative(f, i);
    if (!di.t.empty()) g = mp_gcd(g, di);
  }
  if (g.total_degree() > 0)
    throw NotK3(NotK3::Reason::NotSquarefree, "repeated factor " + mp_to_string(g));
  std::vector<PPoint> sing;
  try {
    sing = surface_singular_points(f, max_ext);
  } catch (const PositiveDimensional&) {
    throw NotK3(NotK3::Reason::SingularLocusNotFinite, "singular along a curve");
  }
  Surface S;
  S.F = &F;
  S.f = f;
  S.sing = std::move(sing);
  return S;
}

// ---------------------------------------------------------------------------
// Restriction to lines
// ---------------------------------------------------------------------------

/// The binary quartic f(s a + u b) on the line spanned by a, b; the returned
/// form lives over the compositum of the surface and line fields.
inline BForm restrict_to_line(const MPoly& f, const PLine& L) {
  int kk = compositum_degree(f.F->k, L.F->k);
  const FieldCtx& K = field(kk);
  MPoly fK = mp_embed(f, K);
  MPoly s = mp_var(K, 0), u = mp_var(K, 1);
  std::array<MPoly, 4> images;
  for (int i = 0; i < 4; ++i)
    images[i] = mp_add(mp_scale(s, K.embed_from(*L.F, L.a[i])),
                       mp_scale(u, K.embed_from(*L.F, L.b[i])));
  MPoly r = mp_compose(fK, images);
  BForm out(K, 4);
  for (auto& [key, c] : r.t) {
    Mono m = mono_unkey(key);
    assert(m[2] == 0 && m[3] == 0 && m[0] + m[1] == 4);
    out.c[m[0]] = c;
  }
  return out;
}

inline bool surface_contains_line(const MPoly& f, const PLine& L) {
  return restrict_to_line(f, L).is_zero();
}

/// f(X y) for the move-to-standard matrix of L: the line becomes {y0 = y1 = 0}.
inline MPoly surface_moved_to_standard(const MPoly& f, const PLine& L) {
  int kk = compositum_degree(f.F->k, L.F->k);
  const FieldCtx& K = field(kk);
  MPoly fK = mp_embed(f, K);
  PLine LK = L.F->k == kk ? L : pl_embed(L, K);
  auto X = move_line_to_standard(LK);
  return mp_linear_subst(fK, X);
}

// ---------------------------------------------------------------------------
// Brute-force line search over a fixed ground field
// ---------------------------------------------------------------------------

/// All lines of P^3(GF(3^k)) contained in the surface, by direct scan.
/// k = 1 tests each of the 130 lines symbolically; larger fields evaluate at
/// five points of the line, which pins down a vanishing binary quartic since
/// a nonzero one has at most four projective roots.
inline std::vector<PLine> lines_on_surface_brute(const MPoly& f, int k) {
  int kk = compositum_degree(f.F->k, k);
  if (kk != k)
    throw NotASubfield(f.F->k, k);
  const FieldCtx& K = field(k);
  MPoly fK = mp_embed(f, K);
  std::vector<PLine> out;
  if (K.q + 1 < 5) {
    for (auto& L : all_lines_p3(K))
      if (surface_contains_line(fK, L)) out.push_back(L);
    return out;
  }
  std::array<std::pair<Fe, Fe>, 5> samples{{{K.one(), K.zero()},
                                            {K.zero(), K.one()},
                                            {K.one(), K.one()},
                                            {K.one(), K.gen()},
                                            {K.one(), K.mul(K.gen(), K.gen())}}};
  for (auto& L : all_lines_p3(K)) {
    bool on = true;
    for (auto& [s, u] : samples) {
      Row4 p = L.at(s, u).x;
      if (!mp_eval(fK, {p[0], p[1], p[2], p[3]}).is_zero()) {
        on = false;
        break;
      }
    }
    if (on) out.push_back(L);
  }
  return out;
}

/// Number of lines in P^3(GF(q)): (q^2 + 1)(q^2 + q + 1).
inline long long p3_line_count(int k) {
  long long q = 1;
  for (int i = 0; i < k; ++i) q *= 3;
  return (q * q + 1) * (q * q + q + 1);
}

}  // namespace k3lines
