#pragma once
// Exact enumeration of all lines on a quartic surface over the algebraic
// closure of GF(3).
//
// Lines of P^3 fall into six disjoint Schubert cells indexed by the pivot
// columns of their canonical RREF basis.  Restricting the quartic to the
// parametrized cell line s*A + u*B yields five coefficient polynomials
// E_0..E_4 in the cell parameters (E_j multiplies s^(4-j) u^j); the line lies
// on the surface exactly when all five vanish.  Two passes cover the closure:
//
//  * Field scans produce every line whose definition field fits inside the
//    concrete degree cap.  Each cell is searched over a family of scan fields
//    GF(3^m) chosen so that every admissible definition field embeds into one
//    of them; inside a scan field the solutions are found by exhausting one
//    parameter and extracting the remaining ones through in-field univariate
//    root finding, which is exact (gcd with x^q - x).  E_0 depends only on
//    the parameters of row A and E_1 is linear in the parameters of row B, so
//    the big cell costs one field scan for the A-row times root extraction
//    for the B-row.
//
//  * A closure census per cell certifies completeness and counts the lines
//    that live beyond the cap.  Eliminating the cell parameters back to front
//    by formal resultants gives a triangular ladder whose level r involves
//    only the first r+1 parameters; every true solution survives at every
//    level because specializing a formal resultant commutes with specializing
//    its inputs.  The census walks the ladder, branching on the irreducible
//    factors of the level gcd; a factor whose root field still fits the cap
//    is split into individual roots, while a larger factor extends the
//    coefficient field as a quotient tower and multiplies the branch by its
//    orbit size.  Leaves are verified against all five E_j, which eliminates
//    the parasite roots the resultants introduce; verified leaves inside the
//    cap must reproduce the scan results exactly, and verified leaves beyond
//    the cap are reported as counted classes.  Positive-dimensional loci
//    (cones carry one through every vertex chart) are detected and reported
//    instead of enumerated.

#include <deque>
#include <functional>
#include <set>

#include "elim.hpp"
#include "surface.hpp"
#include "tower.hpp"

namespace k3lines {

/// Scan fields for a surface whose coefficients generate GF(3^base_k):
/// multiples of base_k up to max_ext that are maximal under divisibility.
/// Every GF(3^j) with lcm(j, base_k) <= max_ext embeds into one of them.
inline std::vector<int> line_search_fields(int base_k, int max_ext) {
  if (max_ext < 1 || max_ext > FieldCtx::kMaxDegree) throw UnsupportedDegree(max_ext);
  std::vector<int> ms;
  for (int m = base_k; m <= max_ext; m += base_k) ms.push_back(m);
  if (ms.empty())
    throw ExtensionExceeded("surface coefficients generate GF(3^" +
                            std::to_string(base_k) + "), beyond the search cap 3^" +
                            std::to_string(max_ext));
  std::vector<int> keep;
  for (int m : ms) {
    bool dominated = false;
    for (int m2 : ms) dominated = dominated || (m2 > m && m2 % m == 0);
    if (!dominated) keep.push_back(m);
  }
  return keep;
}

/// A verified class of lines on the surface whose joint parameter field lies
/// beyond the concrete cap: `count` distinct lines of the algebraic closure,
/// conjugate over the scan base field, whose cell parameters generate a field
/// tower of absolute degree `degree` over GF(3).
struct ClosureClass {
  std::array<int, 2> cell;  // pivot columns of the Schubert cell
  int degree;
  long long count;
};

/// Exact enumeration result: every line inside the cap (over its minimal
/// field, sorted by canonical key) plus the closure census.  When
/// closure_complete() holds, lines + beyond account for every line of the
/// surface over the algebraic closure and closure_count() is exact; families
/// record positive-dimensional loci (a cone carries one through its vertex),
/// and unresolved records branches the census could not decide, in which case
/// closure_count() is a certified lower bound.
struct ExactLines {
  std::vector<PLine> lines;
  std::vector<ClosureClass> beyond;
  std::vector<std::string> families;
  std::vector<std::string> unresolved;

  bool closure_complete() const { return families.empty() && unresolved.empty(); }
  long long closure_count() const {
    long long n = (long long)lines.size();
    for (auto& b : beyond) n += b.count;
    return n;
  }
};

namespace lines_detail {

/// Roots (in the coefficient field only) of a polynomial that splits into
/// distinct linear factors there, by equal-degree splitting.
inline void split_roots(const UPoly& g, std::vector<Fe>& out, Rng& rng) {
  const FieldCtx& K = *g.F;
  if (g.deg() <= 0) return;
  if (g.deg() == 1) {
    out.push_back(K.neg(K.div(g.coeff(0), g.coeff(1))));
    return;
  }
  for (int tries = 0; tries < 200; ++tries) {
    Fe delta = K.from_index((uint32_t)rng.below(K.q));
    UPoly h = up_powmod(UPoly(K, {delta, K.one()}), (K.q - 1) / 2, g);
    UPoly d = up_gcd(g, up_sub(h, up_const(K, K.one())));
    if (d.deg() > 0 && d.deg() < g.deg()) {
      split_roots(d, out, rng);
      split_roots(up_exact_div(g, d), out, rng);
      return;
    }
  }
  throw Error("equal-degree splitting did not converge");
}

/// All distinct roots of p lying in its own coefficient field, sorted.
inline std::vector<Fe> field_roots(const UPoly& p, Rng& rng) {
  assert(!p.is_zero());
  std::vector<Fe> out;
  const FieldCtx& K = *p.F;
  if (p.deg() <= 0) return out;
  if (p.deg() == 1) {
    out.push_back(K.neg(K.div(p.coeff(0), p.coeff(1))));
    return out;
  }
  UPoly xq = up_frob_power_mod(p, K.k);
  UPoly g = up_gcd(p, up_sub(xq, up_mod(up_x(K), p)));
  split_roots(g, out, rng);
  std::sort(out.begin(), out.end(), [](Fe x, Fe y) { return x.v < y.v; });
  return out;
}

/// Coefficients E_0..E_4 of f(s*A + u*B) with respect to s^(4-j) u^j, as
/// polynomials in the cell parameters (the entries of A and B are constants
/// or parameter variables).
inline std::array<MPoly, 5> cell_system(const MPoly& f, const std::array<MPoly, 4>& A,
                                        const std::array<MPoly, 4>& B) {
  const FieldCtx& K = *f.F;
  std::array<MPoly, 5> E{mp_zero(K), mp_zero(K), mp_zero(K), mp_zero(K), mp_zero(K)};
  for (auto& [key, c] : f.t) {
    Mono m = mono_unkey(key);
    // conv[j] = coefficient of u^j in prod_v (A_v s + B_v u)^(m_v), times c
    std::vector<MPoly> conv{mp_const(K, c)};
    for (int v = 0; v < 4; ++v)
      for (int rep = 0; rep < m[v]; ++rep) {
        std::vector<MPoly> next(conv.size() + 1, mp_zero(K));
        for (size_t i = 0; i < conv.size(); ++i) {
          if (conv[i].is_zero()) continue;
          next[i] = mp_add(next[i], mp_mul(conv[i], A[v]));
          next[i + 1] = mp_add(next[i + 1], mp_mul(conv[i], B[v]));
        }
        conv = std::move(next);
      }
    assert(conv.size() == 5);
    for (int j = 0; j < 5; ++j) E[j] = mp_add(E[j], conv[j]);
  }
  return E;
}

/// One Schubert cell of the line Grassmannian: pivot columns, the RREF row
/// pattern (kOne / kZero / parameter slot), and the parameter slots in the
/// order the search walks them.
struct CellShape {
  static constexpr int kOne = -1, kZero = -2;
  std::array<int, 2> pivots;
  std::array<std::array<int, 4>, 2> rows;
  std::vector<int> vars;
};

inline const std::vector<CellShape>& cell_shapes() {
  constexpr int I = CellShape::kOne, O = CellShape::kZero;
  static const std::vector<CellShape> shapes = {
      {{0, 1}, {{{I, O, 0, 1}, {O, I, 2, 3}}}, {0, 1, 2, 3}},
      {{0, 2}, {{{I, 0, O, 1}, {O, O, I, 2}}}, {0, 1, 2}},
      {{0, 3}, {{{I, 0, 1, O}, {O, O, O, I}}}, {0, 1}},
      {{1, 2}, {{{O, I, O, 0}, {O, O, I, 1}}}, {0, 1}},
      {{1, 3}, {{{O, I, 0, O}, {O, O, O, I}}}, {0}},
      {{2, 3}, {{{O, O, I, O}, {O, O, O, I}}}, {}},
  };
  return shapes;
}

/// The E_0..E_4 system of a cell, over the field of fK.
inline std::array<MPoly, 5> shape_system(const MPoly& fK, const CellShape& sh) {
  const FieldCtx& K = *fK.F;
  std::array<std::array<MPoly, 4>, 2> rows;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 4; ++c) {
      int code = sh.rows[r][c];
      rows[r][c] = code == CellShape::kOne    ? mp_const(K, K.one())
                   : code == CellShape::kZero ? mp_zero(K)
                                              : mp_var(K, code);
    }
  return cell_system(fK, rows[0], rows[1]);
}

/// The line of a cell at given parameter-slot values.
inline PLine shape_line(const CellShape& sh, const FieldCtx& K,
                        const std::array<Fe, 4>& vals) {
  std::array<Row4, 2> rows;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 4; ++c) {
      int code = sh.rows[r][c];
      rows[r][c] = code == CellShape::kOne    ? K.one()
                   : code == CellShape::kZero ? K.zero()
                                              : vals[code];
    }
  return PLine(K, rows[0], rows[1]);
}

struct SearchCtx {
  MPoly f;  // surface equation over its minimal field
  Rng rng{0x11E5C4B5A17D3ull};
  std::set<LineKey> seen;
  std::vector<std::pair<LineKey, PLine>> found;

  void offer(const PLine& L) {
    LineKey key = line_key(L);
    if (!seen.insert(key).second) return;
    PLine Lmin = key.k == L.F->k ? L : pl_restrict(L, key.k);
    if (!surface_contains_line(f, Lmin))
      throw Error("internal: exact line search produced a line off the surface");
    found.push_back({key, Lmin});
  }
};

inline bool all_vanish(const std::array<MPoly, 5>& E, const Row4& vals) {
  for (auto& p : E)
    if (!mp_eval(p, vals).is_zero()) return false;
  return true;
}

[[noreturn]] inline void pencil_error() {
  throw PositiveDimensional("a pencil of lines lies on the surface");
}

/// Cells (0,3) and (1,2): two parameters in slots 0, 1.
inline void search_two_params(const std::array<MPoly, 5>& E, const FieldCtx& K,
                              const std::function<PLine(Fe, Fe)>& mk, SearchCtx& ctx) {
  // If some equation involves only slot 0, its roots bound the slot-0 scan.
  std::vector<Fe> a_list;
  bool scan_all = true;
  for (auto& p : E)
    if (!p.is_zero() && !p.uses_var(1)) {
      a_list = field_roots(mp_to_upoly(p, 0), ctx.rng);
      scan_all = false;
      break;
    }
  auto handle_a = [&](Fe a) {
    std::array<MPoly, 5> Ea;
    const MPoly* base = nullptr;
    for (int j = 0; j < 5; ++j) {
      Ea[j] = mp_substitute(E[j], 0, a);
      if (!base && !Ea[j].is_zero()) base = &Ea[j];
    }
    if (!base) pencil_error();
    for (Fe b : field_roots(mp_to_upoly(*base, 1), ctx.rng))
      if (all_vanish(E, {a, b, K.zero(), K.zero()})) ctx.offer(mk(a, b));
  };
  if (scan_all)
    for (uint32_t i = 0; i < K.q; ++i) handle_a(K.from_index(i));
  else
    for (Fe a : a_list) handle_a(a);
}

/// Cell (1,3): one parameter in slot 0.
inline void search_one_param(const std::array<MPoly, 5>& E, const FieldCtx& K,
                             const std::function<PLine(Fe)>& mk, SearchCtx& ctx) {
  const MPoly* base = nullptr;
  for (auto& p : E)
    if (!p.is_zero()) {
      base = &p;
      break;
    }
  if (!base) pencil_error();
  for (Fe a : field_roots(mp_to_upoly(*base, 0), ctx.rng))
    if (all_vanish(E, {a, K.zero(), K.zero(), K.zero()})) ctx.offer(mk(a));
}

/// Cell (0,2): parameters a, b (row A, slots 0, 1) and c (row B, slot 2).
/// E_0 constrains (a, b) alone; for fixed (a, b) the rest are univariate in c.
inline void search_cell_02(const std::array<MPoly, 5>& E, const FieldCtx& K,
                           const std::function<PLine(Fe, Fe, Fe)>& mk, SearchCtx& ctx) {
  assert(!E[0].uses_var(2) && !E[0].uses_var(3));
  for (uint32_t i = 0; i < K.q; ++i) {
    Fe a = K.from_index(i);
    MPoly E0a = mp_substitute(E[0], 0, a);
    auto for_each_b = [&](auto&& fn) {
      if (E0a.is_zero()) {
        for (uint32_t ib = 0; ib < K.q; ++ib) fn(K.from_index(ib));
      } else {
        for (Fe b : field_roots(mp_to_upoly(E0a, 1), ctx.rng)) fn(b);
      }
    };
    for_each_b([&](Fe b) {
      const MPoly* base = nullptr;
      std::array<MPoly, 5> Eab;
      for (int j = 1; j < 5; ++j) {
        Eab[j] = mp_substitute(mp_substitute(E[j], 0, a), 1, b);
        if (!base && !Eab[j].is_zero()) base = &Eab[j];
      }
      if (!base) pencil_error();
      for (Fe c : field_roots(mp_to_upoly(*base, 2), ctx.rng))
        if (all_vanish(E, {a, b, c, K.zero()})) ctx.offer(mk(a, b, c));
    });
  }
}

/// The big cell (0,1): parameters a, b (row A) and c, d (row B).  E_0 cuts a
/// curve in (a, b); over each of its points E_1 = alpha0 + alpha2 c + alpha3 d
/// is linear in (c, d), so one substitution reduces everything to univariate
/// root finding.  When E_1 collapses (the point (1,0,a,b) is singular on the
/// surface), the lowest nonvanishing E_j is enumerated as a curve instead.
inline void search_cell_01(const std::array<MPoly, 5>& E, const FieldCtx& K,
                           const std::function<PLine(Fe, Fe, Fe, Fe)>& mk,
                           SearchCtx& ctx) {
  assert(!E[0].uses_var(2) && !E[0].uses_var(3));
  const MPoly x2 = mp_var(K, 2);
  for (uint32_t i = 0; i < K.q; ++i) {
    Fe a = K.from_index(i);
    MPoly E0a = mp_substitute(E[0], 0, a);
    auto for_each_b = [&](auto&& fn) {
      if (E0a.is_zero()) {
        for (uint32_t ib = 0; ib < K.q; ++ib) fn(K.from_index(ib));
      } else {
        for (Fe b : field_roots(mp_to_upoly(E0a, 1), ctx.rng)) fn(b);
      }
    };
    for_each_b([&](Fe b) {
      std::array<MPoly, 5> Eab;  // slots 1..4 used
      for (int j = 1; j < 5; ++j)
        Eab[j] = mp_substitute(mp_substitute(E[j], 0, a), 1, b);
      const MPoly& L1 = Eab[1];
      if (L1.total_degree() > 1)
        throw Error("internal: mixed restriction coefficient is not linear");
      Fe a0 = L1.coeff({0, 0, 0, 0});
      Fe a2 = L1.coeff({0, 0, 1, 0});
      Fe a3 = L1.coeff({0, 0, 0, 1});
      if (a2.is_zero() && a3.is_zero()) {
        if (!a0.is_zero()) return;  // E_1 is a nonzero constant: no line here
        // singular direction point: walk the curve cut by the lowest nonzero E_j
        const MPoly* base = nullptr;
        for (int j = 2; j < 5; ++j)
          if (!Eab[j].is_zero()) {
            base = &Eab[j];
            break;
          }
        if (!base) pencil_error();
        for (uint32_t ic = 0; ic < K.q; ++ic) {
          Fe c = K.from_index(ic);
          const MPoly* dbase = nullptr;
          std::array<MPoly, 5> Ec;
          for (int j = 2; j < 5; ++j) {
            Ec[j] = mp_substitute(Eab[j], 2, c);
            if (!dbase && !Ec[j].is_zero()) dbase = &Ec[j];
          }
          if (!dbase) pencil_error();
          for (Fe d : field_roots(mp_to_upoly(*dbase, 3), ctx.rng))
            if (all_vanish(E, {a, b, c, d})) ctx.offer(mk(a, b, c, d));
        }
        return;
      }
      if (!a3.is_zero()) {
        // d = d0 + d1 c along E_1 = 0
        Fe d0 = K.neg(K.div(a0, a3)), d1 = K.neg(K.div(a2, a3));
        std::array<MPoly, 4> images{mp_zero(K), mp_zero(K), x2,
                                    mp_add(mp_const(K, d0), mp_scale(x2, d1))};
        const MPoly* base = nullptr;
        MPoly comp[5];
        for (int j = 2; j < 5; ++j) {
          comp[j] = mp_compose(Eab[j], images);
          if (!base && !comp[j].is_zero()) base = &comp[j];
        }
        if (!base) pencil_error();
        for (Fe c : field_roots(mp_to_upoly(*base, 2), ctx.rng)) {
          Fe d = K.add(d0, K.mul(d1, c));
          if (all_vanish(E, {a, b, c, d})) ctx.offer(mk(a, b, c, d));
        }
      } else {
        // a2 != 0: c is pinned, d runs over roots
        Fe c = K.neg(K.div(a0, a2));
        const MPoly* base = nullptr;
        std::array<MPoly, 5> Ec;
        for (int j = 2; j < 5; ++j) {
          Ec[j] = mp_substitute(Eab[j], 2, c);
          if (!base && !Ec[j].is_zero()) base = &Ec[j];
        }
        if (!base) pencil_error();
        for (Fe d : field_roots(mp_to_upoly(*base, 3), ctx.rng))
          if (all_vanish(E, {a, b, c, d})) ctx.offer(mk(a, b, c, d));
      }
    });
  }
}

inline void search_scan_field(SearchCtx& ctx, const FieldCtx& K) {
  MPoly fK = mp_embed(ctx.f, K);
  const Fe z = K.zero();
  for (const CellShape& sh : cell_shapes()) {
    auto E = shape_system(fK, sh);
    switch ((int)sh.vars.size()) {
      case 4:
        search_cell_01(E, K,
                       [&](Fe a, Fe b, Fe c, Fe d) {
                         return shape_line(sh, K, {a, b, c, d});
                       },
                       ctx);
        break;
      case 3:
        search_cell_02(E, K,
                       [&](Fe a, Fe b, Fe c) { return shape_line(sh, K, {a, b, c, z}); },
                       ctx);
        break;
      case 2:
        search_two_params(E, K,
                          [&](Fe a, Fe b) { return shape_line(sh, K, {a, b, z, z}); },
                          ctx);
        break;
      case 1:
        search_one_param(E, K, [&](Fe a) { return shape_line(sh, K, {a, z, z, z}); },
                         ctx);
        break;
      default: {  // the parameter-free cell: one candidate line
        bool on = true;
        for (auto& p : E) on = on && p.is_zero();
        if (on) ctx.offer(shape_line(sh, K, {z, z, z, z}));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Closure census.

/// Ladder of elimination levels for one cell: level[r] holds polynomials in
/// the first r+1 walk parameters only, obtained by eliminating the later
/// parameters back to front with formal resultants.  Every true solution
/// prefix is a common zero at every level; parasites are pruned later.
struct CellLadders {
  std::vector<std::vector<MPoly>> level;
  bool empty_cell = false;  // two constraints are outright incompatible
};

/// Scale so the first stored monomial has coefficient one (collapses scalar
/// duplicates among constraints).
inline MPoly mp_unitize(const MPoly& p) {
  if (p.is_zero()) return p;
  Fe c0 = p.t.begin()->second;
  return c0 == p.F->one() ? p : mp_scale(p, p.F->inv(c0));
}

inline void ladder_push(std::vector<MPoly>& dst, const MPoly& p, bool& empty_cell) {
  if (p.is_zero() || empty_cell) return;
  if (p.total_degree() == 0) {
    empty_cell = true;  // a nonzero constant never vanishes
    return;
  }
  MPoly u = mp_unitize(p);
  for (auto& q : dst)
    if (q.t == u.t) return;
  dst.push_back(std::move(u));
}

/// Eliminate vars back to front.  At each level the polynomial of lowest
/// degree in the departing variable is the pivot and is paired against every
/// other user; dropping a lone user only enlarges the projection, so the
/// ladder stays a superset of the true solution set.
inline CellLadders build_ladders(const std::vector<MPoly>& sys,
                                 const std::vector<int>& vars) {
  CellLadders L;
  int n = (int)vars.size();
  L.level.assign(n, {});
  for (auto& p : sys) {
    ladder_push(L.level[n - 1], p, L.empty_cell);
    if (L.empty_cell) return L;
  }
  for (int r = n - 1; r >= 1; --r) {
    int v = vars[r];
    std::vector<const MPoly*> users;
    for (auto& p : L.level[r]) {
      if (p.uses_var(v)) {
        users.push_back(&p);
      } else {
        ladder_push(L.level[r - 1], p, L.empty_cell);
        if (L.empty_cell) return L;
      }
    }
    if (users.size() < 2) continue;
    auto lighter = [&](const MPoly* x, const MPoly* y) {
      int dx = x->degree_in(v), dy = y->degree_in(v);
      return dx != dy ? dx < dy : x->t.size() < y->t.size();
    };
    const MPoly* pivot = *std::min_element(users.begin(), users.end(), lighter);
    for (const MPoly* u : users) {
      if (u == pivot) continue;
      ladder_push(L.level[r - 1], mp_resultant_wrt(*pivot, *u, v), L.empty_cell);
      if (L.empty_cell) return L;
    }
  }
  return L;
}

/// Parameter-slot assignment over a tower field.
struct TPrefix {
  const TField* K = nullptr;
  std::vector<std::pair<int, TEl>> vals;

  const TEl* find(int slot) const {
    for (auto& [s, v] : vals)
      if (s == slot) return &v;
    return nullptr;
  }
};

inline TEl t_pow_cached(const TField& K, const TEl& base, int e,
                        std::vector<TEl>& cache) {
  if (cache.empty()) cache.push_back(tf_one(K));
  while ((int)cache.size() <= e) cache.push_back(tf_mul(K, cache.back(), base));
  return cache[e];
}

/// Specialize a polynomial at the prefix: sparse terms in the unassigned
/// slots with coefficients in the prefix field.  The coefficient field of p
/// must embed into the tower's concrete root.
inline std::map<uint64_t, TEl> t_specialize(const MPoly& p, const TPrefix& pre) {
  const TField& K = *pre.K;
  const FieldCtx& root = tf_root(K);
  std::array<std::vector<TEl>, 4> pows;
  std::map<uint64_t, TEl> out;
  for (auto& [key, c] : p.t) {
    Mono m = mono_unkey(key);
    TEl acc = tf_from_fe(K, root.embed_from(*p.F, c));
    Mono rest{0, 0, 0, 0};
    for (int v = 0; v < 4; ++v) {
      if (!m[v]) continue;
      if (const TEl* val = pre.find(v))
        acc = tf_mul(K, acc, t_pow_cached(K, *val, m[v], pows[v]));
      else
        rest[v] = m[v];
    }
    if (tf_is_zero(K, acc)) continue;
    uint64_t rk = mono_key(rest);
    auto it = out.find(rk);
    if (it == out.end()) {
      out.emplace(rk, std::move(acc));
    } else {
      it->second = tf_add(K, it->second, acc);
      if (tf_is_zero(K, it->second)) out.erase(it);
    }
  }
  return out;
}

/// Univariate view of specialized terms in slot v (no other slot may remain).
inline TPoly t_to_tpoly(const std::map<uint64_t, TEl>& terms, const TField& K, int v) {
  TPoly p{&K, {}};
  for (auto& [key, c] : terms) {
    Mono m = mono_unkey(key);
    for (int w = 0; w < 4; ++w) assert(w == v || m[w] == 0);
    if ((int)p.c.size() <= m[v]) p.c.resize(m[v] + 1, tf_zero(K));
    p.c[m[v]] = c;
  }
  p.normalize();
  return p;
}

struct CensusCtx {
  int cap = FieldCtx::kMaxDegree;
  Rng rng{0xC3A51D15E7ull};
  std::deque<TField> store;              // tower extensions; addresses stable
  std::map<int, TField> concrete_store;  // degree -> concrete wrapper

  const TField* concrete(int k2) {
    auto it = concrete_store.find(k2);
    if (it == concrete_store.end())
      it = concrete_store.emplace(k2, tf_concrete(field(k2))).first;
    return &it->second;
  }
};

struct CellCensus {
  std::vector<std::pair<LineKey, PLine>> rational;
  std::vector<ClosureClass> beyond;
  std::vector<std::string> families;
  std::vector<std::string> unresolved;
};

inline std::string cell_note(const CellShape& sh, int pinned, int field_deg,
                             const std::string& what) {
  return "cell (" + std::to_string(sh.pivots[0]) + "," +
         std::to_string(sh.pivots[1]) + "): " + what + " [" +
         std::to_string(pinned) + " of " + std::to_string(sh.vars.size()) +
         " parameters pinned, prefix field degree " + std::to_string(field_deg) +
         "]";
}

inline void census_walk(CensusCtx& cx, CellCensus& res, const CellShape& sh,
                        const std::array<MPoly, 5>& E,
                        const std::vector<std::vector<MPoly>>& levels,
                        const std::vector<int>& vars, int r, const TPrefix& pre,
                        long long mult, int depth);

/// Full-prefix candidate: verify every restriction coefficient, then record a
/// rational line (concrete prefix) or a counted beyond-cap class.
inline void census_leaf(CellCensus& res, const CellShape& sh,
                        const std::array<MPoly, 5>& E, const TPrefix& pre,
                        long long mult) {
  for (auto& p : E)
    if (!p.is_zero() && !t_specialize(p, pre).empty()) return;  // parasite root
  const TField& K = *pre.K;
  if (K.concrete()) {
    assert(mult == 1);
    std::array<Fe, 4> vals{K.F->zero(), K.F->zero(), K.F->zero(), K.F->zero()};
    for (auto& [slot, v] : pre.vals) vals[slot] = v.leaf;
    PLine L = shape_line(sh, *K.F, vals);
    res.rational.push_back({line_key(L), L});
  } else {
    res.beyond.push_back({sh.pivots, K.abs_deg, mult});
  }
}

/// The ladder carries no information at this level (every level polynomial
/// vanished at the prefix).  Decide from the full system: an identically
/// vanishing or underdetermined system is a positive-dimensional family;
/// otherwise re-eliminate locally over the concrete prefix field.
inline void census_degenerate(CensusCtx& cx, CellCensus& res, const CellShape& sh,
                              const std::array<MPoly, 5>& E,
                              const std::vector<int>& vars, int r,
                              const TPrefix& pre, long long mult, int depth) {
  int remaining = (int)vars.size() - r;
  int live = 0;
  for (auto& p : E) {
    if (p.is_zero()) continue;
    auto tt = t_specialize(p, pre);
    if (tt.empty()) continue;
    if (tt.size() == 1 && tt.count(0)) return;  // nonzero constant: dead branch
    ++live;
  }
  if (live == 0) {
    res.families.push_back(cell_note(sh, r, pre.K->abs_deg,
                                     "positive-dimensional: every restriction "
                                     "coefficient vanishes identically"));
    return;
  }
  if (live == 1 && remaining >= 2) {
    // One nonconstant equation in several free parameters always has zeros
    // over the closure, and each component has positive dimension.
    res.families.push_back(cell_note(sh, r, pre.K->abs_deg,
                                     "positive-dimensional: one equation cuts "
                                     "several free parameters"));
    return;
  }
  if (!pre.K->concrete() || depth > 12) {
    res.unresolved.push_back(cell_note(sh, r, pre.K->abs_deg,
                                       "undecided: degenerate elimination at a "
                                       "prefix beyond the concrete cap"));
    return;
  }
  const FieldCtx& KF = *pre.K->F;
  std::vector<MPoly> sysK;
  for (auto& p : E) {
    if (p.is_zero()) continue;
    MPoly q = mp_embed(p, KF);
    for (auto& [slot, v] : pre.vals) q = mp_substitute(q, slot, v.leaf);
    if (!q.is_zero()) sysK.push_back(std::move(q));
  }
  std::vector<int> order(vars.begin() + r, vars.end());
  std::sort(order.begin(), order.end());
  do {
    CellLadders ll;
    try {
      ll = build_ladders(sysK, order);
    } catch (const ExtensionExceeded&) {
      continue;
    }
    if (ll.empty_cell) return;  // incompatible constraints: dead branch
    if (!ll.level[0].empty()) {
      census_walk(cx, res, sh, E, ll.level, order, 0, pre, mult, depth + 1);
      return;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  if (live < remaining) {
    res.families.push_back(cell_note(sh, r, pre.K->abs_deg,
                                     "positive-dimensional: underdetermined "
                                     "after every elimination order"));
  } else {
    res.unresolved.push_back(cell_note(sh, r, pre.K->abs_deg,
                                       "undecided: every elimination order "
                                       "degenerates"));
  }
}

inline void census_walk(CensusCtx& cx, CellCensus& res, const CellShape& sh,
                        const std::array<MPoly, 5>& E,
                        const std::vector<std::vector<MPoly>>& levels,
                        const std::vector<int>& vars, int r, const TPrefix& pre,
                        long long mult, int depth) {
  const TField& K = *pre.K;
  int v = vars[r];
  std::vector<TPoly> ps;
  for (auto& p : levels[r]) {
    auto tt = t_specialize(p, pre);
    if (!tt.empty()) ps.push_back(t_to_tpoly(tt, K, v));
  }
  if (ps.empty()) {
    census_degenerate(cx, res, sh, E, vars, r, pre, mult, depth);
    return;
  }
  TPoly g = ps[0];
  for (size_t i = 1; i < ps.size() && g.deg() != 0; ++i) g = tp_gcd(g, ps[i]);
  if (g.deg() <= 0) return;  // coprime or constant constraints: no root here
  bool last = r == (int)vars.size() - 1;
  for (auto& [d, q] : tp_factor_squarefree(g, cx.rng)) {
    if (d == 1) {
      TPrefix p2 = pre;
      p2.vals.push_back({v, tp_linear_root(q)});
      if (last) census_leaf(res, sh, E, p2, mult);
      else census_walk(cx, res, sh, E, levels, vars, r + 1, p2, mult, depth);
      continue;
    }
    long long newabs = (long long)K.abs_deg * d;
    if (K.concrete() && newabs <= cx.cap) {
      // The factor's roots fit a concrete field: enumerate them individually.
      const TField* KB = cx.concrete((int)newabs);
      const FieldCtx& big = *KB->F;
      TPrefix base;
      base.K = KB;
      for (auto& [slot, val] : pre.vals)
        base.vals.push_back({slot, TEl{big.embed_from(*K.F, val.leaf), {}}});
      std::vector<Fe> cc;
      cc.reserve(q.c.size());
      for (auto& e : q.c) cc.push_back(e.leaf);
      std::vector<Fe> roots = field_roots(up_embed(UPoly(*K.F, std::move(cc)), big),
                                          cx.rng);
      assert((int)roots.size() == d);
      for (Fe rt : roots) {
        TPrefix p2 = base;
        p2.vals.push_back({v, TEl{rt, {}}});
        if (last) census_leaf(res, sh, E, p2, mult);
        else census_walk(cx, res, sh, E, levels, vars, r + 1, p2, mult, depth);
      }
    } else {
      // Beyond the cap: extend the tower; the branch carries d conjugate
      // choices of the new coordinate.
      if (newabs > (1 << 20)) {
        res.unresolved.push_back(
            cell_note(sh, r, K.abs_deg, "undecided: tower degree overflow"));
        continue;
      }
      cx.store.push_back(tf_extend(K, q));
      const TField& KE = cx.store.back();
      TPrefix p2;
      p2.K = &KE;
      for (auto& [slot, val] : pre.vals) p2.vals.push_back({slot, tf_lift(KE, val)});
      TEl gen = tf_zero(KE);
      gen.up[1] = tf_one(*KE.parent);
      p2.vals.push_back({v, gen});
      if (last) census_leaf(res, sh, E, p2, mult * d);
      else census_walk(cx, res, sh, E, levels, vars, r + 1, p2, mult * d, depth);
    }
  }
}

/// Census of one cell over the base field of fbase.
inline void census_cell(CensusCtx& cx, CellCensus& res, const CellShape& sh,
                        const MPoly& fbase) {
  const FieldCtx& base = *fbase.F;
  auto E = shape_system(fbase, sh);
  if (sh.vars.empty()) {
    bool on = true;
    for (auto& p : E) on = on && p.is_zero();
    if (on) {
      Fe z = base.zero();
      PLine L = shape_line(sh, base, {z, z, z, z});
      res.rational.push_back({line_key(L), L});
    }
    return;
  }
  std::vector<MPoly> sys;
  for (auto& p : E)
    if (!p.is_zero()) sys.push_back(p);
  CellLadders lad;
  try {
    lad = build_ladders(sys, sh.vars);
  } catch (const ExtensionExceeded&) {
    res.unresolved.push_back(cell_note(
        sh, 0, base.k, "undecided: elimination outgrew the interpolation range"));
    return;
  }
  if (lad.empty_cell) return;
  TPrefix pre;
  pre.K = cx.concrete(base.k);
  census_walk(cx, res, sh, E, lad.level, sh.vars, 0, pre, 1, 0);
}

}  // namespace lines_detail

/// Every line on the surface over the algebraic closure.  Lines whose
/// definition field has compositum with the coefficient field within
/// GF(3^max_ext) come back explicitly (over their minimal fields, sorted by
/// canonical key); larger lines are counted in verified closure classes.  The
/// two passes audit each other: the census must reproduce the scan results
/// exactly on every cell it fully decides.
inline ExactLines lines_on_surface_exact(const Surface& S,
                                         int max_ext = FieldCtx::kMaxDegree) {
  int base_k = mp_min_field(S.f);
  lines_detail::SearchCtx ctx;
  ctx.f = base_k == S.F->k ? S.f : mp_restrict(S.f, base_k);
  for (int m : line_search_fields(base_k, max_ext))
    lines_detail::search_scan_field(ctx, field(m));
  std::sort(ctx.found.begin(), ctx.found.end(),
            [](auto& x, auto& y) { return x.first < y.first; });

  ExactLines out;
  out.lines.reserve(ctx.found.size());
  for (auto& [key, L] : ctx.found) out.lines.push_back(L);

  lines_detail::CensusCtx cx;
  cx.cap = max_ext;
  for (const auto& sh : lines_detail::cell_shapes()) {
    lines_detail::CellCensus res;
    lines_detail::census_cell(cx, res, sh, ctx.f);

    std::set<LineKey> scan_keys, census_keys;
    for (auto& [key, L] : ctx.found)
      if (L.piv0 == sh.pivots[0] && L.piv1 == sh.pivots[1]) scan_keys.insert(key);
    for (auto& [key, L] : res.rational) census_keys.insert(key);
    bool decided = res.families.empty() && res.unresolved.empty();
    bool consistent =
        decided ? census_keys == scan_keys
                : std::includes(scan_keys.begin(), scan_keys.end(),
                                census_keys.begin(), census_keys.end());
    if (!consistent)
      throw Error("internal: closure census disagrees with the field scans");

    std::map<int, long long> merged;  // tower degree -> line count
    for (auto& b : res.beyond) merged[b.degree] += b.count;
    for (auto& [deg, cnt] : merged) out.beyond.push_back({sh.pivots, deg, cnt});
    for (auto& s : res.families) out.families.push_back(s);
    for (auto& s : res.unresolved) out.unresolved.push_back(s);
  }
  return out;
}

}  // namespace k3lines
