#pragma once
// Projective geometry over GF(3^k): points and planes of P^3, lines as
// canonical reduced-row-echelon spans, membership and incidence tests,
// coordinate moves, and full line enumeration by Schubert cell.

#include <optional>
#include <tuple>

#include "multipoly.hpp"

namespace k3lines {

using Row4 = std::array<Fe, 4>;

/// In-place RREF; returns (rank, pivot columns).
inline std::pair<int, std::vector<int>> rref(std::vector<Row4>& rows, const FieldCtx& F) {
  int rank = 0;
  std::vector<int> pivots;
  for (int col = 0; col < 4 && rank < (int)rows.size(); ++col) {
    int sel = -1;
    for (int r = rank; r < (int)rows.size(); ++r)
      if (!rows[r][col].is_zero()) { sel = r; break; }
    if (sel < 0) continue;
    std::swap(rows[rank], rows[sel]);
    Fe inv = F.inv(rows[rank][col]);
    for (auto& x : rows[rank]) x = F.mul(x, inv);
    for (int r = 0; r < (int)rows.size(); ++r) {
      if (r == rank || rows[r][col].is_zero()) continue;
      Fe f = rows[r][col];
      for (int cc = 0; cc < 4; ++cc) rows[r][cc] = F.sub(rows[r][cc], F.mul(f, rows[rank][cc]));
    }
    pivots.push_back(col);
    ++rank;
  }
  return {rank, pivots};
}

inline Fe det_rows(std::vector<Row4> rows, const FieldCtx& F, int n) {
  Fe d = F.one();
  for (int col = 0; col < n; ++col) {
    int sel = -1;
    for (int r = col; r < n; ++r)
      if (!rows[r][col].is_zero()) { sel = r; break; }
    if (sel < 0) return F.zero();
    if (sel != col) { std::swap(rows[sel], rows[col]); d = F.neg(d); }
    d = F.mul(d, rows[col][col]);
    Fe inv = F.inv(rows[col][col]);
    for (int r = col + 1; r < n; ++r) {
      if (rows[r][col].is_zero()) continue;
      Fe f = F.mul(rows[r][col], inv);
      for (int cc = col; cc < n; ++cc) rows[r][cc] = F.sub(rows[r][cc], F.mul(f, rows[col][cc]));
    }
  }
  return d;
}

/// Basis of {v : each row . v = 0}.
inline std::vector<Row4> kernel_of_rows(std::vector<Row4> rows, const FieldCtx& F) {
  auto [rank, pivots] = rref(rows, F);
  std::vector<bool> is_piv(4, false);
  for (int p : pivots) is_piv[p] = true;
  std::vector<Row4> out;
  for (int free = 0; free < 4; ++free) {
    if (is_piv[free]) continue;
    Row4 v{F.zero(), F.zero(), F.zero(), F.zero()};
    v[free] = F.one();
    for (int r = 0; r < rank; ++r) v[pivots[r]] = F.neg(rows[r][free]);
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct PPoint {
  const FieldCtx* F = nullptr;
  Row4 x{};

  PPoint() = default;
  PPoint(const FieldCtx& f, Row4 coords) : F(&f), x(coords) { normalize(); }

  void normalize() {
    for (auto& c : x)
      if (!c.is_zero()) {
        Fe inv = F->inv(c);
        for (auto& d : x) d = F->mul(d, inv);
        return;
      }
    throw DegenerateParameter("zero vector is not a projective point");
  }
  bool operator==(const PPoint& o) const { return F == o.F && x == o.x; }
  bool operator!=(const PPoint& o) const { return !(*this == o); }
  bool operator<(const PPoint& o) const {
    for (int i = 0; i < 4; ++i)
      if (x[i].v != o.x[i].v) return x[i].v < o.x[i].v;
    return false;
  }
};

inline PPoint pp_embed(const PPoint& p, const FieldCtx& K) {
  Row4 r;
  for (int i = 0; i < 4; ++i) r[i] = K.embed_from(*p.F, p.x[i]);
  return PPoint(K, r);
}
inline int pp_min_field(const PPoint& p) {
  int d = 1;
  for (auto c : p.x) {
    int dc = p.F->min_subfield(c);
    d = d / std::gcd(d, dc) * dc;
  }
  return d;
}
inline PPoint pp_restrict(const PPoint& p, int sub_k) {
  Row4 r;
  for (int i = 0; i < 4; ++i) r[i] = p.F->restrict_to(sub_k, p.x[i]);
  return PPoint(field(sub_k), r);
}
inline std::string pp_to_string(const PPoint& p) {
  std::string s = "[";
  for (int i = 0; i < 4; ++i) {
    if (i) s += ":";
    s += p.F->to_string(p.x[i]);
  }
  return s + "]";
}

// ---------------------------------------------------------------------------

/// A line of P^3 stored as the canonical RREF basis of its point span.
struct PLine {
  const FieldCtx* F = nullptr;
  Row4 a{}, b{};      // RREF rows; a has the earlier pivot
  int piv0 = -1, piv1 = -1;

  PLine() = default;
  PLine(const FieldCtx& f, Row4 p, Row4 q) : F(&f) {
    std::vector<Row4> rows{p, q};
    auto [rank, piv] = rref(rows, f);
    if (rank != 2) throw DegenerateParameter("line needs two independent points");
    a = rows[0];
    b = rows[1];
    piv0 = piv[0];
    piv1 = piv[1];
  }
  bool operator==(const PLine& o) const { return F == o.F && a == o.a && b == o.b; }
  bool operator!=(const PLine& o) const { return !(*this == o); }
  bool operator<(const PLine& o) const {
    for (int i = 0; i < 4; ++i) if (a[i].v != o.a[i].v) return a[i].v < o.a[i].v;
    for (int i = 0; i < 4; ++i) if (b[i].v != o.b[i].v) return b[i].v < o.b[i].v;
    return false;
  }
  /// Point at parameter [s:u] -> s a + u b.
  PPoint at(Fe s, Fe u) const {
    Row4 r;
    for (int i = 0; i < 4; ++i) r[i] = F->add(F->mul(s, a[i]), F->mul(u, b[i]));
    return PPoint(*F, r);
  }
};

inline PLine line_through(const PPoint& p, const PPoint& q) {
  assert(p.F == q.F);
  return PLine(*p.F, p.x, q.x);
}

inline bool line_contains(const PLine& L, const PPoint& p) {
  assert(L.F == p.F);
  std::vector<Row4> rows{L.a, L.b, p.x};
  return rref(rows, *L.F).first == 2;
}

/// Do two (possibly equal) lines share a point?
inline bool lines_meet(const PLine& L, const PLine& M) {
  assert(L.F == M.F);
  if (L == M) return true;
  std::vector<Row4> rows{L.a, L.b, M.a, M.b};
  return det_rows(rows, *L.F, 4).is_zero();
}

/// The common point of two distinct meeting lines.
inline std::optional<PPoint> line_meet_point(const PLine& L, const PLine& M) {
  assert(L.F == M.F);
  if (L == M) return std::nullopt;
  const FieldCtx& F = *L.F;
  // columns: L.a, L.b, -M.a, -M.b; kernel vector (s,u,c,d) gives s L.a + u L.b.
  std::vector<Row4> cols(4);
  for (int i = 0; i < 4; ++i)
    cols[i] = {L.a[i], L.b[i], F.neg(M.a[i]), F.neg(M.b[i])};
  auto ker = kernel_of_rows(cols, F);
  if (ker.empty()) return std::nullopt;
  Row4 v = ker[0];
  Row4 pt;
  for (int i = 0; i < 4; ++i)
    pt[i] = F.add(F.mul(v[0], L.a[i]), F.mul(v[1], L.b[i]));
  return PPoint(F, pt);
}

/// Two independent linear forms vanishing on the line (coefficient vectors).
inline std::pair<Row4, Row4> line_dual_forms(const PLine& L) {
  auto ker = kernel_of_rows({L.a, L.b}, *L.F);
  assert(ker.size() == 2);
  return {ker[0], ker[1]};
}

inline PLine pl_embed(const PLine& L, const FieldCtx& K) {
  Row4 a, b;
  for (int i = 0; i < 4; ++i) {
    a[i] = K.embed_from(*L.F, L.a[i]);
    b[i] = K.embed_from(*L.F, L.b[i]);
  }
  return PLine(K, a, b);
}
inline int pl_min_field(const PLine& L) {
  int d = 1;
  for (int i = 0; i < 4; ++i)
    for (Fe c : {L.a[i], L.b[i]}) {
      int dc = L.F->min_subfield(c);
      d = d / std::gcd(d, dc) * dc;
    }
  return d;
}
inline PLine pl_restrict(const PLine& L, int sub_k) {
  Row4 a, b;
  for (int i = 0; i < 4; ++i) {
    a[i] = L.F->restrict_to(sub_k, L.a[i]);
    b[i] = L.F->restrict_to(sub_k, L.b[i]);
  }
  return PLine(field(sub_k), a, b);
}
inline std::string pl_to_string(const PLine& L) {
  return "span(" + pp_to_string(PPoint(*L.F, L.a)) + ", " + pp_to_string(PPoint(*L.F, L.b)) + ")";
}

/// Dedup key independent of ambient field: minimal field degree + RREF entries there.
struct LineKey {
  int k;
  std::array<uint16_t, 8> e;
  bool operator==(const LineKey& o) const { return k == o.k && e == o.e; }
  bool operator<(const LineKey& o) const { return std::tie(k, e) < std::tie(o.k, o.e); }
};
inline LineKey line_key(const PLine& L) {
  int d = pl_min_field(L);
  PLine m = d == L.F->k ? L : pl_restrict(L, d);
  LineKey key;
  key.k = d;
  for (int i = 0; i < 4; ++i) {
    key.e[i] = m.a[i].v;
    key.e[4 + i] = m.b[i].v;
  }
  return key;
}

/// Invertible matrix X with f(X y) putting the line at {y0 = y1 = 0}:
/// columns 2,3 of X are the line's basis, columns 0,1 complete it.
inline std::array<std::array<Fe, 4>, 4> move_line_to_standard(const PLine& L) {
  const FieldCtx& F = *L.F;
  std::array<std::array<Fe, 4>, 4> X;
  for (auto& row : X) row.fill(F.zero());
  std::vector<int> non_piv;
  for (int c = 0; c < 4; ++c)
    if (c != L.piv0 && c != L.piv1) non_piv.push_back(c);
  X[non_piv[0]][0] = F.one();
  X[non_piv[1]][1] = F.one();
  for (int i = 0; i < 4; ++i) {
    X[i][2] = L.a[i];
    X[i][3] = L.b[i];
  }
  return X;
}

// ---------------------------------------------------------------------------

struct PPlane {
  const FieldCtx* F = nullptr;
  Row4 h{};  // coefficients of the defining linear form, normalized

  PPlane() = default;
  PPlane(const FieldCtx& f, Row4 coeffs) : F(&f), h(coeffs) {
    for (auto& c : h)
      if (!c.is_zero()) {
        Fe inv = F->inv(c);
        for (auto& d : h) d = F->mul(d, inv);
        return;
      }
    throw DegenerateParameter("zero form is not a plane");
  }
  bool operator==(const PPlane& o) const { return F == o.F && h == o.h; }
  bool operator<(const PPlane& o) const {
    for (int i = 0; i < 4; ++i)
      if (h[i].v != o.h[i].v) return h[i].v < o.h[i].v;
    return false;
  }
  Fe eval(const PPoint& p) const {
    Fe s = F->zero();
    for (int i = 0; i < 4; ++i) s = F->add(s, F->mul(h[i], p.x[i]));
    return s;
  }
  bool contains(const PPoint& p) const { return eval(p).is_zero(); }
};

inline bool plane_contains_line(const PPlane& P, const PLine& L) {
  const FieldCtx& F = *P.F;
  Fe sa = F.zero(), sb = F.zero();
  for (int i = 0; i < 4; ++i) {
    sa = F.add(sa, F.mul(P.h[i], L.a[i]));
    sb = F.add(sb, F.mul(P.h[i], L.b[i]));
  }
  return sa.is_zero() && sb.is_zero();
}

inline PPlane plane_through_points(const PPoint& p, const PPoint& q, const PPoint& r) {
  auto ker = kernel_of_rows({p.x, q.x, r.x}, *p.F);
  if (ker.size() != 1) throw DegenerateParameter("three points do not span a plane");
  return PPlane(*p.F, ker[0]);
}

inline PPlane plane_through_line_and_point(const PLine& L, const PPoint& p) {
  auto ker = kernel_of_rows({L.a, L.b, p.x}, *L.F);
  if (ker.size() != 1) throw DegenerateParameter("point lies on the line");
  return PPlane(*L.F, ker[0]);
}

/// Planes containing a line: a pencil parametrized by P^1.
inline std::vector<PPlane> planes_through_line(const PLine& L) {
  const FieldCtx& F = *L.F;
  auto [f0, f1] = line_dual_forms(L);
  std::vector<PPlane> out;
  for (uint32_t i = 0; i < F.q; ++i) {  // f0 + t f1
    Fe t = F.from_index(i);
    Row4 h;
    for (int j = 0; j < 4; ++j) h[j] = F.add(f0[j], F.mul(t, f1[j]));
    out.push_back(PPlane(F, h));
  }
  out.push_back(PPlane(F, f1));
  return out;
}

// ---------------------------------------------------------------------------

/// All points of P^3(K), canonically normalized, (q^3+q^2+q+1) of them.
inline std::vector<PPoint> all_points_p3(const FieldCtx& F) {
  std::vector<PPoint> out;
  for (int lead = 0; lead < 4; ++lead) {
    uint64_t count = 1;
    for (int j = lead + 1; j < 4; ++j) count *= F.q;
    for (uint64_t idx = 0; idx < count; ++idx) {
      Row4 x{F.zero(), F.zero(), F.zero(), F.zero()};
      x[lead] = F.one();
      uint64_t rem = idx;
      for (int j = 3; j > lead; --j) {
        x[j] = F.from_index(uint32_t(rem % F.q));
        rem /= F.q;
      }
      out.push_back(PPoint(F, x));
    }
  }
  return out;
}

/// All points of P^1(K) as parameter pairs (s,u): [1:t] for all t, then [0:1].
inline std::vector<std::pair<Fe, Fe>> all_points_p1(const FieldCtx& F) {
  std::vector<std::pair<Fe, Fe>> out;
  for (uint32_t i = 0; i < F.q; ++i) out.push_back({F.one(), F.from_index(i)});
  out.push_back({F.zero(), F.one()});
  return out;
}

/// Every line of P^3(K), enumerated cell by cell: (q^2+1)(q^2+q+1) lines.
inline std::vector<PLine> all_lines_p3(const FieldCtx& F) {
  std::vector<PLine> out;
  static constexpr int cells[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (auto& cell : cells) {
    int p0 = cell[0], p1 = cell[1];
    // free entries: row a in columns > p0 except p1; row b in columns > p1
    std::vector<int> fa, fb;
    for (int c = p0 + 1; c < 4; ++c)
      if (c != p1) fa.push_back(c);
    for (int c = p1 + 1; c < 4; ++c) fb.push_back(c);
    uint64_t total = 1;
    for (size_t i = 0; i < fa.size() + fb.size(); ++i) total *= F.q;
    for (uint64_t idx = 0; idx < total; ++idx) {
      Row4 a{F.zero(), F.zero(), F.zero(), F.zero()};
      Row4 b{F.zero(), F.zero(), F.zero(), F.zero()};
      a[p0] = F.one();
      b[p1] = F.one();
      uint64_t rem = idx;
      for (int c : fa) {
        a[c] = F.from_index(uint32_t(rem % F.q));
        rem /= F.q;
      }
      for (int c : fb) {
        b[c] = F.from_index(uint32_t(rem % F.q));
        rem /= F.q;
      }
      out.push_back(PLine(F, a, b));
    }
  }
  return out;
}

}  // namespace k3lines
