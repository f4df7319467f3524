#pragma once
// Sparse multivariate polynomials in up to four variables over GF(3^k),
// with a full expression parser and canonical printer.
//
// Exponent vectors pack into a uint64_t key (variable 0 in the high word), so
// std::map iteration is deterministic lex order — reports stay byte-stable.

#include <array>
#include <cctype>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "unipoly.hpp"

namespace k3lines {

using Mono = std::array<int, 4>;

inline uint64_t mono_key(const Mono& m) {
  return (uint64_t(m[0]) << 48) | (uint64_t(m[1]) << 32) | (uint64_t(m[2]) << 16) |
         uint64_t(m[3]);
}
inline Mono mono_unkey(uint64_t k) {
  return {int(k >> 48) & 0xFFFF, int(k >> 32) & 0xFFFF, int(k >> 16) & 0xFFFF,
          int(k) & 0xFFFF};
}
inline int mono_total(const Mono& m) { return m[0] + m[1] + m[2] + m[3]; }

struct MPoly {
  const FieldCtx* F = nullptr;
  std::map<uint64_t, Fe> t;  // key -> nonzero coefficient

  MPoly() = default;
  explicit MPoly(const FieldCtx& f) : F(&f) {}

  bool is_zero() const { return t.empty(); }
  bool operator==(const MPoly& o) const { return F == o.F && t == o.t; }
  bool operator!=(const MPoly& o) const { return !(*this == o); }

  void add_term(const Mono& m, Fe c) {
    if (c.is_zero()) return;
    uint64_t k = mono_key(m);
    auto it = t.find(k);
    if (it == t.end()) {
      t.emplace(k, c);
    } else {
      Fe s = F->add(it->second, c);
      if (s.is_zero()) t.erase(it);
      else it->second = s;
    }
  }

  Fe coeff(const Mono& m) const {
    auto it = t.find(mono_key(m));
    return it == t.end() ? Fe{0} : it->second;
  }

  int total_degree() const {  // -1 for the zero polynomial
    int d = -1;
    for (auto& [k, c] : t) d = std::max(d, mono_total(mono_unkey(k)));
    return d;
  }
  int degree_in(int v) const {
    int d = -1;
    for (auto& [k, c] : t) d = std::max(d, mono_unkey(k)[v]);
    return is_zero() ? -1 : d;
  }
  bool uses_var(int v) const {
    for (auto& [k, c] : t)
      if (mono_unkey(k)[v] > 0) return true;
    return false;
  }
  bool is_homogeneous(int* deg_out = nullptr) const {
    int d = -1;
    for (auto& [k, c] : t) {
      int td = mono_total(mono_unkey(k));
      if (d == -1) d = td;
      else if (td != d) return false;
    }
    if (deg_out) *deg_out = d;
    return true;
  }
};

inline MPoly mp_zero(const FieldCtx& F) { return MPoly(F); }
inline MPoly mp_const(const FieldCtx& F, Fe c) {
  MPoly r(F);
  r.add_term({0, 0, 0, 0}, c);
  return r;
}
inline MPoly mp_var(const FieldCtx& F, int v) {
  MPoly r(F);
  Mono m{0, 0, 0, 0};
  m[v] = 1;
  r.add_term(m, F.one());
  return r;
}
inline MPoly mp_monomial(const FieldCtx& F, Fe c, const Mono& m) {
  MPoly r(F);
  r.add_term(m, c);
  return r;
}

inline MPoly mp_add(const MPoly& a, const MPoly& b) {
  assert(a.F == b.F);
  MPoly r = a;
  for (auto& [k, c] : b.t) r.add_term(mono_unkey(k), c);
  return r;
}
inline MPoly mp_neg(const MPoly& a) {
  MPoly r = a;
  for (auto& [k, c] : r.t) c = a.F->neg(c);
  return r;
}
inline MPoly mp_sub(const MPoly& a, const MPoly& b) { return mp_add(a, mp_neg(b)); }
inline MPoly mp_scale(const MPoly& a, Fe s) {
  MPoly r(*a.F);
  if (s.is_zero()) return r;
  for (auto& [k, c] : a.t) r.t.emplace(k, a.F->mul(c, s));
  return r;
}
inline MPoly mp_mul(const MPoly& a, const MPoly& b) {
  assert(a.F == b.F);
  MPoly r(*a.F);
  for (auto& [ka, ca] : a.t) {
    Mono ma = mono_unkey(ka);
    for (auto& [kb, cb] : b.t) {
      Mono mb = mono_unkey(kb);
      Mono m{ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2], ma[3] + mb[3]};
      r.add_term(m, a.F->mul(ca, cb));
    }
  }
  return r;
}
inline MPoly mp_pow(const MPoly& a, int e) {
  assert(e >= 0);
  MPoly r = mp_const(*a.F, a.F->one());
  MPoly base = a;
  while (e) {
    if (e & 1) r = mp_mul(r, base);
    e >>= 1;
    if (e) base = mp_mul(base, base);
  }
  return r;
}

inline MPoly mp_derivative(const MPoly& a, int v) {
  MPoly r(*a.F);
  for (auto& [k, c] : a.t) {
    Mono m = mono_unkey(k);
    if (m[v] == 0) continue;
    Fe f = a.F->from_int(m[v] % 3);
    if (f.is_zero()) continue;
    Mono m2 = m;
    m2[v] -= 1;
    r.add_term(m2, a.F->mul(c, f));
  }
  return r;
}

inline Fe mp_eval(const MPoly& a, const std::array<Fe, 4>& p) {
  const FieldCtx& F = *a.F;
  Fe acc = F.zero();
  for (auto& [k, c] : a.t) {
    Mono m = mono_unkey(k);
    Fe term = c;
    for (int v = 0; v < 4; ++v)
      if (m[v]) term = F.mul(term, F.pow(p[v], m[v]));
    acc = F.add(acc, term);
  }
  return acc;
}

/// Substitute a field value for one variable.
inline MPoly mp_substitute(const MPoly& a, int v, Fe val) {
  const FieldCtx& F = *a.F;
  MPoly r(F);
  for (auto& [k, c] : a.t) {
    Mono m = mono_unkey(k);
    Fe cc = c;
    if (m[v]) cc = F.mul(cc, F.pow(val, m[v]));
    m[v] = 0;
    r.add_term(m, cc);
  }
  return r;
}

/// Substitute polynomials for all four variables (f ∘ images).
inline MPoly mp_compose(const MPoly& a, const std::array<MPoly, 4>& images) {
  const FieldCtx& F = *a.F;
  MPoly r(F);
  for (auto& [k, c] : a.t) {
    Mono m = mono_unkey(k);
    MPoly term = mp_const(F, c);
    for (int v = 0; v < 4; ++v)
      if (m[v]) term = mp_mul(term, mp_pow(images[v], m[v]));
    r = mp_add(r, term);
  }
  return r;
}

/// Linear change of coordinates: x_i -> sum_j M[i][j] x_j.
inline MPoly mp_linear_subst(const MPoly& a, const std::array<std::array<Fe, 4>, 4>& M) {
  const FieldCtx& F = *a.F;
  std::array<MPoly, 4> imgs{MPoly(F), MPoly(F), MPoly(F), MPoly(F)};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      imgs[i] = mp_add(imgs[i], mp_scale(mp_var(F, j), M[i][j]));
  return mp_compose(a, imgs);
}

/// Coefficients of powers of one variable: result[i] has no v-dependence left.
inline std::vector<MPoly> mp_coeffs_wrt(const MPoly& a, int v) {
  int d = std::max(a.degree_in(v), 0);
  std::vector<MPoly> out(d + 1, MPoly(*a.F));
  for (auto& [k, c] : a.t) {
    Mono m = mono_unkey(k);
    int e = m[v];
    m[v] = 0;
    out[e].add_term(m, c);
  }
  return out;
}
inline MPoly mp_from_coeffs_wrt(const FieldCtx& F, int v, const std::vector<MPoly>& cs) {
  MPoly r(F);
  for (size_t i = 0; i < cs.size(); ++i) {
    Mono shift{0, 0, 0, 0};
    shift[v] = (int)i;
    for (auto& [k, c] : cs[i].t) {
      Mono m = mono_unkey(k);
      m[v] += shift[v];
      r.add_term(m, c);
    }
  }
  return r;
}

/// Conversion to univariate form; every term must use only variable v.
inline UPoly mp_to_upoly(const MPoly& a, int v) {
  UPoly r(*a.F);
  r.c.assign(std::max(a.degree_in(v), 0) + 1, a.F->zero());
  for (auto& [k, c] : a.t) {
    Mono m = mono_unkey(k);
    for (int w = 0; w < 4; ++w)
      if (w != v && m[w] != 0)
        throw VariableClash("monomial uses variable " + std::to_string(w) +
                            " during univariate conversion");
    r.c[m[v]] = c;
  }
  r.normalize();
  return r;
}
inline MPoly mp_from_upoly(const UPoly& a, int v) {
  MPoly r(*a.F);
  for (int i = 0; i <= a.deg(); ++i) {
    Mono m{0, 0, 0, 0};
    m[v] = i;
    r.add_term(m, a.coeff(i));
  }
  return r;
}

inline MPoly mp_embed(const MPoly& a, const FieldCtx& K) {
  MPoly r(K);
  for (auto& [k, c] : a.t) r.t.emplace(k, K.embed_from(*a.F, c));
  return r;
}
inline MPoly mp_restrict(const MPoly& a, int sub_k) {
  MPoly r(field(sub_k));
  for (auto& [k, c] : a.t) r.t.emplace(k, a.F->restrict_to(sub_k, c));
  return r;
}
/// Smallest subfield degree containing every coefficient.
inline int mp_min_field(const MPoly& a) {
  int d = 1;
  for (auto& [k, c] : a.t) {
    int dc = a.F->min_subfield(c);
    d = d / std::gcd(d, dc) * dc;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Pseudo-division, content, gcd (used only at small degrees).

/// lc_v(b)^(da-db+1) * a = q*b + r with deg_v r < deg_v b.
inline std::pair<MPoly, MPoly> mp_pseudo_divmod(const MPoly& a, const MPoly& b, int v) {
  assert(a.F == b.F);
  const FieldCtx& F = *a.F;
  int db = b.degree_in(v);
  if (b.is_zero()) throw DivisionByZero{};
  auto bc = mp_coeffs_wrt(b, v);
  MPoly lead = bc[db];
  MPoly q(F), r = a;
  int da = a.degree_in(v);
  if (da < db) {
    // multiply through anyway to honor the contract
    MPoly scale = mp_pow(lead, std::max(0, da - db + 1));
    return {q, mp_mul(scale, a)};
  }
  for (int step = 0; step <= da - db; ++step) {
    int dr = r.degree_in(v);
    if (dr < db) {
      // pad remaining multiplications of the contract
      MPoly scale = mp_pow(lead, da - db - step + 1);
      return {mp_mul(q, scale), mp_mul(r, scale)};
    }
    auto rc = mp_coeffs_wrt(r, v);
    MPoly top = rc[dr];
    Mono m{0, 0, 0, 0};
    m[v] = dr - db;
    MPoly shift = mp_monomial(F, F.one(), m);
    MPoly qterm = mp_mul(top, shift);
    q = mp_add(mp_mul(q, lead), qterm);
    r = mp_sub(mp_mul(r, lead), mp_mul(qterm, b));
  }
  return {q, r};
}

inline MPoly mp_gcd(const MPoly& a, const MPoly& b);

/// gcd of the v-coefficients.
inline MPoly mp_content_wrt(const MPoly& a, int v) {
  auto cs = mp_coeffs_wrt(a, v);
  MPoly g(*a.F);
  for (auto& c : cs) {
    if (c.is_zero()) continue;
    g = g.is_zero() ? c : mp_gcd(g, c);
    if (g.total_degree() == 0) break;
  }
  return g;
}

inline MPoly mp_exact_div(const MPoly& a, const MPoly& b);

/// Multivariate gcd by primitive pseudo-remainder sequences.  Result is
/// normalized so its lexicographically largest monomial has coefficient 1.
inline MPoly mp_gcd(const MPoly& a, const MPoly& b) {
  assert(a.F == b.F);
  const FieldCtx& F = *a.F;
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.total_degree() == 0 || b.total_degree() == 0) return mp_const(F, F.one());
  // pick the lowest variable used by either
  int v = -1;
  for (int w = 0; w < 4 && v < 0; ++w)
    if (a.uses_var(w) || b.uses_var(w)) v = w;
  if (!a.uses_var(v)) return mp_gcd(mp_content_wrt(b, v), a);
  if (!b.uses_var(v)) return mp_gcd(mp_content_wrt(a, v), b);

  MPoly ca = mp_content_wrt(a, v), cb = mp_content_wrt(b, v);
  MPoly f = mp_exact_div(a, ca), g = mp_exact_div(b, cb);
  MPoly cont = mp_gcd(ca, cb);
  if (f.degree_in(v) < g.degree_in(v)) std::swap(f, g);
  while (true) {
    MPoly r = mp_pseudo_divmod(f, g, v).second;
    if (r.is_zero()) break;
    if (r.degree_in(v) <= 0) return cont;  // coprime in v
    MPoly cr = mp_content_wrt(r, v);
    f = g;
    g = mp_exact_div(r, cr);
  }
  MPoly res = mp_mul(cont, g);
  // normalize leading (lex-largest) coefficient to 1
  Fe lead = res.t.rbegin()->second;
  return mp_scale(res, F.inv(lead));
}

/// Exact division (asserts divisibility), by repeated leading-term elimination.
inline MPoly mp_exact_div(const MPoly& a, const MPoly& b) {
  assert(a.F == b.F);
  const FieldCtx& F = *a.F;
  if (b.is_zero()) throw DivisionByZero{};
  MPoly r = a, q(F);
  auto itb = b.t.rbegin();
  Mono mb = mono_unkey(itb->first);
  Fe cb_inv = F.inv(itb->second);
  while (!r.is_zero()) {
    auto itr = r.t.rbegin();
    Mono mr = mono_unkey(itr->first);
    Mono d{mr[0] - mb[0], mr[1] - mb[1], mr[2] - mb[2], mr[3] - mb[3]};
    if (d[0] < 0 || d[1] < 0 || d[2] < 0 || d[3] < 0)
      throw Error("multivariate division not exact");
    Fe cq = F.mul(itr->second, cb_inv);
    MPoly term = mp_monomial(F, cq, d);
    q = mp_add(q, term);
    r = mp_sub(r, mp_mul(term, b));
  }
  return q;
}

// ---------------------------------------------------------------------------
// Parsing and printing.

struct VarNames {
  std::array<std::string, 4> n{"x0", "x1", "x2", "x3"};
};

namespace detail {
struct PolyParser {
  const std::string& s;
  const FieldCtx& F;
  const VarNames& vars;
  size_t pos = 0;
  int line = 1, col = 1;

  PolyParser(const std::string& str, const FieldCtx& f, const VarNames& v)
      : s(str), F(f), vars(v) {}

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(line, col, msg); }

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n' ||
                              s[pos] == '\r')) {
      if (s[pos] == '\n') { ++line; col = 1; }
      else ++col;
      ++pos;
    }
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      ++col;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }

  long parse_int() {
    skip_ws();
    if (pos >= s.size() || !std::isdigit((unsigned char)s[pos])) fail("expected integer");
    long v = 0;
    while (pos < s.size() && std::isdigit((unsigned char)s[pos])) {
      v = v * 10 + (s[pos] - '0');
      if (v > 1000000) fail("integer too large");
      ++pos;
      ++col;
    }
    return v;
  }

  // expr := term (('+'|'-') term)*
  MPoly parse_expr() {
    MPoly acc = eat('-') ? mp_neg(parse_term()) : parse_term();
    while (true) {
      if (eat('+')) acc = mp_add(acc, parse_term());
      else if (eat('-')) acc = mp_sub(acc, parse_term());
      else return acc;
    }
  }
  // term := factor ('*'? factor)*   (juxtaposition multiplies: "2x0" etc.)
  MPoly parse_term() {
    MPoly acc = parse_factor();
    while (true) {
      if (eat('*')) {
        acc = mp_mul(acc, parse_factor());
        continue;
      }
      char c = peek();
      if (c == '(' || c == 'g' || std::isdigit((unsigned char)c) || is_var_start()) {
        acc = mp_mul(acc, parse_factor());
        continue;
      }
      return acc;
    }
  }
  bool is_var_start() {
    skip_ws();
    for (auto& nm : vars.n)
      if (!nm.empty() && s.compare(pos, nm.size(), nm) == 0) return true;
    return false;
  }
  // factor := atom ('^' int)?
  MPoly parse_factor() {
    MPoly base = parse_atom();
    if (eat('^')) {
      long e = parse_int();
      if (e > 4096) fail("exponent too large");
      base = mp_pow(base, (int)e);
    }
    return base;
  }
  MPoly parse_atom() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of input");
    char c = s[pos];
    if (c == '(') {
      ++pos; ++col;
      MPoly e = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit((unsigned char)c)) {
      long v = parse_int();
      return mp_const(F, F.from_int(int(v % 3)));
    }
    // variable names first (they might shadow a prefix of "g..." in principle)
    for (int i = 0; i < 4; ++i) {
      const std::string& nm = vars.n[i];
      if (!nm.empty() && s.compare(pos, nm.size(), nm) == 0) {
        pos += nm.size();
        col += (int)nm.size();
        return mp_var(F, i);
      }
    }
    if (c == 'g') {
      ++pos; ++col;
      if (F.k == 1) fail("field generator 'g' needs an extension field");
      return mp_const(F, F.gen());
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};
}  // namespace detail

inline MPoly mp_parse(const std::string& text, const FieldCtx& F,
                      const VarNames& vars = VarNames{}) {
  detail::PolyParser p(text, F, vars);
  MPoly r = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing characters");
  return r;
}

/// Canonical text: graded-lex descending, coefficients via FieldCtx::to_string.
inline std::string mp_to_string(const MPoly& a, const VarNames& vars = VarNames{}) {
  if (a.is_zero()) return "0";
  const FieldCtx& F = *a.F;
  std::vector<std::pair<Mono, Fe>> terms;
  for (auto& [k, c] : a.t) terms.push_back({mono_unkey(k), c});
  std::sort(terms.begin(), terms.end(), [](auto& x, auto& y) {
    int tx = mono_total(x.first), ty = mono_total(y.first);
    if (tx != ty) return tx > ty;
    return mono_key(x.first) > mono_key(y.first);
  });
  std::string out;
  for (auto& [m, c] : terms) {
    std::string mono;
    for (int v = 0; v < 4; ++v) {
      if (!m[v]) continue;
      if (!mono.empty()) mono += "*";
      mono += vars.n[v];
      if (m[v] > 1) mono += "^" + std::to_string(m[v]);
    }
    std::string cs = F.to_string(c);
    std::string piece;
    if (mono.empty()) {
      piece = cs.find('+') != std::string::npos ? "(" + cs + ")" : cs;
    } else if (cs == "1") {
      piece = mono;
    } else {
      bool paren = cs.find('+') != std::string::npos;
      piece = (paren ? "(" + cs + ")" : cs) + "*" + mono;
    }
    if (out.empty()) out = piece;
    else out += " + " + piece;
  }
  return out;
}

}  // namespace k3lines
