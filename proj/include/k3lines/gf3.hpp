#pragma once
// Arithmetic for the finite fields GF(3^k), 1 <= k <= 8.
//
// Elements are packed base-3 coefficient vectors of the residue class ring
// GF(3)[g]/(m_k), two bits per digit, so the packed integer order coincides
// with lexicographic order on (c_{k-1},...,c_0).  Multiplication goes through
// discrete-log tables built once per degree; addition is carry-free SWAR.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace k3lines {

/// One element of GF(3^k).  Meaningful only relative to a FieldCtx.
struct Fe {
  uint16_t v = 0;
  friend bool operator==(Fe a, Fe b) { return a.v == b.v; }
  friend bool operator!=(Fe a, Fe b) { return a.v != b.v; }
  friend bool operator<(Fe a, Fe b) { return a.v < b.v; }
  bool is_zero() const { return v == 0; }
};

class FieldCtx;
const FieldCtx& field(int k);

class FieldCtx {
 public:
  int k;       // extension degree over GF(3)
  uint32_t q;  // 3^k

  static constexpr int kMaxDegree = 8;

  Fe zero() const { return Fe{0}; }
  Fe one() const { return Fe{1}; }
  /// The residue class of the defining variable g (zero when k == 1, where m_1 = g).
  Fe gen() const { return k == 1 ? Fe{0} : Fe{1u << 2}; }

  /// Element from an integer in [0, q) read as base-3 digits, low digit first.
  Fe from_index(uint32_t idx) const {
    uint16_t p = 0;
    for (int i = 0; i < k; ++i) {
      p |= uint16_t((idx % 3) << (2 * i));
      idx /= 3;
    }
    return Fe{p};
  }
  uint32_t index_of(Fe a) const {
    uint32_t idx = 0;
    for (int i = k - 1; i >= 0; --i) idx = idx * 3 + digit(a, i);
    return idx;
  }
  static int digit(Fe a, int i) { return (a.v >> (2 * i)) & 3; }

  Fe from_int(int n) const {           // image of an ordinary integer
    n %= 3;
    if (n < 0) n += 3;
    return Fe{uint16_t(n)};
  }

  Fe add(Fe a, Fe b) const {
    // Bit-sliced mod-3 addition on interleaved (lo,hi) planes.
    uint32_t a1 = a.v & kLo, a2 = (a.v >> 1) & kLo;
    uint32_t b1 = b.v & kLo, b2 = (b.v >> 1) & kLo;
    uint32_t t = (a1 | b2) ^ (a2 | b1);
    uint32_t r1 = (a2 | b2) ^ t;
    uint32_t r2 = (a1 | b1) ^ t;
    return Fe{uint16_t(r1 | (r2 << 1))};
  }
  Fe neg(Fe a) const {
    uint32_t lo = a.v & kLo, hi = (a.v >> 1) & kLo;
    return Fe{uint16_t(hi | (lo << 1))};
  }
  Fe sub(Fe a, Fe b) const { return add(a, neg(b)); }

  Fe mul(Fe a, Fe b) const {
    if (a.is_zero() || b.is_zero()) return Fe{0};
    return exp_[log_[a.v] + log_[b.v]];
  }
  Fe inv(Fe a) const {
    if (a.is_zero()) throw DivisionByZero{};
    return exp_[q - 1 - log_[a.v]];
  }
  Fe div(Fe a, Fe b) const { return mul(a, inv(b)); }

  Fe pow(Fe a, long long e) const {
    if (a.is_zero()) {
      if (e < 0) throw DivisionByZero{};
      return e == 0 ? one() : zero();
    }
    long long m = (long long)(q - 1);
    long long r = ((e % m) * (long long)log_[a.v]) % m;
    if (r < 0) r += m;
    return exp_[uint32_t(r)];
  }

  /// A square root of a, if a is a square in this field (q - 1 is even, so
  /// the squares are exactly the even powers of the primitive element).
  std::optional<Fe> sqrt(Fe a) const {
    if (a.is_zero()) return a;
    uint32_t l = log_[a.v];
    if (l % 2 != 0) return std::nullopt;
    return exp_[l / 2];
  }

  /// a^(3^r): the r-th Frobenius power.
  Fe frobenius(Fe a, int r) const {
    if (a.is_zero()) return a;
    r %= k;
    if (r < 0) r += k;
    uint64_t e = 1;
    for (int i = 0; i < r; ++i) e = (e * 3) % (q - 1);
    return exp_[uint32_t((uint64_t(log_[a.v]) * e) % (q - 1))];
  }

  /// Embed an element of GF(3^src_k) into this field; src_k must divide k.
  Fe embed_from(const FieldCtx& src, Fe a) const {
    if (k % src.k != 0) throw NotASubfield(src.k, k);
    if (src.k == k) return a;
    return embed_tab_[src.k][a.v];
  }

  /// Inverse of embed_from: a must lie in the image of GF(3^sub_k).
  Fe restrict_to(int sub_k, Fe a) const {
    if (k % sub_k != 0) throw NotASubfield(sub_k, k);
    if (sub_k == k) return a;
    auto it = embed_inv_[sub_k].find(a.v);
    if (it == embed_inv_[sub_k].end()) throw NotASubfield(sub_k, k);
    return Fe{it->second};
  }

  /// Smallest d | k with frobenius(a, d) == a: the degree of a's minimal field.
  int min_subfield(Fe a) const {
    for (int d = 1; d < k; ++d)
      if (k % d == 0 && frobenius(a, d) == a) return d;
    return k;
  }

  bool in_subfield(int d, Fe a) const { return k % d == 0 && frobenius(a, d) == a; }

  /// Canonical text form: "g^3+2*g+1", "2*g", "1", "0".
  std::string to_string(Fe a) const {
    if (a.is_zero()) return "0";
    std::string s;
    for (int i = k - 1; i >= 0; --i) {
      int c = digit(a, i);
      if (!c) continue;
      if (!s.empty()) s += "+";
      if (i == 0) {
        s += std::to_string(c);
      } else {
        if (c != 1) s += std::to_string(c) + "*";
        s += (i == 1) ? "g" : ("g^" + std::to_string(i));
      }
    }
    return s;
  }

  /// Digits of the defining modulus m_k, low to high (degree k, monic).
  const std::array<int, kMaxDegree + 1>& modulus() const { return mod_; }

 private:
  friend const FieldCtx& field(int k);

  uint32_t kLo;  // interleaved low-plane mask for k digits
  std::array<int, kMaxDegree + 1> mod_{};
  std::vector<uint32_t> log_;             // packed rep -> discrete log (base: lex-min primitive)
  std::vector<Fe> exp_;                   // length 2(q-1), exp_[i] = prim^i
  std::array<std::vector<Fe>, kMaxDegree + 1> embed_tab_;  // [d][src index-packed] -> element
  std::array<std::unordered_map<uint16_t, uint16_t>, kMaxDegree + 1> embed_inv_;

  // Schoolbook multiply-and-reduce used only while building tables.
  Fe slow_mul(Fe a, Fe b) const {
    std::array<int, 2 * kMaxDegree> prod{};
    for (int i = 0; i < k; ++i) {
      int ai = digit(a, i);
      if (!ai) continue;
      for (int j = 0; j < k; ++j) prod[i + j] = (prod[i + j] + ai * digit(b, j)) % 3;
    }
    for (int d = 2 * k - 2; d >= k; --d) {
      int c = prod[d];
      if (!c) continue;
      prod[d] = 0;
      for (int i = 0; i < k; ++i) prod[d - k + i] = ((prod[d - k + i] - c * mod_[i]) % 3 + 3) % 3;
    }
    uint16_t p = 0;
    for (int i = 0; i < k; ++i) p |= uint16_t(prod[i] << (2 * i));
    return Fe{p};
  }

  explicit FieldCtx(int deg) : k(deg) {
    if (k < 1 || k > kMaxDegree) throw UnsupportedDegree(k);
    q = 1;
    for (int i = 0; i < k; ++i) q *= 3;
    kLo = 0x5555u & ((1u << (2 * k)) - 1);

    // Lexicographically minimal monic irreducible polynomial of each degree.
    static constexpr int kModuli[kMaxDegree + 1][kMaxDegree + 1] = {
        {},
        {0, 1},                          // g
        {1, 0, 1},                       // g^2 + 1
        {1, 2, 0, 1},                    // g^3 + 2g + 1
        {2, 1, 0, 0, 1},                 // g^4 + g + 2
        {1, 2, 0, 0, 0, 1},              // g^5 + 2g + 1
        {2, 1, 0, 0, 0, 0, 1},           // g^6 + g + 2
        {2, 0, 1, 0, 0, 0, 0, 1},        // g^7 + g^2 + 2
        {2, 0, 1, 0, 0, 0, 0, 0, 1},     // g^8 + g^2 + 2
    };
    for (int i = 0; i <= k; ++i) mod_[i] = kModuli[k][i];

    // Locate the lex-min primitive element, then lay out exp/log tables.
    // The exp table visiting all q-1 nonzero residues exactly once certifies
    // that the modulus is irreducible (otherwise the unit group is smaller).
    log_.assign(1u << (2 * k), 0);
    exp_.assign(2 * (q - 1), Fe{0});
    bool built = false;
    for (uint32_t ci = 1; ci < q && !built; ++ci) {
      Fe cand = from_index(ci);
      std::vector<bool> seen(1u << (2 * k), false);
      Fe x = one();
      uint32_t n = 0;
      for (; n < q - 1; ++n) {
        if (seen[x.v]) break;
        seen[x.v] = true;
        exp_[n] = x;
        log_[x.v] = n;
        x = slow_mul(x, cand);
      }
      if (n == q - 1 && x == one()) built = true;
    }
    if (!built) throw Error("field table construction failed for k=" + std::to_string(k));
    for (uint32_t i = 0; i < q - 1; ++i) exp_[q - 1 + i] = exp_[i];

    // Subfield embeddings: send the subfield generator to the lexicographically
    // smallest root of its modulus here.  Transitive across all divisor chains
    // with k <= 8 (checked for this modulus table).
    for (int d = 1; d < k; ++d) {
      if (k % d != 0) continue;
      const FieldCtx& sub = field(d);
      Fe root{0};
      bool found = false;
      for (uint32_t i = 0; i < q && !found; ++i) {
        Fe cand = from_index(i);
        // evaluate m_d at cand
        Fe acc = zero();
        for (int j = d; j >= 0; --j) acc = add(slow_mul(acc, cand), from_int(sub.mod_[j]));
        if (acc.is_zero()) {
          root = cand;
          found = true;
        }
      }
      if (!found) throw Error("no subfield root found; modulus table broken");
      embed_tab_[d].assign(1u << (2 * d), Fe{0});
      for (uint32_t i = 0; i < sub.q; ++i) {
        Fe a = sub.from_index(i);
        Fe acc = zero(), pw = one();
        for (int j = 0; j < d; ++j) {
          int c = digit(a, j);
          if (c) acc = add(acc, slow_mul(from_int(c), pw));
          pw = slow_mul(pw, root);
        }
        embed_tab_[d][a.v] = acc;
        embed_inv_[d][acc.v] = a.v;
      }
    }
  }
};

/// Singleton context per degree; construction order guarantees subfields exist first.
inline const FieldCtx& field(int k) {
  if (k < 1 || k > FieldCtx::kMaxDegree) throw UnsupportedDegree(k);
  static std::array<const FieldCtx*, FieldCtx::kMaxDegree + 1> cache{};
  if (!cache[k]) {
    for (int d = 1; d < k; ++d)
      if (k % d == 0) field(d);
    static std::vector<FieldCtx*> owned;
    auto* ctx = new FieldCtx(k);
    owned.push_back(ctx);
    cache[k] = ctx;
  }
  return *cache[k];
}

/// Compositum degree lcm(a,b); throws if it exceeds the supported range.
inline int compositum_degree(int a, int b) {
  int g = a, h = b;
  while (h) { int t = g % h; g = h; h = t; }
  long l = (long)a / g * b;
  if (l > FieldCtx::kMaxDegree)
    throw ExtensionExceeded("compositum GF(3^" + std::to_string(a) + "), GF(3^" +
                            std::to_string(b) + ")");
  return (int)l;
}

}  // namespace k3lines
