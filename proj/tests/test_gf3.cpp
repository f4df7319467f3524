#include <catch2/catch_amalgamated.hpp>

#include "k3lines/gf3.hpp"

using namespace k3lines;

static Fe rnd(const FieldCtx& F, Rng& rng) { return F.from_index(uint32_t(rng.below(F.q))); }

TEST_CASE("GF(9) pinned arithmetic") {
  const FieldCtx& F = field(2);
  Fe g = F.gen();
  REQUIRE(F.q == 9);
  REQUIRE(F.to_string(g) == "g");
  // modulus g^2 + 1: g*g = -1 = 2
  REQUIRE(F.mul(g, g) == F.from_int(2));
  REQUIRE(F.inv(g) == F.mul(F.from_int(2), g));
  REQUIRE(F.mul(g, F.inv(g)) == F.one());
  REQUIRE(F.frobenius(g, 1) == F.neg(g));
  REQUIRE(F.pow(g, 8) == F.one());
  REQUIRE(F.pow(g, 2) == F.from_int(2));  // g^2 = -1, so g has order 4
  REQUIRE(F.pow(g, 4) == F.one());
  REQUIRE(F.pow(g, -1) == F.inv(g));
}

TEST_CASE("GF(3) base field") {
  const FieldCtx& F = field(1);
  REQUIRE(F.q == 3);
  REQUIRE(F.add(F.from_int(1), F.from_int(2)) == F.zero());
  REQUIRE(F.mul(F.from_int(2), F.from_int(2)) == F.one());
  REQUIRE(F.inv(F.from_int(2)) == F.from_int(2));
  REQUIRE(F.neg(F.from_int(1)) == F.from_int(2));
  REQUIRE(F.to_string(F.from_int(2)) == "2");
}

TEST_CASE("moduli are monic of the right degree and gen is a root") {
  for (int k = 1; k <= 8; ++k) {
    const FieldCtx& F = field(k);
    auto m = F.modulus();
    REQUIRE(m[k] == 1);
    // Horner evaluation of the modulus at the generator must vanish.
    Fe acc = F.zero();
    for (int j = k; j >= 0; --j) acc = F.add(F.mul(acc, F.gen()), F.from_int(m[j]));
    REQUIRE(acc.is_zero());
  }
}

TEST_CASE("field axioms hold on random samples, k=1..8") {
  Rng rng{0xC0FFEE123456789ull};
  for (int k = 1; k <= 8; ++k) {
    const FieldCtx& F = field(k);
    for (int t = 0; t < 200; ++t) {
      Fe a = rnd(F, rng), b = rnd(F, rng), c = rnd(F, rng);
      REQUIRE(F.add(a, b) == F.add(b, a));
      REQUIRE(F.mul(a, b) == F.mul(b, a));
      REQUIRE(F.add(F.add(a, b), c) == F.add(a, F.add(b, c)));
      REQUIRE(F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c)));
      REQUIRE(F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c)));
      REQUIRE(F.add(a, F.neg(a)).is_zero());
      REQUIRE(F.sub(a, b) == F.add(a, F.neg(b)));
      if (!a.is_zero()) {
        REQUIRE(F.mul(a, F.inv(a)) == F.one());
        REQUIRE(F.div(b, a) == F.mul(b, F.inv(a)));
      }
    }
  }
}

TEST_CASE("multiplicative group order and pow") {
  Rng rng{42};
  for (int k = 1; k <= 8; ++k) {
    const FieldCtx& F = field(k);
    for (int t = 0; t < 30; ++t) {
      Fe a = rnd(F, rng);
      if (a.is_zero()) continue;
      REQUIRE(F.pow(a, (long long)F.q - 1) == F.one());
      REQUIRE(F.pow(a, 0) == F.one());
      REQUIRE(F.pow(a, -3) == F.inv(F.pow(a, 3)));
      REQUIRE(F.pow(a, 5) == F.mul(F.pow(a, 2), F.pow(a, 3)));
    }
    REQUIRE(F.pow(F.zero(), 0) == F.one());
    REQUIRE(F.pow(F.zero(), 7).is_zero());
  }
}

TEST_CASE("frobenius is a field automorphism of order k fixing GF(3)") {
  Rng rng{7};
  for (int k = 1; k <= 8; ++k) {
    const FieldCtx& F = field(k);
    for (int t = 0; t < 60; ++t) {
      Fe a = rnd(F, rng), b = rnd(F, rng);
      REQUIRE(F.frobenius(F.add(a, b), 1) == F.add(F.frobenius(a, 1), F.frobenius(b, 1)));
      REQUIRE(F.frobenius(F.mul(a, b), 1) == F.mul(F.frobenius(a, 1), F.frobenius(b, 1)));
      REQUIRE(F.frobenius(a, k) == a);
      REQUIRE(F.frobenius(a, 1) == F.mul(F.mul(a, a), a));  // cube map
    }
    for (int c = 0; c < 3; ++c) REQUIRE(F.frobenius(F.from_int(c), 1) == F.from_int(c));
  }
}

TEST_CASE("index round trip and lex order") {
  for (int k : {1, 3, 8}) {
    const FieldCtx& F = field(k);
    uint32_t step = k == 8 ? 97 : 1;
    for (uint32_t i = 0; i < F.q; i += step) {
      REQUIRE(F.index_of(F.from_index(i)) == i);
    }
    // packed order agrees with base-3 index order
    REQUIRE(F.from_index(0) < F.from_index(1));
    if (F.q > 4) REQUIRE(F.from_index(3).v > F.from_index(2).v);
  }
}

TEST_CASE("embeddings are injective field morphisms") {
  Rng rng{0xABCDEF};
  for (int k = 2; k <= 8; ++k) {
    const FieldCtx& K = field(k);
    for (int d = 1; d < k; ++d) {
      if (k % d != 0) continue;
      const FieldCtx& S = field(d);
      REQUIRE(K.embed_from(S, S.zero()).is_zero());
      REQUIRE(K.embed_from(S, S.one()) == K.one());
      for (int t = 0; t < 80; ++t) {
        Fe a = rnd(S, rng), b = rnd(S, rng);
        Fe ea = K.embed_from(S, a), eb = K.embed_from(S, b);
        REQUIRE(K.embed_from(S, S.add(a, b)) == K.add(ea, eb));
        REQUIRE(K.embed_from(S, S.mul(a, b)) == K.mul(ea, eb));
        REQUIRE(K.restrict_to(d, ea) == a);
        REQUIRE(K.in_subfield(d, ea));
      }
      // injectivity on the full (small) subfield
      std::vector<uint16_t> img;
      for (uint32_t i = 0; i < S.q; ++i) img.push_back(K.embed_from(S, S.from_index(i)).v);
      std::sort(img.begin(), img.end());
      REQUIRE(std::adjacent_find(img.begin(), img.end()) == img.end());
    }
  }
}

TEST_CASE("embedding towers commute") {
  Rng rng{99};
  // chains (a | b | c): embed a->c equals a->b->c
  int chains[][3] = {{1, 2, 4}, {1, 2, 6}, {1, 2, 8}, {1, 3, 6}, {1, 4, 8},
                     {2, 4, 8}, {1, 2, 2}, {1, 3, 3}};
  for (auto& ch : chains) {
    const FieldCtx& A = field(ch[0]);
    const FieldCtx& B = field(ch[1]);
    const FieldCtx& C = field(ch[2]);
    for (int t = 0; t < 40; ++t) {
      Fe a = rnd(A, rng);
      REQUIRE(C.embed_from(A, a) == C.embed_from(B, B.embed_from(A, a)));
    }
  }
}

TEST_CASE("min_subfield finds the exact degree") {
  const FieldCtx& K8 = field(8);
  REQUIRE(K8.min_subfield(K8.one()) == 1);
  REQUIRE(K8.min_subfield(K8.from_int(2)) == 1);
  REQUIRE(K8.min_subfield(K8.gen()) == 8);
  const FieldCtx& K2 = field(2);
  Fe i2 = K8.embed_from(K2, K2.gen());
  REQUIRE(K8.min_subfield(i2) == 2);
  const FieldCtx& K4 = field(4);
  Fe g4 = K8.embed_from(K4, K4.gen());
  REQUIRE(K8.min_subfield(g4) == 4);
  const FieldCtx& K6 = field(6);
  Fe g3in6 = K6.embed_from(field(3), field(3).gen());
  REQUIRE(K6.min_subfield(g3in6) == 3);
}

TEST_CASE("to_string canonical forms") {
  const FieldCtx& F = field(4);
  REQUIRE(F.to_string(F.zero()) == "0");
  REQUIRE(F.to_string(F.one()) == "1");
  REQUIRE(F.to_string(F.gen()) == "g");
  Fe a = F.add(F.mul(F.from_int(2), F.mul(F.gen(), F.gen())), F.one());
  REQUIRE(F.to_string(a) == "2*g^2+1");
  Fe b = F.add(F.pow(F.gen(), 3), F.add(F.gen(), F.from_int(2)));
  REQUIRE(F.to_string(b) == "g^3+g+2");
}

TEST_CASE("error conditions") {
  REQUIRE_THROWS_AS(field(0), UnsupportedDegree);
  REQUIRE_THROWS_AS(field(9), UnsupportedDegree);
  REQUIRE_THROWS_AS(field(2).inv(Fe{0}), DivisionByZero);
  REQUIRE_THROWS_AS(field(2).pow(Fe{0}, -1), DivisionByZero);
  REQUIRE_THROWS_AS(field(4).embed_from(field(3), field(3).one()), NotASubfield);
  REQUIRE_THROWS_AS(field(6).restrict_to(4, field(6).one()), NotASubfield);
  // an element genuinely of degree 8 cannot be restricted to GF(3^4)
  REQUIRE_THROWS_AS(field(8).restrict_to(4, field(8).gen()), NotASubfield);
  REQUIRE(compositum_degree(2, 3) == 6);
  REQUIRE(compositum_degree(4, 8) == 8);
  REQUIRE_THROWS_AS(compositum_degree(5, 2), ExtensionExceeded);
  REQUIRE_THROWS_AS(compositum_degree(6, 8), ExtensionExceeded);
}
