// Invariants of a single line on a quartic surface: the standard chart and
// pencil forms, projection degree and separability, ramification profiles,
// the hessian-resultant kind dichotomy, quasi-elliptic and cuspidal
// detection, singular-fiber classification with local valencies, and the
// valency bound audits.  Expected values are frozen from independent hand
// derivations (traces, wronskians, ramification orders, fiber splittings)
// and cross-checked geometrically against the exact line enumeration.
#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include "k3lines/line_analysis.hpp"

using namespace k3lines;

namespace {

MPoly P(const std::string& s, const FieldCtx& F) { return mp_parse(s, F); }

const std::string kFermat = "x0^4 + x1^4 + x2^4 + x3^4";

// Elliptic degree-3 line of the second kind, ramification 2_1 3_3, valency 21.
const std::string kSep21a =
    "x0^4 + x0^2*x1*x2 - x1^3*x2 + x0*x1*x2^2 + x1*x2^3 + x0^2*x1*x3 + "
    "x1^2*x3^2 + x0*x2*x3^2 + x0*x3^3";

// Elliptic degree-3 line of the second kind, ramification 3_4, valency 21;
// coefficients in GF(9).
const std::string kSep21b =
    "g*x0^3*x1 + g*x1^3*x2 + g*x1*x2^3 - g*x0^3*x3 + g*x0*x1*x2*x3 + "
    "g*x0*x3^3 - x0^2*x1*x2 - x1^2*x2^2 - x0*x2^2*x3 + x0^2*x3^2";

// Elliptic degree-2 line with valency 14 through one singular point.
const std::string kDeg2V14 =
    "x0^4 + x0^2*x1*x2 - x1^3*x2 + x0*x1*x2^2 + x1*x2^3 + x1^2*x3^2 + "
    "x0*x2*x3^2";

// Quasi-elliptic separable degree-3 line with valency 21.
const std::string kQeSep21 =
    "x1^4 + x0^2*x2^2 - x1^2*x2^2 - x1*x2^3 + x0*x2^2*x3 + x0*x3^3";

// Quasi-elliptic degree-2 line with valency 14 through one singular point.
const std::string kQeDeg2V14 =
    "x0^4 + x0^3*x1 + x0*x1^3 + x1*x2^3 + x0*x1*x3^2 + x1^2*x3^2 + "
    "x0*x2*x3^2";

// A member of the cuspidal family x0*x3^3 - x1*x2^3 + x2*q3 + x3*q3' + q4.
const std::string kCuspFamily = "x0*x3^3 - x1*x2^3 + x0^3*x2";

// Carries the cuspidal line {x0 = x1 = 0} and the line {x0 = x1 - x2 = 0},
// which is inseparable but not cuspidal: its obstruction polynomial is a
// single monomial, leaving exactly one reducible member of that pencil.
const std::string kTwoInsep = "x0*x3^3 - x1*x2^3 + x1^3*x2 + x0^2*x1*x2";

// Alpha and beta share the factor x2^2*x3, so the projection has degree 0.
const std::string kDeg0 = "x0*x2^2*x3 + x1*x2^2*x3 + x0^4";

// No monomial linear in x0 or x1: the surface is singular along the line.
const std::string kSingAlong = "x0^4 + x0^2*x2^2 + x1^2*x3^2";

PLine std_line(const FieldCtx& F) {
  return PLine(F, {F.zero(), F.zero(), F.one(), F.zero()},
               {F.zero(), F.zero(), F.zero(), F.one()});
}

BForm bform(const FieldCtx& F, const std::vector<int>& c) {
  BForm b(F, (int)c.size() - 1);
  for (size_t i = 0; i < c.size(); ++i) b.c[i] = F.from_int(c[i]);
  return b;
}

Fe gen(const FieldCtx& F) { return mp_parse("g", F).coeff({0, 0, 0, 0}); }

bool same_point(const PPoint& a, const PPoint& b) {
  int kk = compositum_degree(a.F->k, b.F->k);
  const FieldCtx& K = field(kk);
  return pp_embed(a, K) == pp_embed(b, K);
}

PPoint pt(const FieldCtx& F, int a, int b, int c, int d) {
  return PPoint(F, {F.from_int(a), F.from_int(b), F.from_int(c), F.from_int(d)});
}

Fe eval_in(const UPoly& p, const FieldCtx& K, Fe x) {
  Fe acc = K.zero();
  for (int i = p.deg(); i >= 0; --i)
    acc = K.add(K.mul(acc, x), K.embed_from(*p.F, p.c[i]));
  return acc;
}

// Chart of a line using only the equation (no singular-locus computation).
LineChart chart_on(const MPoly& f, const PLine& l) {
  Surface S{f.F, f, {}};
  return normalize_to_standard(S, l);
}

Fe rnd_fe(const FieldCtx& F, Rng& rng) {
  return F.from_index((uint32_t)(rng.next() % F.q));
}

// Random invertible coordinate change fixing the line {x0 = x1 = 0}.
std::array<std::array<Fe, 4>, 4> line_stabilizer(const FieldCtx& F, Rng& rng) {
  auto inv2 = [&](Fe& a, Fe& b, Fe& c, Fe& d) {
    for (;;) {
      a = rnd_fe(F, rng);
      b = rnd_fe(F, rng);
      c = rnd_fe(F, rng);
      d = rnd_fe(F, rng);
      if (!F.sub(F.mul(a, d), F.mul(b, c)).is_zero()) return;
    }
  };
  std::array<std::array<Fe, 4>, 4> M;
  for (auto& row : M) row.fill(F.zero());
  inv2(M[0][0], M[0][1], M[1][0], M[1][1]);
  inv2(M[2][2], M[2][3], M[3][2], M[3][3]);
  M[2][0] = rnd_fe(F, rng);
  M[2][1] = rnd_fe(F, rng);
  M[3][0] = rnd_fe(F, rng);
  M[3][1] = rnd_fe(F, rng);
  return M;
}

// Random quartic containing {x0 = x1 = 0}: every monomial has x0 or x1.
MPoly random_online_quartic(const FieldCtx& F, Rng& rng) {
  MPoly f(F);
  for (int i0 = 0; i0 <= 4; ++i0)
    for (int i1 = 0; i0 + i1 <= 4; ++i1) {
      if (i0 + i1 == 0) continue;
      for (int i2 = 0; i0 + i1 + i2 <= 4; ++i2) {
        Fe c = rnd_fe(F, rng);
        if (!c.is_zero()) f.add_term({i0, i1, i2, 4 - i0 - i1 - i2}, c);
      }
    }
  return f;
}

// Random member of the cuspidal family over GF(3).
MPoly random_family_member(const FieldCtx& F, Rng& rng) {
  MPoly f(F);
  f.add_term({1, 0, 0, 3}, F.one());
  f.add_term({0, 1, 3, 0}, F.neg(F.one()));
  for (int j = 0; j <= 3; ++j) {
    Fe c = rnd_fe(F, rng);
    if (!c.is_zero()) f.add_term({j, 3 - j, 1, 0}, c);  // x2 * q3
    c = rnd_fe(F, rng);
    if (!c.is_zero()) f.add_term({j, 3 - j, 0, 1}, c);  // x3 * q3'
  }
  for (int j = 0; j <= 4; ++j) {
    Fe c = rnd_fe(F, rng);
    if (!c.is_zero()) f.add_term({j, 4 - j, 0, 0}, c);  // q4
  }
  return f;
}

// Random quartic with the inseparable normalized trace: x0*x3^3 - x1*x2^3
// plus arbitrary terms of degree <= 2 in (x2, x3).
MPoly random_insep_normalized(const FieldCtx& F, Rng& rng) {
  MPoly f(F);
  f.add_term({1, 0, 0, 3}, F.one());
  f.add_term({0, 1, 3, 0}, F.neg(F.one()));
  for (int tail = 0; tail <= 2; ++tail)
    for (int i2 = 0; i2 <= tail; ++i2)
      for (int i0 = 0; i0 <= 4 - tail; ++i0) {
        Fe c = rnd_fe(F, rng);
        if (!c.is_zero()) f.add_term({i0, 4 - tail - i0, i2, tail - i2}, c);
      }
  return f;
}

}  // namespace

TEST_CASE("standard chart of a line", "[line_analysis]") {
  const FieldCtx& F = field(1);
  const FieldCtx& F9 = field(2);

  SECTION("trace forms of hand-computed pencils") {
    {
      LineChart C = chart_on(P(kSep21a, F), std_line(F));
      REQUIRE(C.alpha == bform(F, {1, 1, 0, 0}));  // x2*x3^2 + x3^3
      REQUIRE(C.beta == bform(F, {0, 0, 0, 1}));   // x2^3
    }
    {
      LineChart C = chart_on(P(kSep21b, F9), std_line(F9));
      BForm a(F9, 3), b(F9, 3);
      a.c[0] = gen(F9);               // g*x3^3
      a.c[2] = F9.from_int(2);        // -x2^2*x3
      b.c[3] = gen(F9);               // g*x2^3
      REQUIRE(C.alpha == a);
      REQUIRE(C.beta == b);
    }
    {
      LineChart C = chart_on(P(kDeg2V14, F), std_line(F));
      REQUIRE(C.alpha == bform(F, {0, 1, 0, 0}));  // x2*x3^2
      REQUIRE(C.beta == bform(F, {0, 0, 0, 1}));   // x2^3
    }
    {
      LineChart C = chart_on(P(kQeSep21, F), std_line(F));
      REQUIRE(C.alpha == bform(F, {1, 0, 1, 0}));  // x2^2*x3 + x3^3
      REQUIRE(C.beta == bform(F, {0, 0, 0, 2}));   // -x2^3
    }
    {
      LineChart C = chart_on(P(kCuspFamily, F), std_line(F));
      REQUIRE(C.alpha == bform(F, {1, 0, 0, 0}));  // x3^3
      REQUIRE(C.beta == bform(F, {0, 0, 0, 2}));   // -x2^3
    }
  }

  SECTION("the pencil cubic reproduces the plane sections") {
    Rng rng(0xAB12CD34);
    auto check = [&](const LineChart& C) {
      const FieldCtx& K = field(compositum_degree(C.F->k, 2));
      MPoly fK = mp_embed(C.fstd, K);
      MPoly gK = mp_embed(C.g, K);
      MPoly hK = mp_embed(C.g_flip, K);
      for (int i = 0; i < 12; ++i) {
        Fe t = rnd_fe(K, rng), x1 = rnd_fe(K, rng);
        Fe x2 = rnd_fe(K, rng), x3 = rnd_fe(K, rng);
        REQUIRE(mp_eval(fK, {K.mul(t, x1), x1, x2, x3}) ==
                K.mul(x1, mp_eval(gK, {t, x1, x2, x3})));
        REQUIRE(mp_eval(fK, {x1, K.mul(t, x1), x2, x3}) ==
                K.mul(x1, mp_eval(hK, {x1, t, x2, x3})));
      }
      // The flipped cubic restricted to the line is alpha + u*beta.
      MPoly expect(*C.F);
      for (int i = 0; i <= 3; ++i) {
        expect.add_term({0, 0, i, 3 - i}, C.alpha.c[i]);
        expect.add_term({0, 1, i, 3 - i}, C.beta.c[i]);
      }
      REQUIRE(mp_substitute(C.g_flip, 0, C.F->zero()) == expect);
    };
    check(chart_on(P(kSep21a, F), std_line(F)));
    check(chart_on(P(kQeDeg2V14, F), std_line(F)));

    // A line that needs a genuine coordinate move: x0 = z*x2, x1 = z*x3 on
    // the Fermat surface, with z = 1 + g satisfying z^4 = -1.
    Fe z = F9.add(F9.one(), gen(F9));
    REQUIRE(F9.pow(z, 4) == F9.neg(F9.one()));
    PLine fl(F9, {z, F9.zero(), F9.one(), F9.zero()},
             {F9.zero(), z, F9.zero(), F9.one()});
    LineChart C = chart_on(P(kFermat, F9), fl);
    check(C);
    for (int i = 0; i < 8; ++i) {
      Fe s = rnd_fe(F9, rng), u = rnd_fe(F9, rng);
      if (s.is_zero() && u.is_zero()) continue;
      PPoint cp(F9, {F9.zero(), F9.zero(), s, u});
      PPoint amb = C.from_chart(cp);
      REQUIRE(line_contains(C.line, amb));
      REQUIRE(same_point(C.to_chart(amb), cp));
    }
  }

  SECTION("lines off the surface are rejected") {
    Surface SF{&F, P(kFermat, F), {}};
    REQUIRE_THROWS_AS(normalize_to_standard(SF, std_line(F)), LineNotOnSurface);
    Surface SA{&F, P(kSep21a, F), {}};
    PLine off(F, {F.one(), F.zero(), F.zero(), F.zero()},
              {F.zero(), F.one(), F.zero(), F.zero()});
    REQUIRE_THROWS_AS(normalize_to_standard(SA, off), LineNotOnSurface);
  }

  SECTION("a surface singular along the line has no pencil trace") {
    LineChart C = chart_on(P(kSingAlong, F), std_line(F));
    REQUIRE(C.alpha.is_zero());
    REQUIRE(C.beta.is_zero());
    REQUIRE_THROWS_AS(degree_and_separability(C), DegenerateParameter);
  }
}

TEST_CASE("projection degree, separability, and base points", "[line_analysis]") {
  const FieldCtx& F = field(1);
  const FieldCtx& F9 = field(2);

  SECTION("separable degree 3, no base points") {
    LineChart C = chart_on(P(kSep21a, F), std_line(F));
    PencilDegree D = degree_and_separability(C);
    REQUIRE(D.degree == 3);
    REQUIRE(D.separable);
    REQUIRE(D.base.d == 0);
    REQUIRE(D.base_points.empty());
    // W(x2*x3^2 + x3^3, x2^3) = -x2^3*x3^2, trimmed to -x2^3*x3.
    REQUIRE(D.wronskian == bform(F, {0, 0, 0, 2, 0}));
  }

  SECTION("separable degree 3 over GF(9)") {
    LineChart C = chart_on(P(kSep21b, F9), std_line(F9));
    PencilDegree D = degree_and_separability(C);
    REQUIRE(D.degree == 3);
    REQUIRE(D.separable);
    REQUIRE(D.wronskian.d == 4);
    REQUIRE(D.wronskian.c[4] == F9.neg(gen(F9)));
    for (int i = 0; i < 4; ++i) REQUIRE(D.wronskian.c[i].is_zero());
  }

  SECTION("degree 2 with one base point") {
    for (auto* src : {&kDeg2V14, &kQeDeg2V14}) {
      LineChart C = chart_on(P(*src, F), std_line(F));
      PencilDegree D = degree_and_separability(C);
      REQUIRE(D.degree == 2);
      REQUIRE(D.separable);
      REQUIRE(D.base.d == 1);
      REQUIRE(D.base_points.size() == 1);
      REQUIRE(D.base_points[0].second == 1);
      REQUIRE(same_point(D.base_points[0].first, pt(F, 0, 0, 0, 1)));
      REQUIRE(D.wronskian == bform(F, {0, 2, 0}));
    }
  }

  SECTION("separable quasi-elliptic degree 3") {
    LineChart C = chart_on(P(kQeSep21, F), std_line(F));
    PencilDegree D = degree_and_separability(C);
    REQUIRE(D.degree == 3);
    REQUIRE(D.separable);
    REQUIRE(D.wronskian == bform(F, {0, 0, 0, 0, 2}));
  }

  SECTION("inseparable lines") {
    Fe z = F9.add(F9.one(), gen(F9));
    PLine fl(F9, {z, F9.zero(), F9.one(), F9.zero()},
             {F9.zero(), z, F9.zero(), F9.one()});
    LineChart C = chart_on(P(kFermat, F9), fl);
    PencilDegree D = degree_and_separability(C);
    REQUIRE(D.degree == 3);
    REQUIRE_FALSE(D.separable);
    REQUIRE(D.wronskian.is_zero());
    REQUIRE(D.base.d == 0);

    LineChart Cc = chart_on(P(kCuspFamily, F), std_line(F));
    PencilDegree Dc = degree_and_separability(Cc);
    REQUIRE(Dc.degree == 3);
    REQUIRE_FALSE(Dc.separable);
  }

  SECTION("degree 0: three base points with multiplicity") {
    LineChart C = chart_on(P(kDeg0, F), std_line(F));
    PencilDegree D = degree_and_separability(C);
    REQUIRE(D.degree == 0);
    REQUIRE(D.base.d == 3);
    int mass = 0;
    for (auto& [p, m] : D.base_points) mass += m;
    REQUIRE(mass == 3);
    REQUIRE(D.base_points.size() == 2);
    REQUIRE_THROWS_AS(line_resultant(C, D), DegreeZeroLine);
  }
}

TEST_CASE("ramification profiles", "[line_analysis]") {
  const FieldCtx& F = field(1);
  const FieldCtx& F9 = field(2);

  SECTION("tame-wild profile 2_1 3_3") {
    LineChart C = chart_on(P(kSep21a, F), std_line(F));
    PencilDegree D = degree_and_separability(C);
    auto ram = ramification_profile(C, D);
    REQUIRE(ram.size() == 2);
    REQUIRE(same_point(ram[0].point, pt(F, 0, 0, 0, 1)));
    REQUIRE(ram[0].n == 3);
    REQUIRE(ram[0].m == 3);
    REQUIRE(same_point(ram[1].point, pt(F, 0, 0, 1, 0)));
    REQUIRE(ram[1].n == 2);
    REQUIRE(ram[1].m == 1);
    REQUIRE(ramification_profile_name(ram) == "2_1 3_3");
  }

  SECTION("totally wild profile 3_4") {
    LineChart C = chart_on(P(kSep21b, F9), std_line(F9));
    PencilDegree D = degree_and_separability(C);
    auto ram = ramification_profile(C, D);
    REQUIRE(ram.size() == 1);
    REQUIRE(same_point(ram[0].point, pt(F, 0, 0, 0, 1)));
    REQUIRE(ram[0].n == 3);
    REQUIRE(ram[0].m == 4);
    REQUIRE(ramification_profile_name(ram) == "3_4");

    LineChart C2 = chart_on(P(kQeSep21, F), std_line(F));
    PencilDegree D2 = degree_and_separability(C2);
    auto ram2 = ramification_profile(C2, D2);
    REQUIRE(ram2.size() == 1);
    REQUIRE(ram2[0].n == 3);
    REQUIRE(ram2[0].m == 4);
  }

  SECTION("degree 2: two simple tame points") {
    LineChart C = chart_on(P(kDeg2V14, F), std_line(F));
    PencilDegree D = degree_and_separability(C);
    auto ram = ramification_profile(C, D);
    REQUIRE(ram.size() == 2);
    for (auto& r : ram) {
      REQUIRE(r.n == 2);
      REQUIRE(r.m == 1);
    }
    REQUIRE(ramification_profile_name(ram) == "2_1^2");
  }

  SECTION("undefined cases throw") {
    Fe z = F9.add(F9.one(), gen(F9));
    PLine fl(F9, {z, F9.zero(), F9.one(), F9.zero()},
             {F9.zero(), z, F9.zero(), F9.one()});
    LineChart C = chart_on(P(kFermat, F9), fl);
    PencilDegree D = degree_and_separability(C);
    REQUIRE_THROWS_AS(ramification_profile(C, D), InseparableLine);

    LineChart C0 = chart_on(P(kDeg0, F), std_line(F));
    PencilDegree D0 = degree_and_separability(C0);
    REQUIRE_THROWS_AS(ramification_profile(C0, D0), DegreeZeroLine);
  }
}

TEST_CASE("first and second kind", "[line_analysis]") {
  const FieldCtx& F = field(1);
  const FieldCtx& F9 = field(2);

  SECTION("second-kind fixtures") {
    for (auto& [src, Fp] :
         std::vector<std::pair<const std::string*, const FieldCtx*>>{
             {&kSep21a, &F}, {&kSep21b, &F9}, {&kDeg2V14, &F}}) {
      LineChart C = chart_on(P(*src, *Fp), std_line(*Fp));
      PencilDegree D = degree_and_separability(C);
      KindResult K = line_resultant(C, D);
      REQUIRE(K.second_kind);
      REQUIRE(K.resultant.is_zero());
    }
    Fe z = F9.add(F9.one(), gen(F9));
    PLine fl(F9, {z, F9.zero(), F9.one(), F9.zero()},
             {F9.zero(), z, F9.zero(), F9.one()});
    LineChart C = chart_on(P(kFermat, F9), fl);
    PencilDegree D = degree_and_separability(C);
    REQUIRE(line_resultant(C, D).second_kind);
  }

  SECTION("a random line of the first kind exists and obeys its bound") {
    MPoly found(F);
    bool have = false;
    for (uint64_t seed = 1; seed <= 400 && !have; ++seed) {
      Rng rng(seed);
      MPoly f = random_online_quartic(F, rng);
      try {
        LineChart C = chart_on(f, std_line(F));
        PencilDegree D = degree_and_separability(C);
        if (D.degree != 3 || !D.separable) continue;
        if (line_resultant(C, D).second_kind) continue;
        Surface S = make_surface(f);
        LineProfile prof = line_profile(S, std_line(F));
        REQUIRE_FALSE(prof.second_kind);
        AuditReport audit = audit_bounds(prof);
        REQUIRE(audit.all_ok);
        REQUIRE(prof.valency <= 18);
        found = f;
        have = true;
      } catch (const NotK3&) {
      } catch (const DegenerateParameter&) {
      }
    }
    REQUIRE(have);

    // The dichotomy is geometric: invariant under every coordinate change
    // fixing the line.
    Rng rng(0x5EED0007);
    for (auto& [f, Fp, expect] :
         std::vector<std::tuple<MPoly, const FieldCtx*, bool>>{
             {P(kSep21a, F), &F, true},
             {P(kSep21b, F9), &F9, true},
             {found, &F, false}}) {
      for (int i = 0; i < 10; ++i) {
        auto M = line_stabilizer(*Fp, rng);
        MPoly fm = mp_linear_subst(f, M);
        LineChart C = chart_on(fm, std_line(*Fp));
        PencilDegree D = degree_and_separability(C);
        REQUIRE(D.degree == 3);
        REQUIRE(D.separable);
        REQUIRE(line_resultant(C, D).second_kind == expect);
      }
    }
  }
}

TEST_CASE("quasi-elliptic dichotomy", "[line_analysis]") {
  const FieldCtx& F = field(1);
  const FieldCtx& F9 = field(2);

  Fe z = F9.add(F9.one(), gen(F9));
  PLine fl(F9, {z, F9.zero(), F9.one(), F9.zero()},
           {F9.zero(), z, F9.zero(), F9.one()});
  REQUIRE(quasi_elliptic_test(chart_on(P(kFermat, F9), fl)) ==
          Fibration::QuasiElliptic);
  REQUIRE(quasi_elliptic_test(chart_on(P(kCuspFamily, F), std_line(F))) ==
          Fibration::QuasiElliptic);
  REQUIRE(quasi_elliptic_test(chart_on(P(kQeSep21, F), std_line(F))) ==
          Fibration::QuasiElliptic);
  REQUIRE(quasi_elliptic_test(chart_on(P(kQeDeg2V14, F), std_line(F))) ==
          Fibration::QuasiElliptic);
  REQUIRE(quasi_elliptic_test(chart_on(P(kSep21a, F), std_line(F))) ==
          Fibration::Elliptic);
  REQUIRE(quasi_elliptic_test(chart_on(P(kSep21b, F9), std_line(F9))) ==
          Fibration::Elliptic);
  REQUIRE(quasi_elliptic_test(chart_on(P(kDeg2V14, F), std_line(F))) ==
          Fibration::Elliptic);
}

TEST_CASE("cuspidal lines and the distinguished family", "[line_analysis]") {
  const FieldCtx& F = field(1);
  const FieldCtx& F9 = field(2);

  SECTION("family members are cuspidal") {
    LineChart C = chart_on(P(kCuspFamily, F), std_line(F));
    PencilDegree D = degree_and_separability(C);
    CuspidalResult cu = cuspidal_test(C, D);
    REQUIRE(cu.applicable);
    REQUIRE(cu.cuspidal);
    REQUIRE(cu.family_c);
    REQUIRE(cu.phi.is_zero());

    int valid = 0;
    for (uint64_t seed = 100; seed < 200 && valid < 5; ++seed) {
      Rng rng(seed);
      MPoly f = random_family_member(F, rng);
      try {
        Surface S = make_surface(f);
        LineChart Cm = normalize_to_standard(S, std_line(F));
        PencilDegree Dm = degree_and_separability(Cm);
        CuspidalResult cm = cuspidal_test(Cm, Dm);
        REQUIRE(cm.applicable);
        REQUIRE(cm.cuspidal);
        REQUIRE(cm.family_c);
        REQUIRE(quasi_elliptic_test(Cm) == Fibration::QuasiElliptic);
        ++valid;
      } catch (const NotK3&) {
      }
    }
    REQUIRE(valid == 5);
  }

  SECTION("Fermat lines are cuspidal") {
    Fe z = F9.add(F9.one(), gen(F9));
    PLine fl(F9, {z, F9.zero(), F9.one(), F9.zero()},
             {F9.zero(), z, F9.zero(), F9.one()});
    LineChart C = chart_on(P(kFermat, F9), fl);
    PencilDegree D = degree_and_separability(C);
    CuspidalResult cu = cuspidal_test(C, D);
    REQUIRE(cu.applicable);
    REQUIRE(cu.cuspidal);
    REQUIRE(cu.family_c);
  }

  SECTION("separable lines are out of scope") {
    LineChart C = chart_on(P(kSep21a, F), std_line(F));
    PencilDegree D = degree_and_separability(C);
    CuspidalResult cu = cuspidal_test(C, D);
    REQUIRE_FALSE(cu.applicable);
  }

  SECTION("an inseparable line that is not cuspidal") {
    MPoly f = P(kTwoInsep, F);
    // The standard line stays cuspidal.
    LineChart C0 = chart_on(f, std_line(F));
    PencilDegree D0 = degree_and_separability(C0);
    CuspidalResult c0 = cuspidal_test(C0, D0);
    REQUIRE(c0.applicable);
    REQUIRE(c0.cuspidal);

    // The second inseparable line has a monomial obstruction polynomial.
    PLine l2(F, {F.zero(), F.one(), F.one(), F.zero()},
             {F.zero(), F.zero(), F.zero(), F.one()});
    LineChart C = chart_on(f, l2);
    PencilDegree D = degree_and_separability(C);
    REQUIRE(D.degree == 3);
    REQUIRE_FALSE(D.separable);
    CuspidalResult cu = cuspidal_test(C, D);
    REQUIRE(cu.applicable);
    REQUIRE_FALSE(cu.cuspidal);
    REQUIRE_FALSE(cu.family_c);
    REQUIRE(cu.phi.deg() == 8);
    REQUIRE(cu.phi.c[8] == F.one());
    for (int i = 0; i < 8; ++i) REQUIRE(cu.phi.c[i].is_zero());
  }
}

TEST_CASE("inseparable pencils: the obstruction polynomial tracks the moving point",
          "[line_analysis]") {
  const FieldCtx& F = field(1);
  const FieldCtx& K = field(2);

  SECTION("phi(s) = 0 exactly when the member at t = s^3 is singular there") {
    Rng rng(0xC0FFEE01);
    for (int trial = 0; trial < 30; ++trial) {
      MPoly f = random_insep_normalized(F, rng);
      LineChart C = chart_on(f, std_line(F));
      PencilDegree D = degree_and_separability(C);
      REQUIRE(D.degree == 3);
      REQUIRE_FALSE(D.separable);
      CuspidalResult cu = cuspidal_test(C, D);
      REQUIRE(cu.applicable);
      for (int i = 0; i < 6; ++i) {
        Fe s = rnd_fe(K, rng);
        Fe t = K.mul(K.mul(s, s), s);
        MPoly Et = C.residual_cubic(K, t);
        Row4 x{K.zero(), K.zero(), s, K.one()};
        REQUIRE(mp_eval(Et, x).is_zero());  // the moving point lies on E_t
        bool singular = true;
        for (int v = 1; v <= 3; ++v)
          if (!mp_eval(mp_derivative(Et, v), x).is_zero()) singular = false;
        REQUIRE(singular == eval_in(cu.phi, K, s).is_zero());
      }
    }
  }

  SECTION("cuspidal members meet the line once and are singular there") {
    Rng rng(0xC0FFEE02);
    std::vector<MPoly> samples{P(kCuspFamily, F)};
    for (uint64_t seed = 300; seed < 400 && samples.size() < 3; ++seed) {
      Rng r2(seed);
      MPoly f = random_family_member(F, r2);
      try {
        make_surface(f);
        samples.push_back(f);
      } catch (const NotK3&) {
      }
    }
    REQUIRE(samples.size() == 3);
    for (auto& f : samples) {
      LineChart C = chart_on(f, std_line(F));
      for (int i = 0; i < 10; ++i) {
        Fe s = rnd_fe(K, rng);
        Fe t = K.mul(K.mul(s, s), s);
        // The trace at t = s^3 is a perfect cube: one intersection point.
        BForm tr(K, 3);
        for (int j = 0; j <= 3; ++j)
          tr.c[j] = K.add(K.mul(t, K.embed_from(F, C.alpha.c[j])),
                          K.embed_from(F, C.beta.c[j]));
        auto roots = bf_roots_up_to(tr);
        REQUIRE(roots.residual == 0);
        REQUIRE(roots.roots.size() == 1);
        REQUIRE(roots.roots[0].mult == 3);
        auto split = split_ternary_cubic(C.residual_cubic(K, t), {1, 2, 3});
        if (split.kind == CubicKind::CuspidalIrreducible) {
          REQUIRE(split.sing.size() == 1);
          REQUIRE(same_point(split.sing[0],
                             PPoint(K, {K.zero(), K.zero(), s, K.one()})));
        }
      }
    }
  }
}

TEST_CASE("elliptic fixtures: singular members, labels, and valencies",
          "[line_analysis]") {
  const FieldCtx& F = field(1);
  const FieldCtx& F9 = field(2);

  SECTION("degree 2, valency 14: seven triangles around one singular point") {
    Surface S = make_surface(P(kDeg2V14, F));
    REQUIRE_FALSE(S.smooth());
    auto exact = lines_on_surface_exact(S);
    REQUIRE(exact.closure_complete());
    LineProfile prof = line_profile(S, std_line(F), &exact);
    REQUIRE(prof.degree == 2);
    REQUIRE(prof.separable);
    REQUIRE(prof.sing_count == 1);
    REQUIRE(prof.second_kind);
    REQUIRE(ramification_profile_name(prof.ramification) == "2_1^2");
    REQUIRE(prof.fibration == Fibration::Elliptic);
    REQUIRE(prof.p == 7);
    REQUIRE(prof.q == 0);
    REQUIRE(prof.valency == 14);
    REQUIRE(prof.valency_complete);
    REQUIRE(prof.valency_geometric.has_value());
    REQUIRE(*prof.valency_geometric == 14);
    REQUIRE(prof.fibers.size() == 8);
    int triangles = 0, cusps = 0;
    for (auto& fb : prof.fibers) {
      if (fb.splitting == CubicKind::ThreeLinesTriangle) {
        ++triangles;
        REQUIRE(fb.local_valency == 2);
        REQUIRE(fb.config_label == "A1");
      } else {
        REQUIRE(fb.splitting == CubicKind::CuspidalIrreducible);
        ++cusps;
        REQUIRE(fb.local_valency == 0);
      }
    }
    REQUIRE(triangles == 7);
    REQUIRE(cusps == 1);
    REQUIRE(audit_bounds(prof).all_ok);
  }

  SECTION("degree 3, valency 21, ramification 2_1 3_3") {
    Surface S = make_surface(P(kSep21a, F));
    LineProfile prof = line_profile(S, std_line(F));
    REQUIRE(prof.degree == 3);
    REQUIRE(prof.separable);
    REQUIRE(prof.sing_count == 0);
    REQUIRE(prof.second_kind);
    REQUIRE(ramification_profile_name(prof.ramification) == "2_1 3_3");
    REQUIRE(prof.fibration == Fibration::Elliptic);
    REQUIRE(prof.valency == 21);
    REQUIRE(prof.valency_complete);
    REQUIRE(audit_bounds(prof).all_ok);

    // The wildly ramified point of index 2 sits on the plane x1 = 0, whose
    // residual cubic is an irreducible cuspidal cubic with its cusp there.
    LineChart C = normalize_to_standard(S, std_line(F));
    auto split = split_ternary_cubic(C.residual_cubic_inf(), {0, 2, 3});
    REQUIRE(split.kind == CubicKind::CuspidalIrreducible);
    REQUIRE(split.sing.size() == 1);
    REQUIRE(same_point(split.sing[0], pt(F, 0, 0, 1, 0)));
    bool found_inf = false;
    for (auto& fb : prof.fibers)
      if (fb.at_infinity) {
        found_inf = true;
        REQUIRE(fb.splitting == CubicKind::CuspidalIrreducible);
        REQUIRE(fb.local_valency == 0);
      }
    REQUIRE(found_inf);
  }

  SECTION("degree 3, valency 21, ramification 3_4, GF(9) coefficients") {
    Surface S = make_surface(P(kSep21b, F9));
    LineProfile prof = line_profile(S, std_line(F9));
    REQUIRE(prof.degree == 3);
    REQUIRE(prof.separable);
    REQUIRE(prof.second_kind);
    REQUIRE(ramification_profile_name(prof.ramification) == "3_4");
    REQUIRE(prof.fibration == Fibration::Elliptic);
    REQUIRE(prof.valency == 21);
    REQUIRE(prof.valency_complete);
    REQUIRE(audit_bounds(prof).all_ok);
  }
}

TEST_CASE("quasi-elliptic fixtures: reducible members and valencies",
          "[line_analysis]") {
  const FieldCtx& F = field(1);
  const FieldCtx& F9 = field(2);

  SECTION("Fermat line: ten concurrent triples, valency 30") {
    Surface S = make_surface(P(kFermat, F));
    REQUIRE(S.smooth());
    auto exact = lines_on_surface_exact(S);
    REQUIRE(exact.closure_complete());
    REQUIRE(exact.lines.size() == 112);
    Fe z = F9.add(F9.one(), gen(F9));
    PLine fl(F9, {z, F9.zero(), F9.one(), F9.zero()},
             {F9.zero(), z, F9.zero(), F9.one()});
    LineProfile prof = line_profile(S, fl, &exact);
    REQUIRE(prof.degree == 3);
    REQUIRE_FALSE(prof.separable);
    REQUIRE(prof.sing_count == 0);
    REQUIRE(prof.cuspidal);
    REQUIRE(prof.family_c);
    REQUIRE(prof.fibration == Fibration::QuasiElliptic);
    REQUIRE(prof.fibers.size() == 10);
    for (auto& fb : prof.fibers) {
      REQUIRE(fb.splitting == CubicKind::ThreeLinesConcurrent);
      REQUIRE(fb.local_valency == 3);
      REQUIRE(fb.config_label == "IV_3");
    }
    REQUIRE(prof.p == 10);
    REQUIRE(prof.q == 0);
    REQUIRE(prof.valency == 30);
    REQUIRE(prof.valency_complete);
    REQUIRE(prof.valency_geometric.has_value());
    REQUIRE(*prof.valency_geometric == 30);
    AuditReport audit = audit_bounds(prof);
    REQUIRE(audit.all_ok);
    // Both caps are attained: 10 reducible members, valency 30.
    REQUIRE(prof.p + prof.q == 10);
  }

  SECTION("separable quasi-elliptic line of valency 21") {
    Surface S = make_surface(P(kQeSep21, F));
    REQUIRE_FALSE(S.smooth());
    auto exact = lines_on_surface_exact(S);
    REQUIRE(exact.closure_complete());
    LineProfile prof = line_profile(S, std_line(F), &exact);
    REQUIRE(prof.degree == 3);
    REQUIRE(prof.separable);
    REQUIRE(prof.sing_count == 0);
    REQUIRE_FALSE(prof.cuspidal);
    REQUIRE(prof.fibration == Fibration::QuasiElliptic);
    REQUIRE(ramification_profile_name(prof.ramification) == "3_4");
    REQUIRE(prof.valency == 21);
    REQUIRE(prof.valency_complete);
    REQUIRE(prof.valency_geometric.has_value());
    REQUIRE(*prof.valency_geometric == 21);
    REQUIRE(audit_bounds(prof).all_ok);
  }

  SECTION("quasi-elliptic degree 2 line of valency 14") {
    Surface S = make_surface(P(kQeDeg2V14, F));
    REQUIRE_FALSE(S.smooth());
    auto exact = lines_on_surface_exact(S);
    REQUIRE(exact.closure_complete());
    LineProfile prof = line_profile(S, std_line(F), &exact);
    REQUIRE(prof.degree == 2);
    REQUIRE(prof.sing_count == 1);
    REQUIRE(prof.fibration == Fibration::QuasiElliptic);
    REQUIRE(prof.fibers.size() == 7);
    for (auto& fb : prof.fibers) {
      REQUIRE(fb.splitting == CubicKind::ThreeLinesConcurrent);
      REQUIRE(fb.local_valency == 2);
    }
    REQUIRE(prof.p == 7);
    REQUIRE(prof.q == 0);
    REQUIRE(prof.valency == 14);
    REQUIRE(prof.valency_complete);
    REQUIRE(prof.valency_geometric.has_value());
    REQUIRE(*prof.valency_geometric == 14);
    REQUIRE(audit_bounds(prof).all_ok);
  }

  SECTION("cuspidal family member") {
    Surface S = make_surface(P(kCuspFamily, F));
    LineProfile prof = line_profile(S, std_line(F));
    REQUIRE(prof.cuspidal);
    REQUIRE(prof.family_c);
    REQUIRE(prof.fibration == Fibration::QuasiElliptic);
    REQUIRE(prof.sing_count == 0);
    REQUIRE(prof.valency_complete);
    REQUIRE(audit_bounds(prof).all_ok);
  }

  SECTION("monomial obstruction: exactly one reducible member") {
    Surface S = make_surface(P(kTwoInsep, F));
    PLine l2(F, {F.zero(), F.one(), F.one(), F.zero()},
             {F.zero(), F.zero(), F.zero(), F.one()});
    auto exact = lines_on_surface_exact(S);
    LineProfile prof = line_profile(S, l2, &exact);
    REQUIRE(prof.degree == 3);
    REQUIRE_FALSE(prof.separable);
    REQUIRE_FALSE(prof.cuspidal);
    REQUIRE(prof.fibration == Fibration::QuasiElliptic);
    REQUIRE(prof.fibers.size() == 1);
    REQUIRE_FALSE(prof.fibers[0].at_infinity);
    REQUIRE(prof.fibers[0].t_field == 1);
    REQUIRE(prof.fibers[0].t.is_zero());
    REQUIRE(prof.fibers[0].splitting == CubicKind::ThreeLinesConcurrent);
    REQUIRE(prof.fibers[0].local_valency == 3);
    REQUIRE(prof.fibers[0].config_label == "IV_3");
    REQUIRE(prof.valency == 3);
    REQUIRE(prof.valency_complete);
    if (exact.closure_complete()) {
      REQUIRE(prof.valency_geometric.has_value());
      REQUIRE(*prof.valency_geometric == 3);
    }
    REQUIRE(audit_bounds(prof).all_ok);
  }
}

TEST_CASE("polynomial determinants and parameterized resultants",
          "[line_analysis]") {
  const FieldCtx& K = field(2);
  Rng rng(0xBADC0DE5);

  SECTION("fraction-free determinant over the polynomial ring") {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<std::vector<UPoly>> m(3, std::vector<UPoly>(3, up_zero(K)));
      for (auto& row : m)
        for (auto& e : row) {
          std::vector<Fe> c{rnd_fe(K, rng), rnd_fe(K, rng), rnd_fe(K, rng)};
          e = UPoly(K, c);
        }
      UPoly det = line_detail::up_mat_det(m, K);
      for (int i = 0; i < 4; ++i) {
        Fe x = rnd_fe(K, rng);
        auto ev = [&](int r, int c) { return up_eval(m[r][c], x); };
        Fe scalar = K.zero();
        scalar = K.add(scalar, K.mul(ev(0, 0), K.sub(K.mul(ev(1, 1), ev(2, 2)),
                                                     K.mul(ev(1, 2), ev(2, 1)))));
        scalar = K.sub(scalar, K.mul(ev(0, 1), K.sub(K.mul(ev(1, 0), ev(2, 2)),
                                                     K.mul(ev(1, 2), ev(2, 0)))));
        scalar = K.add(scalar, K.mul(ev(0, 2), K.sub(K.mul(ev(1, 0), ev(2, 1)),
                                                     K.mul(ev(1, 1), ev(2, 0)))));
        REQUIRE(up_eval(det, x) == scalar);
      }
    }
  }

  SECTION("the parameterized resultant vanishes exactly at shared roots") {
    for (int trial = 0; trial < 4; ++trial) {
      MPoly A(K), B(K);
      for (int i = 0; i <= 2; ++i)
        for (int e = 0; e <= 2; ++e) {
          Fe c = rnd_fe(K, rng);
          if (!c.is_zero()) A.add_term({e, i, 2 - i, 0}, c);
        }
      for (int i = 0; i <= 3; ++i)
        for (int e = 0; e <= 2; ++e) {
          Fe c = rnd_fe(K, rng);
          if (!c.is_zero()) B.add_term({e, i, 3 - i, 0}, c);
        }
      if (A.t.empty() || B.t.empty()) continue;
      UPoly psi = line_detail::binform_param_resultant(A, B, 1, 2, 2, 3, K);
      int checked = 0;
      for (int i = 0; i < 20; ++i) {
        Fe s0 = rnd_fe(K, rng);
        BForm A0(K, 2), B0(K, 3);
        for (auto& [key, c] : A.t) {
          Mono m = mono_unkey(key);
          A0.c[m[1]] = K.add(A0.c[m[1]], K.mul(c, K.pow(s0, m[0])));
        }
        for (auto& [key, c] : B.t) {
          Mono m = mono_unkey(key);
          B0.c[m[1]] = K.add(B0.c[m[1]], K.mul(c, K.pow(s0, m[0])));
        }
        if (A0.is_zero() || B0.is_zero()) continue;
        bool share = bf_gcd(A0, B0).d > 0;
        REQUIRE(up_eval(psi, s0).is_zero() == share);
        ++checked;
      }
      REQUIRE(checked > 0);
    }
  }

  SECTION("power series inversion and Taylor shifts") {
    constexpr int prec = 12;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Fe> c(9, K.zero());
      c[0] = K.one();
      for (int i = 1; i < 9; ++i) c[i] = rnd_fe(K, rng);
      UPoly a(K, c);
      UPoly prod = line_detail::ps_mul(a, line_detail::ps_inv(a, prec), prec);
      REQUIRE(prod == up_const(K, K.one()));

      std::vector<Fe> pc(7);
      for (auto& e : pc) e = rnd_fe(K, rng);
      UPoly p(K, pc);
      Fe shift = rnd_fe(K, rng), x = rnd_fe(K, rng);
      REQUIRE(up_eval(line_detail::up_taylor_shift(p, shift), x) ==
              up_eval(p, K.add(x, shift)));
    }
  }
}

TEST_CASE("bound audit machinery", "[line_analysis]") {
  LineProfile prof;
  prof.degree = 1;
  prof.valency = 5;  // exceeds degree*p + q = 0
  AuditReport audit = audit_bounds(prof);
  REQUIRE_FALSE(audit.all_ok);
  bool found = false;
  for (auto& c : audit.checks)
    if (!c.ok) {
      found = true;
      REQUIRE(c.value == 5);
    }
  REQUIRE(found);

  prof.valency_complete = false;
  REQUIRE_THROWS_AS(audit_bounds(prof), IncompleteProfile);
}
