#include <rw/construct.hpp>
#include <rw/verify.hpp>

#include <gtest/gtest.h>

#include <set>

#include "gen.hpp"

using namespace rw;

namespace {

FiniteAbelianGroup G(const char* s) { return FiniteAbelianGroup::parse(s); }

// [[-E, F], [F, -E]] over the integers.
IntMatrix pair_matrix(const IntMatrix& f) {
  const std::size_t d = f.dim();
  IntMatrix out(2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    out(i, i) = -1;
    out(d + i, d + i) = -1;
    for (std::size_t j = 0; j < d; ++j) {
      out(i, d + j) = f(i, j);
      out(d + i, j) = f(i, j);
    }
  }
  return out;
}

// Cyclic permutation of the coordinates of Z^L: orbit of e_1 has length L.
IntMatrix cycle_matrix(std::size_t len) {
  IntMatrix m(len);
  for (std::size_t i = 0; i < len; ++i) m((i + 1) % len, i) = 1;
  return m;
}

bool equivalent(const IntMatrix& m, const ZkVector& a, const ZkVector& b) {
  return solve_integer_system(IntMatrix::identity(m.dim()) - m, a - b).has_value();
}

}  // namespace

TEST(Verify, ReidemeisterZk) {
  EXPECT_EQ(reidemeister_zk(-IntMatrix::identity(4)), ExtNat(16));
  EXPECT_EQ(reidemeister_zk(direct_sum(companion_cyclotomic_5(), 2)), ExtNat(25));
  EXPECT_TRUE(reidemeister_zk(IntMatrix::identity(3)).is_infinite());
}

TEST(Verify, CosetRepresentatives) {
  EXPECT_EQ(coset_representatives(IntMatrix{{-1}}), (std::vector<ZkVector>{{0}, {1}}));
  EXPECT_EQ(coset_representatives(rotation_order_3()).size(), 3u);
  EXPECT_EQ(coset_representatives(companion_cyclotomic_5()).size(), 5u);
  EXPECT_THROW(coset_representatives(IntMatrix::identity(2)), PreconditionError);

  std::mt19937_64 rng(2);
  std::vector<IntMatrix> ms{-IntMatrix::identity(3), rotation_order_3(), companion_cyclotomic_5(),
                            direct_sum(rotation_order_3(), 2), IntMatrix{{0, -1}, {1, 0}}, IntMatrix{{1, -1}, {1, 0}}};
  for (int t = 0; t < 30; ++t) {
    IntMatrix a = rwtest::random_int_matrix(rng, 2, -3, 3);
    if (determinant(IntMatrix::identity(2) - a) != 0) ms.push_back(a);
  }
  for (const auto& m : ms) {
    auto reps = coset_representatives(m);
    ASSERT_EQ(ExtNat(static_cast<long long>(reps.size())), reidemeister_zk(m)) << format_matrix(m);
    for (std::size_t i = 0; i < reps.size(); ++i)
      for (std::size_t j = i + 1; j < reps.size(); ++j) EXPECT_FALSE(equivalent(m, reps[i], reps[j]));
    for (int s = 0; s < 20; ++s) {
      ZkVector v = random_vector(m.dim(), 20, rng);
      int hits = 0;
      for (const auto& r : reps) hits += equivalent(m, v, r) ? 1 : 0;
      EXPECT_EQ(hits, 1);
    }
  }
}

// The explicit inverses printed for the Case 1 pair blocks.
TEST(Verify, GoldenPairInverses) {
  IntMatrix f2{{0, 1}, {1, 1}};
  IntMatrix f3{{0, 0, 1}, {0, 1, 1}, {1, 1, 1}};
  IntMatrix inv4{{-1, 1, 1, 0}, {1, 0, 0, 1}, {1, 0, -1, 1}, {0, 1, 1, 0}};
  IntMatrix inv6{{-2, 0, 1, 1, 1, -1}, {0, -1, 1, 1, 0, 0}, {1, 1, -1, -1, 0, 1},
                 {1, 1, -1, -2, 0, 1},  {1, 0, 0, 0, -1, 1}, {-1, 0, 1, 1, 1, -1}};
  EXPECT_EQ(inv4 * pair_matrix(f2), IntMatrix::identity(4));
  EXPECT_EQ(pair_matrix(f2) * inv4, IntMatrix::identity(4));
  EXPECT_EQ(inv6 * pair_matrix(f3), IntMatrix::identity(6));
  EXPECT_EQ(pair_matrix(f3) * inv6, IntMatrix::identity(6));
}

TEST(Verify, OrbitCheckExamples) {
  // Case 1 generic orbit, F_2 mod 2.
  auto f2 = GAutomorphism(G("2^1:2"), {f2_block(2)});
  auto o = orbit_epi_check(f2, IntMatrix{{-1}}, {0}, {1});
  EXPECT_EQ(o.length(), 2u);
  EXPECT_TRUE(o.epimorphic);
  EXPECT_EQ(o.evidence[0].det_assembled_mod_p, 1);
  // Case 1 exceptional orbit z = 2x, F_3 mod 2.
  auto f3 = GAutomorphism(G("2^1:3"), {f3_block(2)});
  o = orbit_epi_check(f3, IntMatrix{{-1}}, {2}, {1});
  EXPECT_EQ(o.length(), 1u);
  EXPECT_TRUE(o.epimorphic);
  EXPECT_EQ(o.evidence[0].det_power_mod_p, 1);
  // Case 3, L = 5, F_2 mod 2^i.
  for (std::int64_t q : {2, 4, 8}) {
    auto f = GAutomorphism(FiniteAbelianGroup({{2, static_cast<int>(prime_power_parts(q).second), 2}}), {f2_block(q)});
    o = orbit_epi_check(f, companion_cyclotomic_5(), {0, 0, 0, 0}, {1, 0, 0, 0});
    EXPECT_EQ(o.length(), 5u);
    EXPECT_TRUE(o.epimorphic);
  }
  // Identity fibers are never onto; the witness is fixed.
  auto id = GAutomorphism::identity(G("2^1:1"));
  o = orbit_epi_check(id, IntMatrix{{-1}}, {0}, {3});
  EXPECT_FALSE(o.epimorphic);
  ASSERT_TRUE(o.fixed_element.has_value());
  EXPECT_EQ(o.fixed_element->size(), 2u);
  // Non-closing orbit.
  EXPECT_THROW(orbit_epi_check(id, IntMatrix{{1}}, {1}, {0}, 50), PreconditionError);
}

// Route (a) and route (b) agree for L <= 6 and random F; the
// disagreement would raise InternalError inside orbit_epi_check.
TEST(Verify, AssembledAndReducedRoutesAgree) {
  std::mt19937_64 rng(14);
  const char* groups[] = {"2^1:2", "2^2:1", "3^1:2", "5^1:1", "2^1:1,3^1:1", "3^2:2", "7^1:1"};
  int failing = 0;
  for (std::size_t len = 1; len <= 6; ++len) {
    IntMatrix m = cycle_matrix(len);
    ZkVector x(len, 0);
    x[0] = 1;
    for (const char* gs : groups) {
      auto g = G(gs);
      for (int trial = 0; trial < 30; ++trial) {
        std::vector<ModMatrix> blocks;
        for (const auto& c : g.components()) blocks.push_back(rwtest::random_invertible(rng, c.d, c.q()));
        GAutomorphism f(g, blocks);
        OrbitCheck o;
        ASSERT_NO_THROW(o = orbit_epi_check(f, m, ZkVector(len, 0), x));
        ASSERT_EQ(o.length(), len);
        // soundness: onto iff F^L has no nonzero fixed point
        EXPECT_EQ(o.epimorphic, f.power(len).fixed_points().size() == 1u);
        if (!o.epimorphic) {
          ++failing;
          WreathProduct w(g, len);
          EXPECT_TRUE(is_fixed(w, WreathAutomorphism(f, m), *o.fixed_element));
        }
      }
    }
  }
  EXPECT_GT(failing, 0);
}

// Odd p, odd L: (p-1)^L - 1 = -2 mod p.
TEST(Verify, Case3ScalarCheck) {
  for (std::int64_t p = 3; p <= 100; ++p) {
    if (!is_prime(p)) continue;
    for (std::uint64_t len = 1; len <= 9; len += 2) {
      EXPECT_EQ(mod_reduce(pow_mod(p - 1, len, p) - 1, p), mod_reduce(-2, p));
      auto f = GAutomorphism(FiniteAbelianGroup({{p, 1, 1}}), {ModMatrix(p, {{p - 1}})});
      EXPECT_EQ(f.power(len).fixed_points().size(), 1u);
    }
  }
}

TEST(Verify, OrbitTypes) {
  // -E on Z: z even gives a fixed point, z odd does not.
  auto t = orbit_types(IntMatrix{{-1}}, {0}, 2);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].length, 1u);
  EXPECT_EQ(t[1].length, 2u);
  t = orbit_types(IntMatrix{{-1}}, {1}, 2);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].length, 2u);
  // M_4: only lengths 1 and 5
  t = orbit_types(companion_cyclotomic_5(), {0, 0, 0, 0}, 5);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[1].length, 5u);
  // mixed orders: -1 (+) rotation has lengths 1, 2, 3, 6
  IntMatrix mix = direct_sum(std::vector<IntMatrix>{IntMatrix{{-1}}, rotation_order_3()});
  t = orbit_types(mix, {0, 0, 0}, 6);
  std::vector<std::uint64_t> lens;
  for (const auto& o : t) {
    lens.push_back(o.length);
    EXPECT_EQ(affine_orbit(mix, {0, 0, 0}, o.witness, 100).length(), o.length);
  }
  EXPECT_EQ(lens, (std::vector<std::uint64_t>{1, 2, 3, 6}));
}

TEST(Verify, FullVerifyExamples) {
  EXPECT_EQ(full_verify(build_case1(G("5^1:1,3^1:2"), 2)).r_total, ExtNat(4));
  EXPECT_EQ(full_verify(build_case2(G("7^1:1"), 2)).r_total, ExtNat(3));
  EXPECT_EQ(full_verify(build_case3(G("2^2:2"), 4)).r_total, ExtNat(5));
  auto rep = full_verify(build_case1(G("5^1:1"), 1));
  EXPECT_EQ(rep.representatives.size(), 2u);
  for (const auto& rc : rep.per_rep) EXPECT_EQ(rc.verdict, Verdict::TrivialClasses);
}

TEST(Verify, FullVerifyMatchesPrediction) {
  struct Inst {
    const char* g;
    std::size_t k;
    CaseTag tag;
  };
  const Inst insts[] = {{"2^2:2,3^1:3,5^1:1", 1, CaseTag::Case1}, {"2^2:2,3^1:3,5^1:1", 2, CaseTag::Case1},
                        {"2^2:2,3^1:3,5^1:1", 3, CaseTag::Case1}, {"3^2:1,7^1:1", 2, CaseTag::Case2},
                        {"3^2:1,7^1:1", 4, CaseTag::Case2},       {"2^1:2,3^1:1", 4, CaseTag::Case3},
                        {"2^1:2,3^1:1", 8, CaseTag::Case3},       {"2^1:3,13^1:2", 4, CaseTag::Case3}};
  for (const auto& i : insts) {
    auto c = build_case(G(i.g), i.k, i.tag);
    auto rep = full_verify(c);
    EXPECT_EQ(rep.r_total, c.predicted_R) << i.g << " k=" << i.k;
    EXPECT_EQ(ExtNat(static_cast<long long>(rep.representatives.size())), rep.r_bar);
  }
}

TEST(Verify, FullVerifyInfiniteBranches) {
  auto g = G("2^1:1");
  auto rep = full_verify(WreathAutomorphism::identity(g, 2));
  EXPECT_TRUE(rep.r_bar.is_infinite());
  EXPECT_TRUE(rep.r_total.is_infinite());
  rep = full_verify(WreathAutomorphism(GAutomorphism::identity(g), IntMatrix{{-1}}));
  EXPECT_EQ(rep.r_bar, ExtNat(2));
  EXPECT_TRUE(rep.r_total.is_infinite());
}

TEST(Verify, ClassifySigmaOnConstructions) {
  const std::pair<const char*, std::size_t> c1[] = {{"5^1:1", 1}, {"2^1:2,3^1:2", 3}, {"3^1:5", 2}};
  for (auto [g, k] : c1) {
    auto phi = build_case1(G(g), k).automorphism;
    EXPECT_EQ(classify_sigma_reidemeister(phi).kind, SigmaClassification::Kind::One);
    // every twist representative is also onto
    for (const auto& z : coset_representatives(phi.M()))
      EXPECT_EQ(classify_sigma_reidemeister(phi.with_twist(z)).kind, SigmaClassification::Kind::One);
  }
  EXPECT_EQ(classify_sigma_reidemeister(build_case2(G("7^1:1"), 2).automorphism).kind,
            SigmaClassification::Kind::One);
  EXPECT_EQ(classify_sigma_reidemeister(build_case3(G("2^1:3"), 4).automorphism).kind,
            SigmaClassification::Kind::One);
}

TEST(Verify, ClassifySigmaPlantedFailures) {
  WreathAutomorphism a(GAutomorphism::identity(G("2^1:1")), IntMatrix{{-1}});
  auto r = classify_sigma_reidemeister(a);
  ASSERT_EQ(r.kind, SigmaClassification::Kind::Infinite);
  WreathProduct w1(G("2^1:1"), 1);
  EXPECT_TRUE(is_fixed(w1, a, *r.witness));

  WreathAutomorphism b(GAutomorphism(G("3^1:1"), {ModMatrix(3, {{2}})}), IntMatrix{{-1}});
  r = classify_sigma_reidemeister(b);
  ASSERT_EQ(r.kind, SigmaClassification::Kind::Infinite);
  WreathProduct w3(G("3^1:1"), 1);
  EXPECT_TRUE(is_fixed(w3, b, *r.witness));
  EXPECT_EQ(r.witness->size(), 2u);

  WreathAutomorphism rejected(GAutomorphism(G("3^1:1"), {ModMatrix(3, {{2}})}), IntMatrix{{1}});
  EXPECT_THROW(classify_sigma_reidemeister(rejected), PreconditionError);
  WreathAutomorphism shear(GAutomorphism::identity(G("2^1:1")), IntMatrix{{1, 1}, {0, 1}});
  EXPECT_THROW(classify_sigma_reidemeister(shear), PreconditionError);
}

// Planted-failure family: F = id, M = -E for many groups and ranks.
TEST(Verify, ClassifySigmaPlantedFamily) {
  const char* groups[] = {"2^1:1", "3^1:2", "5^2:1", "2^1:1,7^1:1"};
  for (const char* gs : groups)
    for (std::size_t k = 1; k <= 4; ++k) {
      WreathAutomorphism phi(GAutomorphism::identity(G(gs)), -IntMatrix::identity(k));
      auto r = classify_sigma_reidemeister(phi);
      ASSERT_EQ(r.kind, SigmaClassification::Kind::Infinite);
      WreathProduct w(G(gs), k);
      EXPECT_TRUE(is_fixed(w, phi, *r.witness));
      EXPECT_FALSE(r.witness->empty());
    }
}

TEST(Verify, GenerateFixedElements) {
  WreathAutomorphism phi(GAutomorphism::identity(G("2^1:1")), IntMatrix{{-1}});
  WreathProduct w(G("2^1:1"), 1);
  Support sigma0 = w.point_support(GElement{{1}}, {0});
  auto one = generate_fixed_elements(phi, sigma0, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], sigma0);

  auto many = generate_fixed_elements(phi, sigma0, 100);
  ASSERT_EQ(many.size(), 100u);
  std::set<Support> distinct(many.begin(), many.end());
  EXPECT_EQ(distinct.size(), 100u);
  for (const auto& s : many) {
    EXPECT_FALSE(s.empty());
    EXPECT_TRUE(is_fixed(w, phi, s));
  }
  EXPECT_EQ(many[1].size(), 2u);  // a_{n} + a_{-n}

  EXPECT_THROW(generate_fixed_elements(phi, Support{}, 3), PreconditionError);
  WreathAutomorphism neg(GAutomorphism(G("3^1:1"), {ModMatrix(3, {{2}})}), IntMatrix{{-1}});
  WreathProduct w3(G("3^1:1"), 1);
  EXPECT_THROW(generate_fixed_elements(neg, w3.point_support(GElement{{1}}, {0}), 3), PreconditionError);
}

TEST(Verify, GenerateFixedElementsFromWitnesses) {
  const std::pair<const char*, std::size_t> cases[] = {{"3^1:2", 2}, {"5^1:1", 3}, {"2^1:1,3^1:1", 4}};
  for (auto [gs, k] : cases) {
    WreathAutomorphism phi(GAutomorphism::identity(G(gs)), -IntMatrix::identity(k));
    auto r = classify_sigma_reidemeister(phi);
    ASSERT_TRUE(r.witness.has_value());
    auto elems = generate_fixed_elements(phi, *r.witness, 100);
    std::set<Support> distinct(elems.begin(), elems.end());
    EXPECT_EQ(distinct.size(), 100u);
    WreathProduct w(G(gs), k);
    for (const auto& s : elems) EXPECT_TRUE(is_fixed(w, phi, s));
  }
}
