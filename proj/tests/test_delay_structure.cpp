#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "reldiff/delay_structure.hpp"
#include "support/fixtures.hpp"
#include "support/random_instances.hpp"

using namespace reldiff;
using reldiff::testing::imat;

namespace {

DelayVector integers(std::initializer_list<std::int64_t> values) {
  IntMatrix m(values.size(), 1);
  std::size_t j = 0;
  for (auto v : values) m(j++, 0) = v;
  return DelayVector(DelayBasis({BasisValue::rational(1)}), std::move(m));
}

std::vector<ClassKey> keys(const ClassEnumeration& e) {
  std::vector<ClassKey> out;
  for (const auto& c : e.classes) out.push_back(c.key);
  return out;
}

}  // namespace

TEST(DelayVector, ValidatesMatrix) {
  const DelayVector a = integers({1, 2});
  EXPECT_DOUBLE_EQ(a.delay_value(1), 2.0);
  const DelayVector b = reldiff::testing::delays_one_sqrt2();
  EXPECT_NEAR(b.delay_value(1), 1.41421356, 1e-8);

  const DelayBasis basis({BasisValue::rational(1), BasisValue::real(std::numbers::sqrt2)});
  try {
    make_delay_vector(basis, imat({{1, 0}, {2, 0}}));
    FAIL() << "expected RankDeficientBasis";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::rank_deficient_basis);
  }
  try {
    make_delay_vector(basis, imat({{1, 0}, {0, 0}}));
    FAIL() << "expected ZeroDelay";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::zero_delay);
  }
  try {
    DelayBasis({BasisValue::real(-1.0)});
    FAIL() << "expected NonPositiveBasis";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::non_positive_basis);
  }
  EXPECT_THROW(make_delay_vector(DelayBasis({BasisValue::rational(1)}), imat({{-1}})), Error);
  EXPECT_THROW(LatticePoint({1, -1}), Error);
}

TEST(DelayVector, NormalizesRationalCombinations) {
  // (1, 1/2) given over the basis (1, 1/2) collapses onto the single generator 1/2.
  Matrix<Rational> m(2, 2);
  m(0, 0) = 1;
  m(1, 1) = 1;
  const DelayVector v = normalize_delays({BasisValue::rational(1), BasisValue::rational(Rational(1, 2))}, m);
  ASSERT_EQ(v.basis_size(), 1u);
  EXPECT_EQ(*v.basis()[0].exact, Rational(1, 2));
  EXPECT_EQ(v.matrix(), imat({{2}, {1}}));

  // Rational multiples of an irrational element: denominators move into the basis.
  Matrix<Rational> w(2, 1);
  w(0, 0) = Rational(1, 2);
  w(1, 0) = Rational(1, 3);
  const DelayVector u = normalize_delays({BasisValue::real(std::numbers::sqrt2)}, w);
  EXPECT_NEAR(u.basis()[0].numeric, std::numbers::sqrt2 / 6, 1e-15);
  EXPECT_EQ(u.matrix(), imat({{3}, {2}}));
  EXPECT_NEAR(u.delay_value(0), std::numbers::sqrt2 / 2, 1e-15);
}

TEST(ClassKey, SpecExamples) {
  const DelayVector half = reldiff::testing::delays_one_half();
  EXPECT_EQ(class_key(half, LatticePoint({1, 0})).c, IntVector{2});
  EXPECT_EQ(class_key(half, LatticePoint({0, 2})).c, IntVector{2});
  EXPECT_EQ(class_key(half, LatticePoint({0, 0})).c, IntVector{0});
  const DelayVector root = reldiff::testing::delays_one_sqrt2();
  EXPECT_NE(class_key(root, LatticePoint({1, 0})), class_key(root, LatticePoint({0, 1})));
}

TEST(TimeOf, SpecExamples) {
  EXPECT_DOUBLE_EQ(time_of(integers({1, 2}), LatticePoint({3, 1})).numeric, 5.0);
  EXPECT_NEAR(time_of(reldiff::testing::delays_one_sqrt2(), LatticePoint({1, 2})).numeric, 3.8284271247, 1e-9);
  EXPECT_DOUBLE_EQ(time_of(integers({1, 2}), LatticePoint({0, 0})).numeric, 0.0);
}

TEST(EnumerateClasses, SpecExamples) {
  const DelayVector half = reldiff::testing::delays_one_half();
  const auto e = enumerate_classes(half, RealTime::from_rational(1), false);
  EXPECT_EQ(keys(e), (std::vector<ClassKey>{{{0}}, {{1}}, {{2}}}));
  EXPECT_FALSE(e.has_ambiguity());

  const DelayVector root = reldiff::testing::delays_one_sqrt2();
  const auto r = enumerate_classes(root, RealTime::from_rational(1), false);
  EXPECT_EQ(keys(r), (std::vector<ClassKey>{{{0, 0}}, {{1, 0}}}));

  const auto z = enumerate_classes(root, RealTime::from_rational(0), false);
  EXPECT_EQ(keys(z), (std::vector<ClassKey>{{{0, 0}}}));

  // Strict bound drops the class sitting exactly at T.
  const auto s = enumerate_classes(half, RealTime::from_rational(1), true);
  EXPECT_EQ(keys(s), (std::vector<ClassKey>{{{0}}, {{1}}}));
}

TEST(EnumerateClasses, FlagsNumericBoundaryHits) {
  const DelayVector root = reldiff::testing::delays_one_sqrt2();
  const auto e = enumerate_classes(root, RealTime{std::numbers::sqrt2 + 1e-12, std::nullopt}, false);
  ASSERT_TRUE(e.has_ambiguity());
  EXPECT_EQ(e.ambiguous.front().coeffs, (IntVector{0, 1}));
  // Comparison against an exact stamp is never ambiguous.
  const auto f = enumerate_classes(root, root.delay(1), true);
  EXPECT_FALSE(f.has_ambiguity());
  EXPECT_EQ(keys(f), (std::vector<ClassKey>{{{0, 0}}, {{1, 0}}}));
}

TEST(EnumerateClasses, MatchesBruteForceOnRandomDelays) {
  reldiff::testing::Random rng(3);
  for (int trial = 0; trial < 150; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 3));
    const DelayVector delays = reldiff::testing::random_mixed_delays(rng, n);
    const Rational t(rng.integer(0, 40), 7);
    const bool strict = rng.chance(0.3);
    const auto e = enumerate_classes(delays, RealTime::from_rational(t), strict);
    const auto brute = reldiff::testing::brute_classes(delays, t, strict);
    ASSERT_EQ(e.classes.size(), brute.size());
    for (std::size_t i = 0; i < e.classes.size(); ++i) {
      ASSERT_TRUE(brute.count(e.classes[i].key));
      EXPECT_EQ(class_key(delays, e.classes[i].representative), e.classes[i].key);
      if (i > 0) EXPECT_LT(e.classes[i - 1].time.numeric, e.classes[i].time.numeric + 1e-12);
    }
  }
}

TEST(ClassKey, ConsistentWithTimes) {
  reldiff::testing::Random rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const DelayVector delays = reldiff::testing::random_commensurable_delays(rng, 3);
    const LatticePoint a({rng.integer(0, 4), rng.integer(0, 4), rng.integer(0, 4)});
    const LatticePoint b({rng.integer(0, 4), rng.integer(0, 4), rng.integer(0, 4)});
    const auto ta = delays.exact_time(time_of(delays, a));
    const auto tb = delays.exact_time(time_of(delays, b));
    EXPECT_EQ(class_key(delays, a) == class_key(delays, b), *ta == *tb);
  }
}

TEST(Preorder, SpecExamples) {
  const DelayVector root = reldiff::testing::delays_one_sqrt2();
  EXPECT_TRUE(preorder_leq(root, integers({1, 1})));
  EXPECT_TRUE(preorder_leq(root, reldiff::testing::delays_one_half()));
  EXPECT_FALSE(preorder_leq(reldiff::testing::delays_one_half(), integers({1, 1})));
  EXPECT_TRUE(preorder_leq(integers({2, 1}), integers({4, 2})));
  EXPECT_TRUE(preorder_leq(integers({4, 2}), integers({2, 1})));
  EXPECT_TRUE(preorder_equivalent(integers({2, 1}), integers({4, 2})));
  EXPECT_THROW(preorder_leq(integers({1}), integers({1, 2})), Error);
}

TEST(Preorder, ReflexiveAndTransitive) {
  reldiff::testing::Random rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3;
    const DelayVector a = reldiff::testing::random_mixed_delays(rng, n);
    const DelayVector b = reldiff::testing::random_mixed_delays(rng, n);
    const DelayVector c = reldiff::testing::random_mixed_delays(rng, n);
    EXPECT_TRUE(preorder_leq(a, a));
    if (preorder_leq(a, b) && preorder_leq(b, c)) EXPECT_TRUE(preorder_leq(a, c));
  }
}

TEST(Preorder, KernelOracle) {
  // Z(Lambda) is contained in Z(L) iff every small integer kernel vector of Lambda is one of L.
  reldiff::testing::Random rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const DelayVector a = reldiff::testing::random_commensurable_delays(rng, 2);
    const DelayVector b = reldiff::testing::random_commensurable_delays(rng, 2);
    bool contained = true;
    for (std::int64_t x = -6; x <= 6 && contained; ++x) {
      for (std::int64_t y = -6; y <= 6 && contained; ++y) {
        const Rational la = Rational(x) * *a.exact_delay(0) + Rational(y) * *a.exact_delay(1);
        const Rational lb = Rational(x) * *b.exact_delay(0) + Rational(y) * *b.exact_delay(1);
        if (sgn(la) == 0 && sgn(lb) != 0) contained = false;
      }
    }
    EXPECT_EQ(preorder_leq(a, b), contained);
  }
}

TEST(CommensurableApprox, SpecExamples) {
  const DelayVector root = reldiff::testing::delays_one_sqrt2();
  const DelayVector l10 = commensurable_approx(root, 10);
  EXPECT_EQ(*l10.exact_delay(0), Rational(1));
  EXPECT_EQ(*l10.exact_delay(1), make_rational(14, 10));
  const DelayVector l1 = commensurable_approx(root, 1);
  EXPECT_EQ(*l1.exact_delay(1), Rational(1));
  const DelayVector ints = integers({1, 3});
  const DelayVector same = commensurable_approx(ints, 1);
  EXPECT_EQ(*same.exact_delay(0), Rational(1));
  EXPECT_EQ(*same.exact_delay(1), Rational(3));
  const DelayVector small(DelayBasis({BasisValue::real(0.3)}), imat({{1}}));
  try {
    commensurable_approx(small, 2);
    FAIL() << "expected ApproxNotPositive";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::approx_not_positive);
  }
}

TEST(CommensurableApprox, BelowAndComparable) {
  reldiff::testing::Random rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const DelayVector delays = reldiff::testing::random_independent_delays(rng, 3, 2);
    for (std::int64_t n : {2, 5, 17, 100}) {
      const DelayVector l = commensurable_approx(delays, n);
      for (std::size_t j = 0; j < delays.size(); ++j) EXPECT_LE(l.delay_value(j), delays.delay_value(j) + 1e-12);
      EXPECT_TRUE(preorder_leq(delays, l));
    }
  }
}

TEST(Surrogate, PreservesClassPatternAndRatios) {
  const DelayVector root = reldiff::testing::delays_one_sqrt2();
  const auto s = commensurable_surrogate(root, RealTime::from_rational(3), 0.01);
  ASSERT_TRUE(s.delays.commensurable());
  for (std::size_t j = 0; j < 2; ++j) {
    const double ratio = root.delay_value(j) / s.delays.delay_value(j);
    EXPECT_GE(ratio, 1.0);
    EXPECT_LT(ratio, 1.01);
  }
  // Equality pattern on all points with Lambda.n <= 3.03.
  const auto pts = enumerate_lattice_points(root, RealTime::from_rational(Rational(303, 100)), false);
  for (std::size_t a = 0; a < pts.points.size(); ++a) {
    for (std::size_t b = 0; b < pts.points.size(); ++b) {
      const bool same_lambda = pts.keys[a] == pts.keys[b];
      const bool same_l = class_key(s.delays, pts.points[a]) == class_key(s.delays, pts.points[b]);
      EXPECT_EQ(same_lambda, same_l);
    }
  }
  EXPECT_EQ(commensurable_surrogate(integers({1, 2}), RealTime::from_rational(3), 0.1).n, 0);
  const auto zero = commensurable_surrogate(root, RealTime::from_rational(0), 0.5);
  EXPECT_LT(root.delay_value(1) / zero.delays.delay_value(1), 1.5);
  EXPECT_THROW(commensurable_surrogate(root, RealTime::from_rational(3), 0.01, 3), Error);
}

TEST(Epsilon0, SpecExamples) {
  EXPECT_EQ(*epsilon0(integers({1}), RealTime::parse("2.5")).exact, Rational(1, 2));
  EXPECT_EQ(*epsilon0(integers({1}), RealTime::from_rational(1)).exact, Rational(1));
  EXPECT_EQ(*epsilon0(reldiff::testing::delays_one_half(), RealTime::from_rational(1)).exact, Rational(1, 2));
}

TEST(Epsilon0, PositiveAndGapFree) {
  reldiff::testing::Random rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 3));
    const DelayVector delays = reldiff::testing::random_mixed_delays(rng, n);
    const Rational t(rng.integer(1, 30), 7);
    const RealTime e = epsilon0(delays, RealTime::from_rational(t));
    ASSERT_GT(e.value, 0.0);
    const auto wide = reldiff::testing::brute_classes(delays, t + Rational(3) * Rational(static_cast<long>(std::ceil(delays.max_delay()))));
    for (const auto& [key, members] : wide) {
      const double time = delays.time_of(key).numeric;
      // No class time strictly inside (T, T + eps0).
      EXPECT_FALSE(time > to_double(t) + 1e-12 && time < to_double(t) + e.value - 1e-12);
    }
  }
}
