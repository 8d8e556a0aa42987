#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "qpurify/combinatorics.hpp"

using namespace qpurify;

TEST(MultisetDim, KnownValues) {
  EXPECT_EQ(multiset_dim({2, 3}), 6);
  EXPECT_EQ(multiset_dim({4, 5}), 70);
  EXPECT_EQ(multiset_dim({0, 7}), 1);
  EXPECT_NEAR(log2_multiset_dim({4, 5}), std::log2(70.0), 1e-14);
}

TEST(MultisetDim, ExactWhereDoublesOverflow) {
  const BigInt d = multiset_dim({600, 600});
  EXPECT_GT(boost::multiprecision::msb(d), 1100u);
  const double exact = log2_multiset_dim({600, 600});
  const double lgam = log2_multiset_dim({600, 600}, 0);
  EXPECT_NEAR(exact, lgam, 1e-9 * exact);
}

TEST(CodeParams, RejectsZeroRails) { EXPECT_THROW(CodeParams(1, 0), std::invalid_argument); }

TEST(Codewords, SmallCases) {
  EXPECT_EQ(enumerate_codewords({1, 2}), (std::vector<Occupation>{{1, 0}, {0, 1}}));
  EXPECT_EQ(enumerate_codewords({3, 1}), (std::vector<Occupation>{{3}}));
  const auto w = enumerate_codewords({2, 3});
  const std::vector<Occupation> expected{{2, 0, 0}, {1, 1, 0}, {1, 0, 1},
                                         {0, 2, 0}, {0, 1, 1}, {0, 0, 2}};
  EXPECT_EQ(w, expected);
}

TEST(Codewords, LexicographicIsReverse) {
  auto a = enumerate_codewords({3, 4});
  auto b = enumerate_codewords({3, 4}, kEnumerationCap, CodewordOrder::lexicographic);
  std::reverse(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(Codewords, CapIsEnforced) {
  EXPECT_THROW(enumerate_codewords({10, 10}, 1000), SizeError);
}

TEST(Codewords, PropertyCountDistinctSums) {
  for (unsigned k = 0; k <= 8; ++k) {
    for (unsigned m = 1; m <= 8; ++m) {
      const CodeParams p{k, m};
      if (multiset_dim(p) > 10000) continue;
      const auto words = enumerate_codewords(p);
      EXPECT_EQ(BigInt(words.size()), multiset_dim(p));
      std::set<Occupation> uniq(words.begin(), words.end());
      EXPECT_EQ(uniq.size(), words.size());
      for (const auto& n : words) {
        ASSERT_EQ(n.size(), m);
        unsigned s = 0;
        for (unsigned x : n) s += x;
        EXPECT_EQ(s, k);
      }
      EXPECT_TRUE(std::is_sorted(words.rbegin(), words.rend()));
    }
  }
}

TEST(HeraldAlice, Values) {
  EXPECT_DOUBLE_EQ(herald_prob_alice({0, 3}, SqueezingSpec(0.0)), 1.0);
  EXPECT_DOUBLE_EQ(herald_prob_alice({2, 3}, SqueezingSpec(0.0)), 0.0);
  EXPECT_NEAR(herald_prob_alice({1, 2}, SqueezingSpec(0.5)), 0.28125, 1e-15);
}

TEST(HeraldAlice, SeriesSumsToOne) {
  double s = 0;
  for (unsigned k = 0; k <= 200; ++k) s += herald_prob_alice({k, 2}, SqueezingSpec(0.6));
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(HeraldBob, Values) {
  EXPECT_NEAR(herald_prob_bob(2, 1, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(herald_prob_bob(5, 5, 0.3), std::pow(0.3, 5), 1e-15);
  EXPECT_THROW(herald_prob_bob(2, 3, 0.5), std::domain_error);
  EXPECT_THROW(herald_prob_bob(2, 1, 1.5), std::domain_error);
}

TEST(HeraldBob, NormalizesOverJ) {
  double s17 = 0;
  for (unsigned j = 0; j <= 17; ++j) s17 += herald_prob_bob(17, j, 0.3);
  EXPECT_NEAR(s17, 1.0, 1e-14);
  for (unsigned k = 0; k <= 50; ++k) {
    for (double eta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      double s = 0;
      for (unsigned j = 0; j <= k; ++j) s += herald_prob_bob(k, j, eta);
      EXPECT_NEAR(s, 1.0, 1e-12) << "k=" << k << " eta=" << eta;
    }
  }
}

TEST(HeraldBob, MomentsApproachPowersOfEta) {
  const unsigned k = 500;
  const double eta = 0.3;
  for (int n = 1; n <= 3; ++n) {
    double moment = 0;
    for (unsigned j = 0; j <= k; ++j)
      moment += herald_prob_bob(k, j, eta) * std::pow(static_cast<double>(j) / k, n);
    EXPECT_LT(std::abs(moment - std::pow(eta, n)) / std::pow(eta, n), 0.02);
  }
}

TEST(ResourceNorm, Examples) {
  for (unsigned m = 1; m <= 6; ++m) EXPECT_EQ(resource_norm_S({1, m}), Rational(m));
  EXPECT_EQ(resource_norm_S({2, 3}), Rational(BigInt(15), BigInt(4)));
  EXPECT_EQ(resource_norm_S({3, 2}), Rational(BigInt(20), BigInt(9)));
  EXPECT_EQ(resource_norm_S({0, 4}), Rational(1));
  EXPECT_FALSE(resource_norm_S_closed({5, 2}).has_value());
}

TEST(ResourceNorm, ClosedFormsMatchEnumeration) {
  for (unsigned k = 1; k <= 4; ++k)
    for (unsigned m = 1; m <= 8; ++m)
      EXPECT_EQ(resource_norm_S({k, m}), *resource_norm_S_closed({k, m})) << k << "," << m;
}

TEST(BinomRatio, Values) {
  EXPECT_EQ(binom_ratio(10, 0, 5), Rational(1));
  EXPECT_EQ(binom_ratio(4, 2, 2), Rational(BigInt(10), BigInt(6)));
  EXPECT_NEAR(log2_binom_ratio(4, 2, 2), std::log2(10.0 / 6.0), 1e-15);
  EXPECT_THROW(binom_ratio(2, 3, 2), std::domain_error);
  EXPECT_THROW(asymptotic_binom_ratio(3, 3, 2), std::domain_error);
}

TEST(BinomRatio, LogFormMatchesExact) {
  for (unsigned k = 0; k <= 12; ++k)
    for (unsigned j = 0; j <= k; ++j)
      for (unsigned m = 1; m <= 6; ++m) {
        const double exact = std::log2(binom_ratio(k, j, m).convert_to<double>());
        EXPECT_NEAR(log2_binom_ratio(k, j, m), exact, 1e-12);
      }
}

TEST(BinomRatio, LargeKMatchesAsymptotic) {
  const double exact = std::exp2(log2_binom_ratio(10000, 5000, 3));
  EXPECT_LT(std::abs(exact / asymptotic_binom_ratio(10000, 5000, 3) - 1.0), 1e-3);
}

TEST(BinomRatio, AsymptoticErrorShrinksWithK) {
  for (unsigned m : {2u, 3u, 5u}) {
    double prev = INFINITY;
    for (unsigned k : {100u, 1000u, 10000u}) {
      const unsigned j = k / 4;
      const double err =
          std::abs(std::exp2(log2_binom_ratio(k, j, m)) / asymptotic_binom_ratio(k, j, m) - 1.0);
      EXPECT_LT(err, prev);
      prev = err;
    }
  }
}

TEST(Entropy, TmsvValues) {
  EXPECT_EQ(tmsv_entropy(SqueezingSpec(0.0)), 0.0);
  EXPECT_NEAR(tmsv_entropy(SqueezingSpec(0.5)), 1.0817041659455104, 1e-13);
  double prev = 0;
  for (int i = 1; i <= 9; ++i) {
    const double e = tmsv_entropy(SqueezingSpec(0.1 * i));
    EXPECT_GT(e, prev);
    prev = e;
  }
}

TEST(Squeezing, DerivedQuantities) {
  const SqueezingSpec s(0.5);
  EXPECT_NEAR(s.mean_photons(), std::pow(std::sinh(s.r()), 2), 1e-14);
  EXPECT_NEAR(s.nu(), std::cosh(2 * s.r()), 1e-14);
  EXPECT_NEAR(s.lambda(), 2 * s.mean_photons() + 1, 1e-14);
  EXPECT_THROW(SqueezingSpec(1.0), std::domain_error);
  EXPECT_THROW(SqueezingSpec(-0.1), std::domain_error);
}
