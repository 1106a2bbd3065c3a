#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include <fareyphase/farey.hpp>

#include "oracles.hpp"

using namespace fareyphase;

namespace {

std::vector<Fraction> values(const std::vector<FareyFraction>& v) {
  std::vector<Fraction> out;
  for (const auto& f : v)
    out.push_back(f.value());
  return out;
}

std::vector<std::uint64_t> new_denominators(int k) {
  std::vector<std::uint64_t> out;
  traverse_new_pairs(k, [&](const MediantTriple& t) { out.push_back(t.mid.den); });
  return out;
}

std::uint64_t fib(int n) {
  std::uint64_t a = 1, b = 1;
  for (int i = 2; i < n; ++i) {
    const std::uint64_t c = a + b;
    a = b;
    b = c;
  }
  return n <= 2 ? 1 : b;
}

} // namespace

TEST(LevelFractions, LevelZero) {
  EXPECT_EQ(values(level_fractions(0)), (std::vector<Fraction>{{0, 1}, {1, 1}}));
}

TEST(LevelFractions, LevelTwo) {
  EXPECT_EQ(values(level_fractions(2)),
            (std::vector<Fraction>{{0, 1}, {1, 3}, {1, 2}, {2, 3}, {1, 1}}));
}

TEST(LevelFractions, LevelThree) {
  EXPECT_EQ(values(level_fractions(3)), (std::vector<Fraction>{{0, 1}, {1, 4}, {1, 3}, {2, 5}, {1, 2},
                                                               {3, 5}, {2, 3}, {3, 4}, {1, 1}}));
}

TEST(LevelFractions, MetadataAndCap) {
  const auto row = level_fractions(4);
  ASSERT_EQ(row.size(), 17u);
  for (std::size_t i = 0; i < row.size(); ++i) {
    EXPECT_EQ(row[i].index, i + 1);
    EXPECT_EQ(row[i].level, 4);
  }
  EXPECT_THROW(level_fractions(25), level_too_large);
  try {
    level_fractions(25);
  } catch (const level_too_large& e) {
    EXPECT_NE(std::string(e.what()).find("traverse_new_pairs"), std::string::npos);
  }
}

TEST(LevelFractions, MatchesInsertionOracle) {
  for (int k = 0; k <= 16; ++k)
    EXPECT_EQ(values(level_fractions(k)), oracle::level(k)) << "k=" << k;
}

TEST(LevelFractions, UnimodularAndReduced) {
  for (int k = 0; k <= 20; ++k) {
    const auto row = level_fractions(k);
    for (std::size_t i = 0; i + 1 < row.size(); ++i) {
      const auto& a = row[i];
      const auto& b = row[i + 1];
      // r^(n) - r^(n-1) = 1/(d^(n) d^(n-1)) exactly
      ASSERT_EQ(b.numerator * a.denominator - a.numerator * b.denominator, 1u) << "k=" << k;
      ASSERT_EQ(std::gcd(a.numerator, a.denominator), 1u);
      ASSERT_LE(a.denominator, fib(k + 2));
    }
  }
}

TEST(LevelFractions, DenominatorRecursions) {
  for (int k = 1; k <= 20; ++k) {
    const auto row = level_fractions(k);
    const auto prev = level_fractions(k - 1);
    for (std::size_t n = 1; 2 * n <= row.size() - 1; ++n) {
      // d_k^(2n) = d_k^(2n-1) + d_k^(2n+1), d_k^(2n-1) = d_{k-1}^(n)
      ASSERT_EQ(row[2 * n - 1].denominator, row[2 * n - 2].denominator + row[2 * n].denominator);
      ASSERT_EQ(row[2 * n - 2].denominator, prev[n - 1].denominator);
    }
  }
}

TEST(TraverseNewPairs, SmallLevels) {
  EXPECT_EQ(new_denominators(1), (std::vector<std::uint64_t>{2}));
  EXPECT_EQ(new_denominators(2), (std::vector<std::uint64_t>{3, 3}));
  EXPECT_EQ(new_denominators(3), (std::vector<std::uint64_t>{4, 5, 5, 4}));
  EXPECT_THROW(traverse_new_pairs(0, [](const MediantTriple&) {}), domain_error);
}

TEST(TraverseNewPairs, MatchesEvenIndices) {
  for (int k = 1; k <= 20; ++k) {
    const auto row = level_fractions(k);
    std::vector<MediantTriple> seen;
    traverse_new_pairs(k, [&](const MediantTriple& t) { seen.push_back(t); });
    ASSERT_EQ(seen.size(), std::size_t{1} << (k - 1));
    for (std::size_t n = 1; n <= seen.size(); ++n) {
      ASSERT_EQ(seen[n - 1].mid, row[2 * n - 1].value());
      ASSERT_EQ(seen[n - 1].left, row[2 * n - 2].value());
      ASSERT_EQ(seen[n - 1].right, row[2 * n].value());
    }
  }
}

TEST(TraverseNewPairs, OverflowGuard) {
  EXPECT_THROW(traverse_new_pairs(89, [](const MediantTriple&) {}), overflow_error);
  // The extreme chain at depth 88 stays exact.
  MediantFrame f;
  for (int d = 1; d < 88; ++d)
    f = (d % 2) ? MediantFrame{f.left, f.mid(), d + 1} : MediantFrame{f.mid(), f.right, d + 1};
  std::uint64_t den = 0;
  traverse_new_pairs(f, 88, [&](const MediantTriple& t) { den = t.mid.den; });
  EXPECT_EQ(den, fib(90));
}

TEST(Chunking, ChunksConcatenateToLevel) {
  for (int k : {3, 8, 15, 18}) {
    for (int j : {0, 1, 2, 3}) {
      if (j >= k)
        continue;
      std::vector<Fraction> got{{0, 1}};
      for (const auto& fr : split_frames(j))
        for_each_in_chunk(fr, k, [&](const Fraction& f) { got.push_back(f); });
      ASSERT_EQ(got, values(level_fractions(k))) << "k=" << k << " j=" << j;
    }
  }
}

TEST(FareyMap, Examples) {
  EXPECT_DOUBLE_EQ(farey_map(0.5), 1.0);
  EXPECT_NEAR(farey_map(0.4), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(farey_map(0.0), 0.0);
  EXPECT_EQ(farey_map(1.0), 0.0);
  EXPECT_THROW(farey_map(-0.1), domain_error);
  EXPECT_THROW(farey_map(1.5), domain_error);
  EXPECT_EQ(farey_map(Fraction{2, 5}), (Fraction{2, 3}));
  EXPECT_EQ(farey_map(Fraction{3, 5}), (Fraction{2, 3}));
}

TEST(Presentation, Examples) {
  EXPECT_NEAR(presentation(0, presentation(1, 0.5)), 0.4, 1e-16);
  EXPECT_EQ(presentation(0, 0.0), 0.0);
  EXPECT_EQ(presentation(1, 1.0), 0.5);
  EXPECT_THROW(presentation(2, 0.5), domain_error);
  EXPECT_THROW(presentation(0, 1.5), domain_error);
  EXPECT_DOUBLE_EQ(presentation(0, 0.3) + presentation(1, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(presentation_derivative(0, 0.5), 4.0 / 9.0);
  EXPECT_DOUBLE_EQ(presentation_derivative(1, 0.5), -4.0 / 9.0);
}

TEST(Presentation, InverseOfFareyMap) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    for (int e : {0, 1})
      ASSERT_NEAR(farey_map(presentation(e, x)), x, 4 * std::numeric_limits<double>::epsilon())
          << "x=" << x << " e=" << e;
  }
}
