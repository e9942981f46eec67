#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.h"
#include "spanparse/chart_decoder.h"
#include "spanparse/errors.h"

using namespace spanparse;

namespace {

std::vector<LabeledSpan> sorted(std::vector<LabeledSpan> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Exhaustive best binarization: every binary bracketing that contains all
// gold spans, gold labels on gold spans and the empty label elsewhere.
double brute_gold_binarization(const ScoreChart& s, const std::vector<LabeledSpan>& gold) {
  const int q = s.length();
  const GoldLabels gl(gold, q);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& b : oracle::bracketings(0, q)) {
    const std::set<std::pair<int, int>> have(b.begin(), b.end());
    bool ok = true;
    for (const auto& g : gold) {
      if (g.label != 0 && !have.count({g.i, g.j})) ok = false;
    }
    if (!ok) continue;
    double total = 0.0;
    for (const auto& [i, j] : b) total += s(i, j, gl(i, j));
    best = std::max(best, total);
  }
  return best;
}

}  // namespace

TEST(Decode, SingleTokenPositive) {
  ScoreChart s(1, 2);
  s.at(0, 1, 1) = 0.5;
  const auto r = decode(s);
  EXPECT_EQ(r.spans, (std::vector<LabeledSpan>{{0, 1, 1}}));
  EXPECT_DOUBLE_EQ(r.score, 0.5);
}

TEST(Decode, SingleTokenRootNeverEmpty) {
  ScoreChart s(1, 2);
  s.at(0, 1, 0) = 3.0;
  s.at(0, 1, 1) = -2.0;
  const auto r = decode(s);
  EXPECT_EQ(r.spans, (std::vector<LabeledSpan>{{0, 1, 1}}));
  EXPECT_DOUBLE_EQ(r.score, -2.0);
}

TEST(Decode, ThreeTokenExample) {
  ScoreChart s(3, 2);
  s.at(0, 1, 1) = 1;
  s.at(1, 2, 1) = 2;
  s.at(2, 3, 1) = 3;
  s.at(0, 2, 1) = 0.5;
  s.at(1, 3, 1) = 4;
  s.at(0, 3, 1) = 1;
  Chart chart(3);
  const auto r = decode(s, chart);
  EXPECT_DOUBLE_EQ(r.score, 11.0);
  EXPECT_EQ(r.spans, sorted({{0, 3, 1}, {0, 1, 1}, {1, 3, 1}, {1, 2, 1}, {2, 3, 1}}));
  const int root = chart.index.index(0, 3);
  EXPECT_EQ(chart.best_split[static_cast<std::size_t>(root)], 1);
  EXPECT_DOUBLE_EQ(chart.best[static_cast<std::size_t>(root)], 11.0);
  EXPECT_EQ(chart.best_split[static_cast<std::size_t>(chart.index.index(1, 2))], -1);
  EXPECT_DOUBLE_EQ(oracle::enumerate_best(s).score, 11.0);
}

TEST(Decode, AllZeroIsRightBranching) {
  for (int q = 1; q <= 7; ++q) {
    const ScoreChart s(q, 4);
    std::vector<LabeledSpan> want = {{0, q, 1}};
    for (int i = 0; i < q - 1; ++i) want.push_back({i, i + 1, 0});
    for (int i = 1; i < q - 1; ++i) want.push_back({i, q, 0});
    if (q > 1) want.push_back({q - 1, q, 0});
    const auto r = decode(s);
    EXPECT_EQ(r.spans, sorted(want)) << "q=" << q;
    EXPECT_EQ(r.score, 0.0);
  }
}

TEST(Decode, NeedsAtLeastTwoLabels) {
  const ScoreChart s(2, 1);
  EXPECT_THROW(decode(s), DataError);
}

TEST(Decode, MatchesEnumerationOracle) {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 400; ++t) {
    const int q = 1 + t % 6;
    const int labels = 2 + t % 2;
    const bool coarse = t % 3 == 0;
    const ScoreChart s = oracle::random_chart(q, labels, rng, coarse);
    const auto r = decode(s);
    const auto want = oracle::enumerate_best(s);
    ASSERT_EQ(r.score, want.score) << "trial " << t;
    EXPECT_EQ(r.spans, want.spans) << "trial " << t;
    EXPECT_EQ(r.score, oracle::enumerate_full(s));
    EXPECT_EQ(static_cast<int>(r.spans.size()), 2 * q - 1);
  }
}

TEST(Decode, ScoreEqualsSumOfSpans) {
  std::mt19937_64 rng(102);
  for (int t = 0; t < 200; ++t) {
    const int q = 1 + t % 12;
    ScoreChart s(q, 5);
    std::normal_distribution<double> nd(0.0, 3.0);
    for (const auto& [i, j] : s.index().spans()) {
      for (int l = 0; l < 5; ++l) s.at(i, j, l) = nd(rng);
    }
    const auto r = decode(s);
    EXPECT_NEAR(tree_score(s, r.spans), r.score, 1e-9);
  }
}

TEST(Decode, RaisingOneSpanNeverLowersTheOptimum) {
  std::mt19937_64 rng(103);
  for (int t = 0; t < 200; ++t) {
    const int q = 2 + t % 8;
    ScoreChart s = oracle::random_chart(q, 3, rng, false);
    const double before = decode(s).score;
    const auto& spans = s.index().spans();
    const auto [i, j] = spans[std::uniform_int_distribution<std::size_t>(0, spans.size() - 1)(rng)];
    for (int l = 0; l < 3; ++l) s.at(i, j, l) += 2.5;
    EXPECT_GE(decode(s).score, before);
  }
}

TEST(DecodeAugmented, MatchesHammingOracle) {
  std::mt19937_64 rng(104);
  for (int t = 0; t < 400; ++t) {
    const int q = 1 + t % 6;
    const int labels = 2 + t % 3;
    const ScoreChart s = oracle::random_chart(q, labels, rng, t % 3 == 0);
    const auto gold = oracle::random_gold(q, labels, rng);
    const auto r = decode_augmented(s, gold);
    const auto want = oracle::enumerate_best(s, oracle::hamming(gold, q));
    ASSERT_EQ(r.score, want.score) << "trial " << t;
    EXPECT_EQ(r.spans, want.spans) << "trial " << t;
  }
}

TEST(DecodeAugmented, ReducesToDecodeOnCostAugmentedChart) {
  std::mt19937_64 rng(105);
  for (int t = 0; t < 100; ++t) {
    const int q = 1 + t % 9;
    const ScoreChart s = oracle::random_chart(q, 4, rng, t % 2 == 0);
    const auto gold = oracle::random_gold(q, 4, rng);
    const GoldLabels gl(gold, q);
    ScoreChart shifted = s;
    for (const auto& [i, j] : s.index().spans()) {
      for (int l = 0; l < 4; ++l) shifted.at(i, j, l) += l == gl(i, j) ? 0.0 : 1.0;
    }
    const auto a = decode_augmented(s, gold);
    const auto b = decode(shifted);
    EXPECT_EQ(a.spans, b.spans);
    EXPECT_EQ(a.score, b.score);
  }
}

TEST(DecodeAugmented, ZeroCostOracleEqualsDecode) {
  std::mt19937_64 rng(106);
  const oracle::Cost zero = [](int, int, int) { return 0.0; };
  for (int t = 0; t < 100; ++t) {
    const ScoreChart s = oracle::random_chart(1 + t % 6, 3, rng, t % 2 == 0);
    const auto want = oracle::enumerate_best(s, zero);
    const auto r = decode(s);
    EXPECT_EQ(r.score, want.score);
    EXPECT_EQ(r.spans, want.spans);
  }
}

TEST(DecodeAugmented, AllZeroScoresCountMismatches) {
  std::mt19937_64 rng(107);
  for (int q = 1; q <= 4; ++q) {
    for (int t = 0; t < 20; ++t) {
      const ScoreChart s(q, 3);
      const auto gold = oracle::random_gold(q, 3, rng);
      const auto r = decode_augmented(s, gold);
      const GoldLabels gl(gold, q);
      int mismatches = 0;
      for (const auto& sp : r.spans) mismatches += sp.label != gl(sp.i, sp.j);
      EXPECT_EQ(r.score, mismatches);
      // Three labels leave a differing choice for every span.
      EXPECT_EQ(mismatches, 2 * q - 1);
      EXPECT_EQ(r.score, oracle::enumerate_best(s, oracle::hamming(gold, q)).score);
    }
  }
}

TEST(DecodeAugmented, StrongGoldIsRecovered) {
  // Binary gold; every gold span scores +10 on its label.
  ScoreChart s(4, 3);
  const std::vector<LabeledSpan> gold = sorted({{0, 4, 1}, {0, 2, 2}, {0, 1, 1}, {1, 2, 2}, {2, 4, 1}, {2, 3, 2}, {3, 4, 2}});
  for (const auto& g : gold) s.at(g.i, g.j, g.label) = 10.0;
  const auto r = decode_augmented(s, gold);
  EXPECT_EQ(r.spans, gold);
  EXPECT_DOUBLE_EQ(r.score, 70.0);
}

TEST(DecodeAugmented, GoldOutsideSentenceIsError) {
  const ScoreChart s(3, 2);
  const std::vector<LabeledSpan> bad = {{0, 4, 1}};
  EXPECT_THROW(decode_augmented(s, bad), DataError);
  const std::vector<LabeledSpan> empty_span = {{2, 2, 1}};
  EXPECT_THROW(decode_augmented(s, empty_span), DataError);
}

TEST(GoldBinarization, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(108);
  for (int t = 0; t < 300; ++t) {
    const int q = 1 + t % 6;
    const ScoreChart s = oracle::random_chart(q, 4, rng, t % 3 == 0);
    const auto gold = oracle::random_gold(q, 4, rng);
    const auto r = best_gold_binarization(s, gold);
    EXPECT_EQ(r.score, brute_gold_binarization(s, gold)) << "trial " << t;
    EXPECT_EQ(r.score, tree_score(s, r.spans));
    EXPECT_EQ(static_cast<int>(r.spans.size()), 2 * q - 1);
    for (const auto& g : gold) {
      EXPECT_TRUE(std::binary_search(r.spans.begin(), r.spans.end(), g));
    }
  }
}

TEST(GoldBinarization, RequiresRootAndLaminarity) {
  const ScoreChart s(3, 3);
  const std::vector<LabeledSpan> no_root = {{0, 2, 1}};
  EXPECT_THROW(best_gold_binarization(s, no_root), DataError);
  const std::vector<LabeledSpan> crossing = {{0, 3, 1}, {0, 2, 1}, {1, 3, 2}};
  EXPECT_THROW(best_gold_binarization(s, crossing), DataError);
}
