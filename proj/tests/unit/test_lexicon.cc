#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "oracles.h"
#include "spanparse/errors.h"
#include "spanparse/lexicon.h"

using namespace spanparse;

namespace {

TokenSeq split(const std::string& s) {
  TokenSeq out;
  std::istringstream in(s);
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::vector<TokenSeq> corpus_of(std::initializer_list<const char*> lines) {
  std::vector<TokenSeq> out;
  for (const char* l : lines) out.push_back(split(l));
  return out;
}

}  // namespace

TEST(Pmi, HandComputedABAB) {
  const auto corpus = corpus_of({"a b a b"});
  const PmiTable t = PmiTable::compute(corpus);
  EXPECT_DOUBLE_EQ(t.unigram_prob("a"), 0.5);
  EXPECT_DOUBLE_EQ(t.unigram_prob("b"), 0.5);
  EXPECT_DOUBLE_EQ(t.bigram_prob("a", "b"), 2.0 / 3.0);
  EXPECT_NEAR(t.pmi("a", "b"), std::log(8.0 / 3.0), 1e-12);
  EXPECT_NEAR(t.pmi("a", "b"), 0.981, 1e-3);
  EXPECT_NEAR(t.pmi("b", "a"), std::log(4.0 / 3.0), 1e-12);
  EXPECT_NEAR(t.pmi("b", "a"), 0.288, 1e-3);
}

TEST(Pmi, UnseenPairIsMinusInfinity) {
  const PmiTable t = PmiTable::compute(corpus_of({"a b", "c d"}));
  EXPECT_TRUE(std::isinf(t.pmi("b", "c")));
  EXPECT_LT(t.pmi("b", "c"), 0.0);
}

TEST(Pmi, IndependenceBoundary) {
  const PmiTable t = PmiTable::compute(corpus_of({"a a"}));
  EXPECT_DOUBLE_EQ(t.pmi("a", "a"), 0.0);
}

TEST(Pmi, EmptyCorpusIsError) {
  EXPECT_THROW(PmiTable::compute(std::vector<TokenSeq>{}), DataError);
}

TEST(Pmi, UnigramsSumToOne) {
  std::mt19937_64 rng(3);
  const auto corpus = oracle::random_corpus(rng);
  const PmiTable t = PmiTable::compute(corpus);
  double total = 0.0;
  for (const auto& [w, c] : t.unigram_counts()) total += t.unigram_prob(w);
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Segment, AllBelowThresholdGivesSingletons) {
  const auto corpus = corpus_of({"a b c"});
  const PmiTable t = PmiTable::compute(corpus);
  const auto segs = segment(corpus[0], t, 100.0, 5);
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[1], TokenSeq{"b"});
}

TEST(Segment, ABABStaysJoined) {
  const auto corpus = corpus_of({"a b a b"});
  const PmiTable t = PmiTable::compute(corpus);
  const auto segs = segment(corpus[0], t, 0.0, 5);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0], split("a b a b"));
}

TEST(Segment, LongRunsSplitGreedily) {
  const auto corpus = corpus_of({"a b a b a b a"});
  const PmiTable t = PmiTable::compute(corpus);
  const auto segs = segment(corpus[0], t, 0.0, 3);
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[0], split("a b a"));
  EXPECT_EQ(segs[1], split("b a b"));
  EXPECT_EQ(segs[2], split("a"));
}

TEST(Segment, WorkedPattern) {
  // x2 x3 x4 always travel together; x1 and x5 are frequent everywhere.
  std::vector<TokenSeq> corpus = {{"x1", "x2", "x3", "x4", "x5"}};
  for (int k = 0; k < 6; ++k) {
    corpus.push_back({"z" + std::to_string(k), "x2", "x3", "x4", "y" + std::to_string(k)});
    corpus.push_back({"x1", "x5", "x1", "x5", "x1", "x5"});
  }
  const PmiTable t = PmiTable::compute(corpus);
  EXPECT_LT(t.pmi("x1", "x2"), 0.0);
  EXPECT_GT(t.pmi("x2", "x3"), 0.0);
  EXPECT_GT(t.pmi("x3", "x4"), 0.0);
  EXPECT_LT(t.pmi("x4", "x5"), 0.0);
  const auto segs = segment(corpus[0], t, 0.0, 5);
  const std::vector<TokenSeq> want = {{"x1"}, {"x2", "x3", "x4"}, {"x5"}};
  EXPECT_EQ(segs, want);
}

TEST(Segment, EqualityJoins) {
  const PmiTable t = PmiTable::compute(corpus_of({"a a"}));
  const auto segs = segment(split("a a"), t, 0.0, 5);
  EXPECT_EQ(segs.size(), 1u);
}

TEST(BuildLexicon, BelowMinFreqIsEmpty) {
  const auto lex = build_lexicon(corpus_of({"a b", "a c"}));
  EXPECT_TRUE(lex.empty());
}

TEST(BuildLexicon, RepeatedPair) {
  const auto lex = build_lexicon(corpus_of({"x y", "x y", "x y"}));
  ASSERT_EQ(lex.size(), 1);
  EXPECT_EQ(lex.entry(0).tokens, split("x y"));
  EXPECT_EQ(lex.entry(0).frequency, 3u);
}

TEST(BuildLexicon, MinFreqOne) {
  const auto lex = build_lexicon(corpus_of({"w"}), LexiconOptions{5, 1, 0.0});
  ASSERT_EQ(lex.size(), 1);
  EXPECT_EQ(lex.entry(0).tokens, TokenSeq{"w"});
  EXPECT_EQ(lex.entry(0).frequency, 1u);
}

TEST(BuildLexicon, MatchesNaiveRecount) {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 30; ++n) {
    const auto corpus = oracle::random_corpus(rng);
    const int nmax = std::uniform_int_distribution<int>(1, 5)(rng);
    const int min_freq = std::uniform_int_distribution<int>(1, 3)(rng);
    const auto want = oracle::naive_lexicon(corpus, nmax, min_freq, 0.0);
    const auto lex = build_lexicon(corpus, LexiconOptions{nmax, min_freq, 0.0});
    ASSERT_EQ(static_cast<std::size_t>(lex.size()), want.size());
    for (const auto& e : lex.entries()) {
      auto it = want.find(e.tokens);
      ASSERT_NE(it, want.end());
      EXPECT_EQ(e.frequency, it->second);
      EXPECT_LE(static_cast<int>(e.tokens.size()), nmax);
      EXPECT_GE(e.frequency, static_cast<std::uint64_t>(min_freq));
    }
  }
}

TEST(SegmentProperty, PartitionsSentence) {
  std::mt19937_64 rng(6);
  for (int n = 0; n < 20; ++n) {
    const auto corpus = oracle::random_corpus(rng);
    const PmiTable t = PmiTable::compute(corpus);
    for (const auto& s : corpus) {
      TokenSeq joined;
      for (const auto& seg : segment(s, t, 0.0, 3)) {
        EXPECT_LE(seg.size(), 3u);
        joined.insert(joined.end(), seg.begin(), seg.end());
      }
      EXPECT_EQ(joined, s);
    }
  }
}

TEST(NGramLexiconTest, DenseSortedIdsAndTsvRoundTrip) {
  std::vector<LexiconEntry> entries = {{split("b c"), 2}, {split("a"), 4}, {split("a b c"), 2}, {split("a b"), 3}};
  const auto lex = NGramLexicon::from_entries(entries, 3, 2);
  ASSERT_EQ(lex.size(), 4);
  EXPECT_EQ(lex.entry(0).tokens, split("a"));
  EXPECT_EQ(lex.entry(1).tokens, split("a b"));
  EXPECT_EQ(lex.entry(2).tokens, split("b c"));
  EXPECT_EQ(lex.entry(3).tokens, split("a b c"));
  EXPECT_EQ(lex.to_tsv(), "a\t4\na b\t3\nb c\t2\na b c\t2\n");
  const auto path = (std::filesystem::temp_directory_path() / "spanparse_lexicon_test.tsv").string();
  lex.save_tsv(path);
  const auto back = NGramLexicon::load_tsv(path);
  EXPECT_EQ(back.to_tsv(), lex.to_tsv());
  EXPECT_EQ(back.max_len(), 3);
  std::filesystem::remove(path);
}

TEST(NGramLexiconTest, RejectsDuplicatesAndOverlong) {
  EXPECT_THROW(NGramLexicon::from_entries({{split("a"), 2}, {split("a"), 3}}, 2, 1), DataError);
  EXPECT_THROW(NGramLexicon::from_entries({{split("a b c"), 2}}, 2, 1), DataError);
}

TEST(Candidates, DirectMatch) {
  const auto lex = NGramLexicon::from_entries({{split("a"), 2}, {split("b c"), 2}}, 2, 2);
  const TokenSeq toks = split("a b c");
  const auto c = candidates_for_span(toks, 0, 3, lex);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0], (Candidate{lex.find(split("a")), 0, 1}));
  EXPECT_EQ(c[1], (Candidate{lex.find(split("b c")), 1, 2}));
}

TEST(Candidates, NothingFits) {
  const auto lex = NGramLexicon::from_entries({{split("b c"), 2}}, 2, 2);
  const TokenSeq toks = split("a b c");
  EXPECT_TRUE(candidates_for_span(toks, 0, 1, lex).empty());
}

TEST(Candidates, BruteForceAndNesting) {
  std::mt19937_64 rng(8);
  for (int n = 0; n < 200; ++n) {
    const int vocab = std::uniform_int_distribution<int>(2, 4)(rng);
    auto word = [&] { return "w" + std::to_string(std::uniform_int_distribution<int>(0, vocab - 1)(rng)); };
    std::vector<LexiconEntry> entries;
    std::set<TokenSeq> seen;
    const int nmax = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int k = 0; k < 8; ++k) {
      TokenSeq t;
      const int len = std::uniform_int_distribution<int>(1, nmax)(rng);
      for (int a = 0; a < len; ++a) t.push_back(word());
      if (seen.insert(t).second) entries.push_back({t, 2});
    }
    const auto lex = NGramLexicon::from_entries(entries, nmax, 2);
    TokenSeq sent;
    const int q = std::uniform_int_distribution<int>(1, 9)(rng);
    for (int a = 0; a < q; ++a) sent.push_back(word());
    const SentenceMatches matches(sent, lex);
    for (int i = 0; i < q; ++i) {
      for (int j = i + 1; j <= q; ++j) {
        std::vector<Candidate> want;
        for (int s = i; s < j; ++s) {
          for (int len = 1; len <= nmax && s + len <= j; ++len) {
            const TokenSeq sub(sent.begin() + s, sent.begin() + s + len);
            const int id = lex.find(sub);
            if (id >= 0) want.push_back(Candidate{id, s, len});
          }
        }
        const auto got = candidates_for_span(sent, i, j, lex);
        EXPECT_EQ(got, want);
        EXPECT_EQ(matches.for_span(i, j), want);
        if (j < q) {
          const auto wider = candidates_for_span(sent, i, j + 1, lex);
          for (const auto& c : got) EXPECT_NE(std::find(wider.begin(), wider.end(), c), wider.end());
        }
      }
    }
  }
}

TEST(MaxLenFilter, Caps) {
  const auto lex =
      NGramLexicon::from_entries({{split("a"), 2}, {split("a b"), 2}, {split("a b c"), 2}}, 3, 2);
  const auto two = max_len_filter(lex, 2);
  ASSERT_EQ(two.size(), 2);
  EXPECT_EQ(two.entry(0).tokens, split("a"));
  EXPECT_EQ(two.entry(1).tokens, split("a b"));
  EXPECT_EQ(max_len_filter(lex, 3).to_tsv(), lex.to_tsv());
  const auto one = max_len_filter(lex, 1);
  ASSERT_EQ(one.size(), 1);
  EXPECT_EQ(one.length_of(0), 1);
}

TEST(MaxLenFilter, CandidateCountsShrinkWithCap) {
  std::mt19937_64 rng(9);
  const auto corpus = oracle::random_corpus(rng);
  const auto lex = build_lexicon(corpus, LexiconOptions{5, 1, 0.0});
  for (const auto& s : corpus) {
    const int q = static_cast<int>(s.size());
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (int cap = 5; cap >= 1; --cap) {
      const auto capped = max_len_filter(lex, cap);
      const std::size_t count = candidates_for_span(s, 0, q, capped).size();
      EXPECT_LE(count, prev);
      prev = count;
    }
  }
}
