#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "spanparse/analysis.h"
#include "spanparse/errors.h"
#include "spanparse/evaluator.h"
#include "spanparse/model.h"
#include "spanparse/synthetic.h"
#include "spanparse/trainer.h"
#include "spanparse/treebank.h"

using namespace spanparse;

namespace {

std::vector<ParseTree> trees(const std::string& text) {
  std::vector<ParseTree> out;
  for (auto& e : read_bracketed(text)) out.push_back(std::move(e.tree));
  return out;
}

std::string fixture(const std::string& name) { return std::string(SPANPARSE_FIXTURE_DIR) + "/" + name; }

std::vector<ParseTree> fixture_trees(const std::string& name) {
  std::vector<ParseTree> out;
  for (auto& e : read_treebank_file(fixture(name))) out.push_back(std::move(e.tree));
  return out;
}

}  // namespace

TEST(ScoreTrees, IdenticalIsPerfect) {
  const auto g = trees("(S (NP (D a) (N b)) (VP (V c)))\n(X (Y z))\n");
  const auto r = score_trees(g, g);
  EXPECT_EQ(r.precision, 100.0);
  EXPECT_EQ(r.recall, 100.0);
  EXPECT_EQ(r.f1, 100.0);
  EXPECT_EQ(r.complete_match, 100.0);
  EXPECT_EQ(r.matched, 4);
}

TEST(ScoreTrees, HandCountedExample) {
  const auto g = trees("(S (NP (D a) (N b)) (V c))");
  const auto p = trees("(S (D a) (VP (N b) (V c)))");
  const auto r = score_trees(g, p);
  EXPECT_EQ(r.matched, 1);
  EXPECT_EQ(r.predicted, 2);
  EXPECT_EQ(r.gold, 2);
  EXPECT_DOUBLE_EQ(r.precision, 50.0);
  EXPECT_DOUBLE_EQ(r.recall, 50.0);
  EXPECT_DOUBLE_EQ(r.f1, 50.0);
  EXPECT_EQ(r.complete_match, 0.0);
}

TEST(ScoreTrees, UnariesCountAsSeparateBrackets) {
  const auto g = trees("(S (VP (V go)))");
  const auto p = trees("(S (V go))");
  const auto r = score_trees(g, p);
  EXPECT_EQ(r.gold, 2);
  EXPECT_EQ(r.predicted, 1);
  EXPECT_EQ(r.matched, 1);
}

TEST(ScoreTrees, Errors) {
  const std::vector<ParseTree> none;
  EXPECT_THROW(score_trees(none, none), DataError);
  const auto a = trees("(S (A x) (B y))\n(S (A x))\n");
  const auto b = trees("(S (A x) (B y))\n(S (A x) (B y))\n");
  try {
    score_trees(a, b);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(score_trees(std::span(a).first(1), b), DataError);
}

TEST(ScoreTrees, SwapExchangesPrecisionAndRecall) {
  const auto g = fixture_trees("evalb_gold.mrg");
  const auto p = fixture_trees("evalb_pred.mrg");
  const auto a = score_trees(g, p);
  const auto b = score_trees(p, g);
  EXPECT_DOUBLE_EQ(a.precision, b.recall);
  EXPECT_DOUBLE_EQ(a.recall, b.precision);
  EXPECT_DOUBLE_EQ(a.f1, b.f1);
  EXPECT_EQ(a.complete, b.complete);
}

TEST(ScoreTrees, OrderInvariant) {
  auto g = fixture_trees("evalb_gold.mrg");
  auto p = fixture_trees("evalb_pred.mrg");
  const auto a = score_trees(g, p);
  std::vector<std::size_t> order(g.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::mt19937_64 rng(4);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<ParseTree> g2, p2;
  for (std::size_t k : order) {
    g2.push_back(g[k]);
    p2.push_back(p[k]);
  }
  const auto b = score_trees(g2, p2);
  EXPECT_EQ(a.f1, b.f1);
  EXPECT_EQ(a.matched, b.matched);
}

TEST(ScoreTrees, AgreesWithReferenceScorerOnFixture) {
  const auto r = score_trees(fixture_trees("evalb_gold.mrg"), fixture_trees("evalb_pred.mrg"));
  std::ifstream in(fixture("evalb_reference.tsv"));
  ASSERT_TRUE(in.good());
  std::string line;
  std::getline(in, line);  // header
  std::size_t row = 0;
  double ref_r = 0, ref_p = 0, ref_f = 0, ref_c = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "#") {
      std::string k1, k2, k3, k4;
      ls >> k1 >> ref_r >> k2 >> ref_p >> k3 >> ref_f >> k4 >> ref_c;
      continue;
    }
    if (first == "total") {
      std::string dash;
      std::int64_t m, gl, pr, c;
      ls >> dash >> m >> gl >> pr >> c;
      EXPECT_EQ(r.matched, m);
      EXPECT_EQ(r.gold, gl);
      EXPECT_EQ(r.predicted, pr);
      EXPECT_EQ(r.complete, c);
      continue;
    }
    int len, m, gl, pr, c;
    ls >> len >> m >> gl >> pr >> c;
    ASSERT_LT(row, r.sentences.size());
    const auto& s = r.sentences[row++];
    EXPECT_EQ(s.length, len) << "sentence " << row;
    EXPECT_EQ(s.matched, m) << "sentence " << row;
    EXPECT_EQ(s.gold, gl) << "sentence " << row;
    EXPECT_EQ(s.predicted, pr) << "sentence " << row;
    EXPECT_EQ(s.complete ? 1 : 0, c) << "sentence " << row;
  }
  EXPECT_EQ(row, 20u);
  EXPECT_NEAR(r.recall, ref_r, 0.005);
  EXPECT_NEAR(r.precision, ref_p, 0.005);
  EXPECT_NEAR(r.f1, ref_f, 0.005);
  EXPECT_NEAR(r.complete_match, ref_c, 1e-9);
}

TEST(Aggregate, RecomputesTotals) {
  const auto r = aggregate({{3, 2, 3, 4, false}, {5, 4, 4, 4, true}});
  EXPECT_EQ(r.matched, 6);
  // Fields are length, matched, predicted, gold.
  EXPECT_DOUBLE_EQ(r.precision, 600.0 / 7.0);
  EXPECT_DOUBLE_EQ(r.recall, 75.0);
  EXPECT_DOUBLE_EQ(r.f1, 2 * 75.0 * (600.0 / 7.0) / (75.0 + 600.0 / 7.0));
  EXPECT_DOUBLE_EQ(r.complete_match, 50.0);
  const auto zero = aggregate({{2, 0, 1, 1, false}});
  EXPECT_EQ(zero.f1, 0.0);
}

TEST(Buckets, ZeroThresholdEqualsWholeReport) {
  const auto g = fixture_trees("evalb_gold.mrg");
  const auto p = fixture_trees("evalb_pred.mrg");
  const int zero[] = {0};
  const auto b = bucketed_f1(g, p, zero);
  ASSERT_EQ(b.size(), 1u);
  ASSERT_TRUE(b[0].report.has_value());
  EXPECT_EQ(b[0].report->f1, score_trees(g, p).f1);
  EXPECT_EQ(b[0].population, g.size());
}

TEST(Buckets, FilterAndEmptyBucket) {
  const auto g = trees("(S (A a) (B b) (C c))\n(S (A a) (B b) (C c) (D d) (E e) (F f) (G g) (H h) (I i) (J j))\n");
  const int th[] = {5, 11};
  const auto b = bucketed_f1(g, g, th);
  EXPECT_EQ(b[0].population, 1u);
  EXPECT_EQ(b[0].report->sentences.size(), 1u);
  EXPECT_EQ(b[0].report->sentences[0].length, 10);
  EXPECT_EQ(b[1].population, 0u);
  EXPECT_FALSE(b[1].report.has_value());
  EXPECT_NE(buckets_to_tsv(b).find("11\t0\tNA"), std::string::npos);
  const int bad[] = {10, 5};
  EXPECT_THROW(bucketed_f1(g, g, bad), std::invalid_argument);
}

TEST(Buckets, NestedPopulations) {
  const auto g = fixture_trees("evalb_gold.mrg");
  const auto th = default_length_thresholds();
  ASSERT_EQ(th.size(), 10u);
  EXPECT_EQ(th.front(), 5);
  EXPECT_EQ(th.back(), 50);
  const int small[] = {1, 2, 3, 4, 5, 6};
  const auto b = bucketed_f1(g, g, small);
  for (std::size_t k = 1; k < b.size(); ++k) EXPECT_LE(b[k].population, b[k - 1].population);
}

TEST(Report, SummaryAndTsv) {
  const auto r = score_trees(fixture_trees("evalb_gold.mrg"), fixture_trees("evalb_pred.mrg"));
  EXPECT_NE(r.summary().find("Bracketing Recall"), std::string::npos);
  EXPECT_NE(r.summary().find("86.67"), std::string::npos);
  std::istringstream tsv(r.to_tsv());
  int lines = 0;
  for (std::string l; std::getline(tsv, l);) ++lines;
  EXPECT_GE(lines, 21);
}

namespace {

ModelConfig tiny(AttentionMode mode) {
  ModelConfig c;
  c.mode = mode;
  c.encoder.d_model = 8;
  c.encoder.layers = 1;
  c.encoder.heads = 2;
  c.encoder.ff_width = 16;
  c.head_hidden = 12;
  c.max_ngram = 3;
  return c;
}

NGramLexicon lexicon_for(std::span<const TreebankEntry> data, int max_len) {
  std::vector<TokenSeq> corpus;
  for (const auto& e : data) {
    TokenSeq s;
    for (const auto& t : e.tokens) s.push_back(t.surface);
    corpus.push_back(s);
  }
  return build_lexicon(corpus, {max_len, 1, 0.0});
}

}  // namespace

TEST(Ablation, RowsAndFullCapMatchesUnrestricted) {
  const auto train_set = regular_grammar_treebank(10, 31);
  const auto dev_set = regular_grammar_treebank(5, 32);
  const auto test_set = regular_grammar_treebank(5, 33);
  const auto lex = lexicon_for(train_set, 3);
  TrainConfig tc;
  tc.learning_rates = {2e-3};
  tc.max_epochs = 2;
  tc.patience = 2;
  const auto rows = ablation_run(tiny(AttentionMode::kCatSA), lex, train_set, dev_set, test_set, tc);
  ASSERT_EQ(static_cast<int>(rows.size()), lex.max_len() + 1);
  EXPECT_EQ(rows[0].cap, 0);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].cap, static_cast<int>(k));
    if (k >= 2) {
      EXPECT_LE(rows[k - 1].lexicon_size, rows[k].lexicon_size);
    }
  }
  ParserModel full = ParserModel::build(tiny(AttentionMode::kCatSA), train_set, lex);
  sweep(full, train_set, dev_set, tc);
  EXPECT_EQ(rows.back().test_f1, evaluate_model(full, test_set).f1);
  const std::string tsv = ablation_to_tsv(rows);
  EXPECT_NE(tsv.find("baseline"), std::string::npos);
}

TEST(AttentionReport, PerLengthMeansAreConsistent) {
  const auto data = regular_grammar_treebank(6, 34);
  const auto lex = lexicon_for(data, 3);
  const ParserModel m = ParserModel::build(tiny(AttentionMode::kCatSA), data, lex);
  std::vector<Sentence> sentences;
  for (const auto& e : data) sentences.push_back(e.tokens);
  const auto acc = attention_report(m, sentences, 2);
  ASSERT_FALSE(acc.empty());
  for (int u = 1; u <= 3; ++u) {
    double total = 0.0;
    std::uint64_t count = 0;
    for (int id : acc.ids()) {
      if (lex.length_of(id) == u) {
        total += acc.total(id);
        count += acc.count(id);
      }
    }
    EXPECT_EQ(acc.length_count(u), count);
    if (count > 0) {
      EXPECT_NEAR(acc.length_mean(u), total / static_cast<double>(count), 1e-12);
    }
  }
  EXPECT_EQ(acc.to_tsv(m.lexicon(), 0).empty(), false);
  const ParserModel base = ParserModel::build(tiny(AttentionMode::kBaseline), data, lex);
  EXPECT_THROW(attention_report(base, sentences), std::invalid_argument);
}
