#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spanparse/encoder.h"
#include "spanparse/errors.h"
#include "spanparse/model.h"
#include "spanparse/span_scorer.h"
#include "spanparse/synthetic.h"

using namespace spanparse;

TEST(SpanIndexTest, CountsAndOrder) {
  for (int q = 1; q <= 8; ++q) {
    SpanIndex idx(q);
    EXPECT_EQ(idx.count(), q * (q + 1) / 2);
    for (int s = 0; s < idx.count(); ++s) {
      const auto [i, j] = idx.spans()[static_cast<std::size_t>(s)];
      EXPECT_EQ(idx.index(i, j), s);
    }
  }
  EXPECT_THROW(SpanIndex(0), std::invalid_argument);
}

TEST(ScoreChartTest, SizesAndTsv) {
  ScoreChart one(1, 3);
  EXPECT_EQ(one.num_spans(), 1);
  ScoreChart four(4, 2);
  EXPECT_EQ(four.num_spans(), 10);
  one.at(0, 1, 2) = 1.5;
  EXPECT_EQ(one.to_tsv(), "0\t1\t0\t0\n0\t1\t1\t0\n0\t1\t2\t1.5\n");
  EXPECT_THROW(ScoreChart(3, Tensor(5, 2)), ShapeError);
}

namespace {

struct HeadFixture {
  ParamRegistry params;
  Initializer init{1};
  ScoringHead head;
  HeadFixture(int in, int hidden, int labels) : head(in, hidden, labels, params, init) {}
  Tensor& p(const std::string& name) { return params.get(name).value; }
};

}  // namespace

TEST(ScoringHeadTest, ZeroMapGivesZeroScores) {
  HeadFixture fx(3, 5, 4);
  fx.p("head.w2").fill(0.0);
  const std::vector<double> r = {0.4, -2.0};
  const std::vector<double> a = {1.0};
  EXPECT_EQ(score_span(r, a, fx.head), (std::vector<double>{0, 0, 0, 0}));
}

TEST(ScoringHeadTest, BiasPassesThrough) {
  HeadFixture fx(3, 5, 4);
  fx.p("head.w2").fill(0.0);
  fx.p("head.b2").fill(-1.25);
  const std::vector<double> r = {0.4, -2.0, 7.0};
  EXPECT_EQ(score_span(r, {}, fx.head), (std::vector<double>{-1.25, -1.25, -1.25, -1.25}));
}

TEST(ScoringHeadTest, HandForwardPass) {
  HeadFixture fx(2, 2, 2);
  fx.p("head.w1") = Tensor(2, 2, {1, 0, 0, 1});
  fx.p("head.b1").fill(0.0);
  fx.p("head.w2") = Tensor(2, 2, {1, 2, 3, -1});
  fx.p("head.b2") = Tensor::row({0.5, 0.0});
  // r' = (1, 3): mean 2, variance 1, LN -> (-z, z), ReLU -> (0, z).
  const double z = 1.0 / std::sqrt(1.0 + 1e-5);
  const std::vector<double> r = {1.0};
  const std::vector<double> a = {3.0};
  const auto s = score_span(r, a, fx.head);
  EXPECT_NEAR(s[0], 0.5 + 2.0 * z, 1e-12);
  EXPECT_NEAR(s[1], -z, 1e-12);
}

TEST(ScoringHeadTest, WidthMismatchIsShapeError) {
  HeadFixture fx(4, 3, 2);
  const std::vector<double> r = {1.0, 2.0};
  const std::vector<double> a = {1.0};
  EXPECT_THROW(score_span(r, a, fx.head), ShapeError);
  EXPECT_EQ(score_span(r, r, fx.head).size(), 2u);
  Graph g;
  EXPECT_THROW(fx.head.forward(g, g.constant(Tensor(3, 5))), ShapeError);
}

TEST(ScoringHeadTest, InputWidthPerMode) {
  EXPECT_EQ(head_input_width(AttentionMode::kBaseline, 10, 5), 10);
  EXPECT_EQ(head_input_width(AttentionMode::kSA, 10, 5), 20);
  EXPECT_EQ(head_input_width(AttentionMode::kCatSA, 10, 5), 60);
}

namespace {

ModelConfig tiny_config(AttentionMode mode) {
  ModelConfig c;
  c.mode = mode;
  c.encoder.d_model = 8;
  c.encoder.layers = 1;
  c.encoder.heads = 2;
  c.encoder.ff_width = 16;
  c.head_hidden = 12;
  c.max_ngram = 3;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(ScoreChartModel, ChartSizeAndDeterminism) {
  const auto data = regular_grammar_treebank(10, 3);
  std::vector<TokenSeq> corpus;
  for (const auto& e : data) {
    TokenSeq s;
    for (const auto& t : e.tokens) s.push_back(t.surface);
    corpus.push_back(s);
  }
  const NGramLexicon lex = build_lexicon(corpus, {3, 1, 0.0});
  const ParserModel a = ParserModel::build(tiny_config(AttentionMode::kCatSA), data, lex);
  const ParserModel b = ParserModel::build(tiny_config(AttentionMode::kCatSA), data, lex);
  for (const auto& e : data) {
    const int q = static_cast<int>(e.tokens.size());
    const ScoreChart ca = a.score_chart(e.tokens);
    EXPECT_EQ(ca.num_spans(), q * (q + 1) / 2);
    EXPECT_EQ(ca.num_labels(), a.labels().size());
    EXPECT_TRUE(ca.matrix().all_finite());
    EXPECT_EQ(ca.matrix(), b.score_chart(e.tokens).matrix());
    EXPECT_EQ(ca.matrix(), a.score_chart(e.tokens).matrix());
  }
  Sentence one = {Token{"n3", std::nullopt}};
  EXPECT_EQ(a.score_chart(one).num_spans(), 1);
}

TEST(ScoreChartModel, EmptyLexiconEqualsZeroAttention) {
  const auto data = regular_grammar_treebank(6, 4);
  for (AttentionMode mode : {AttentionMode::kSA, AttentionMode::kCatSA}) {
    const ParserModel m = ParserModel::build(tiny_config(mode), data, NGramLexicon(3, 1));
    const EncoderConfig& ec = m.config().encoder;
    const Encoder enc(ec, m.params());
    const int width = head_input_width(mode, ec.span_width(), 3);
    const ScoringHead head(width, 12, m.labels().size(), m.params());
    for (const auto& e : data) {
      const PreparedSentence in = m.prepare(e.tokens);
      Graph g;
      const Tensor h = g.value(enc.encode(g, in.word_ids, in.tag_ids));
      const ScoreChart chart = m.score_chart(e.tokens);
      const std::vector<double> zeros(static_cast<std::size_t>(width - ec.span_width()), 0.0);
      for (const auto& [i, j] : chart.index().spans()) {
        const auto s = score_span(span_repr(h, i, j), zeros, head);
        for (int l = 0; l < chart.num_labels(); ++l) EXPECT_NEAR(chart(i, j, l), s[static_cast<std::size_t>(l)], 1e-10);
      }
    }
  }
}
