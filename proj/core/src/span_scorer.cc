#include "spanparse/span_scorer.h"

#include <sstream>
#include <stdexcept>

#include "spanparse/errors.h"

namespace spanparse {

SpanIndex::SpanIndex(int q) : q_(q), table_(static_cast<std::size_t>((q + 1) * (q + 1)), -1) {
  if (q < 1) throw std::invalid_argument("SpanIndex: sentence length must be positive");
  spans_.reserve(static_cast<std::size_t>(q * (q + 1) / 2));
  for (int len = 1; len <= q; ++len) {
    for (int i = 0; i + len <= q; ++i) {
      table_[static_cast<std::size_t>(i * (q + 1) + i + len)] = static_cast<int>(spans_.size());
      spans_.emplace_back(i, i + len);
    }
  }
}

ScoreChart::ScoreChart(int q, int num_labels)
    : index_(q), scores_(static_cast<std::size_t>(index_.count()),
                         static_cast<std::size_t>(num_labels)) {}

ScoreChart::ScoreChart(int q, Tensor scores) : index_(q), scores_(std::move(scores)) {
  if (scores_.rows() != static_cast<std::size_t>(index_.count())) {
    throw ShapeError("ScoreChart: " + std::to_string(scores_.rows()) + " score rows for " +
                     std::to_string(index_.count()) + " spans");
  }
}

std::string ScoreChart::to_tsv() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [i, j] : index_.spans()) {
    for (int l = 0; l < num_labels(); ++l) {
      out << i << '\t' << j << '\t' << l << '\t' << (*this)(i, j, l) << '\n';
    }
  }
  return out.str();
}

ScoringHead::ScoringHead(int input_width, int hidden, int num_labels, ParamRegistry& params,
                         Initializer& init)
    : input_width_(input_width), hidden_(hidden), num_labels_(num_labels) {
  if (input_width <= 0 || hidden <= 0 || num_labels <= 0) {
    throw std::invalid_argument("ScoringHead: widths must be positive");
  }
  const auto in = static_cast<std::size_t>(input_width);
  const auto h = static_cast<std::size_t>(hidden);
  const auto nl = static_cast<std::size_t>(num_labels);
  params.add("head.w1", init.glorot(h, in));
  params.add("head.b1", Tensor(1, h, 0.0));
  params.add("head.ln.gamma", Tensor(1, h, 1.0));
  params.add("head.ln.beta", Tensor(1, h, 0.0));
  params.add("head.w2", init.glorot(nl, h));
  params.add("head.b2", Tensor(1, nl, 0.0));
  bind(params);
}

ScoringHead::ScoringHead(int input_width, int hidden, int num_labels, const ParamRegistry& params)
    : input_width_(input_width), hidden_(hidden), num_labels_(num_labels) {
  bind(params);
}

void ScoringHead::bind(const ParamRegistry& params) {
  w1_ = &params.get("head.w1");
  b1_ = &params.get("head.b1");
  ln_gamma_ = &params.get("head.ln.gamma");
  ln_beta_ = &params.get("head.ln.beta");
  w2_ = &params.get("head.w2");
  b2_ = &params.get("head.b2");
  if (w1_->value.cols() != static_cast<std::size_t>(input_width_) ||
      w1_->value.rows() != static_cast<std::size_t>(hidden_) ||
      w2_->value.rows() != static_cast<std::size_t>(num_labels_)) {
    throw ShapeError("ScoringHead: parameter shapes do not match the configured widths");
  }
}

Var ScoringHead::forward(Graph& g, Var input) const {
  if (g.value(input).cols() != static_cast<std::size_t>(input_width_)) {
    throw ShapeError("ScoringHead: input width " + std::to_string(g.value(input).cols()) +
                     " != expected " + std::to_string(input_width_));
  }
  Var pre = ops::add_row(g, ops::matmul_nt(g, input, g.param(*w1_)), g.param(*b1_));
  Var hidden = ops::relu(g, ops::layer_norm(g, pre, g.param(*ln_gamma_), g.param(*ln_beta_)));
  return ops::add_row(g, ops::matmul_nt(g, hidden, g.param(*w2_)), g.param(*b2_));
}

int head_input_width(AttentionMode mode, int span_width, int max_ngram) {
  switch (mode) {
    case AttentionMode::kBaseline: return span_width;
    case AttentionMode::kSA: return 2 * span_width;
    case AttentionMode::kCatSA: return (max_ngram + 1) * span_width;
  }
  return span_width;
}

std::vector<double> score_span(std::span<const double> r, std::span<const double> attention,
                               const ScoringHead& head) {
  const std::size_t width = r.size() + attention.size();
  if (width != static_cast<std::size_t>(head.input_width())) {
    throw ShapeError("score_span: r (+) a has width " + std::to_string(width) +
                     ", head expects " + std::to_string(head.input_width()));
  }
  std::vector<double> in(r.begin(), r.end());
  in.insert(in.end(), attention.begin(), attention.end());
  Graph g;
  Var out = head.forward(g, g.constant(Tensor::row(std::move(in))));
  return g.value(out).values();
}

}  // namespace spanparse
