#ifndef SPANPARSE_SPAN_SCORER_H_
#define SPANPARSE_SPAN_SCORER_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spanparse/autodiff.h"
#include "spanparse/params.h"
#include "spanparse/span_attention.h"
#include "spanparse/tensor.h"

namespace spanparse {

// Every span (i, j), 0 <= i < j <= q, in a fixed order: by length, then
// start. Row s of a score matrix belongs to spans()[s].
class SpanIndex {
 public:
  explicit SpanIndex(int q);

  int length() const { return q_; }
  int count() const { return static_cast<int>(spans_.size()); }
  int index(int i, int j) const { return table_[static_cast<std::size_t>(i * (q_ + 1) + j)]; }
  const std::vector<std::pair<int, int>>& spans() const { return spans_; }

 private:
  int q_;
  std::vector<std::pair<int, int>> spans_;
  std::vector<int> table_;
};

// Label scores s(i, j, .) for all q(q+1)/2 spans of one sentence.
class ScoreChart {
 public:
  ScoreChart(int q, int num_labels);
  ScoreChart(int q, Tensor scores);

  int length() const { return index_.length(); }
  int num_labels() const { return static_cast<int>(scores_.cols()); }
  int num_spans() const { return index_.count(); }
  const SpanIndex& index() const { return index_; }

  double operator()(int i, int j, int label) const {
    return scores_(static_cast<std::size_t>(index_.index(i, j)), static_cast<std::size_t>(label));
  }
  double& at(int i, int j, int label) {
    return scores_(static_cast<std::size_t>(index_.index(i, j)), static_cast<std::size_t>(label));
  }
  const Tensor& matrix() const { return scores_; }

  // TSV dump "i<TAB>j<TAB>label<TAB>score".
  std::string to_tsv() const;

 private:
  SpanIndex index_;
  Tensor scores_;
};

// Two-layer head: W2 . ReLU(LN(W1 . r' + b1)) + b2 with r' = r (+) a.
class ScoringHead {
 public:
  // Registers "head.*" parameters.
  ScoringHead(int input_width, int hidden, int num_labels, ParamRegistry& params,
              Initializer& init);
  ScoringHead(int input_width, int hidden, int num_labels, const ParamRegistry& params);

  int input_width() const { return input_width_; }
  int num_labels() const { return num_labels_; }

  // rows x input_width -> rows x num_labels
  Var forward(Graph& g, Var input) const;

 private:
  void bind(const ParamRegistry& params);

  int input_width_;
  int hidden_;
  int num_labels_;
  const Parameter* w1_ = nullptr;
  const Parameter* b1_ = nullptr;
  const Parameter* ln_gamma_ = nullptr;
  const Parameter* ln_beta_ = nullptr;
  const Parameter* w2_ = nullptr;
  const Parameter* b2_ = nullptr;
};

// Input width of the head for a given mode: d_r (baseline), 2 d_r (SA),
// (n + 1) d_r (CatSA).
int head_input_width(AttentionMode mode, int span_width, int max_ngram);

// Scores one span. `attention` is empty in baseline mode. Throws ShapeError
// when r (+) a does not match the head's input width.
std::vector<double> score_span(std::span<const double> r, std::span<const double> attention,
                               const ScoringHead& head);

}  // namespace spanparse

#endif  // SPANPARSE_SPAN_SCORER_H_
