#ifndef SPANPARSE_CHART_DECODER_H_
#define SPANPARSE_CHART_DECODER_H_

#include <span>
#include <vector>

#include "spanparse/span_scorer.h"
#include "spanparse/treebank.h"

namespace spanparse {

// Best-score table of the CKY recursion with backpointers. Entries are
// indexed like the ScoreChart's SpanIndex; best_split is -1 for j = i + 1.
struct Chart {
  explicit Chart(int q);

  SpanIndex index;
  std::vector<double> best;
  std::vector<int> best_label;
  std::vector<int> best_split;
};

struct DecodeResult {
  std::vector<LabeledSpan> spans;  // sorted; includes empty-label spans
  double score = 0.0;
};

// Exact maximization of the summed span scores over binary span trees, with
// the root label restricted to non-empty labels. Ties go to the lowest label
// index, then the smallest split point.
DecodeResult decode(const ScoreChart& scores);
// Same, also returning the filled chart.
DecodeResult decode(const ScoreChart& scores, Chart& chart);

// Gold label per span: the gold constituent's label, or the empty label for
// spans that are not gold constituents.
class GoldLabels {
 public:
  GoldLabels(std::span<const LabeledSpan> gold, int q);
  int operator()(int i, int j) const { return table_[static_cast<std::size_t>(i * (q_ + 1) + j)]; }
  int length() const { return q_; }

 private:
  int q_;
  std::vector<int> table_;
};

// Maximizes sum of s(i,j,l) + cost(i,j,l), cost = 1 when l differs from the
// gold label of (i,j), else 0. The reported score includes the costs.
// Throws DataError when gold spans do not fit the chart's length.
DecodeResult decode_augmented(const ScoreChart& scores, std::span<const LabeledSpan> gold);

// Highest-scoring binarization of the gold tree: every gold span with its
// label plus empty-labeled spans grouping siblings. `gold` must be laminar
// and contain (0, q).
DecodeResult best_gold_binarization(const ScoreChart& scores, std::span<const LabeledSpan> gold);

// Sum of s(i,j,l) over the given spans.
double tree_score(const ScoreChart& scores, std::span<const LabeledSpan> spans);

}  // namespace spanparse

#endif  // SPANPARSE_CHART_DECODER_H_
