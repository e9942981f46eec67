#ifndef SPANPARSE_EVALUATOR_H_
#define SPANPARSE_EVALUATOR_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spanparse/treebank.h"

namespace spanparse {

struct SentenceEval {
  int length = 0;
  int matched = 0;
  int predicted = 0;
  int gold = 0;
  bool complete = false;
};

// Labeled bracket scores. Precision, recall, F1 and complete match are
// percentages.
struct EvalReport {
  std::int64_t matched = 0;
  std::int64_t predicted = 0;
  std::int64_t gold = 0;
  std::int64_t complete = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double complete_match = 0.0;
  std::vector<SentenceEval> sentences;

  // Per-sentence rows, then a totals row.
  std::string to_tsv() const;
  std::string summary() const;
};

// Brackets of the uncollapsed trees are compared as (i, j, label)
// multisets; the root bracket counts, preterminals are never brackets.
// Throws DataError on empty or misaligned inputs.
EvalReport score_trees(std::span<const ParseTree> gold, std::span<const ParseTree> pred);

// Recomputes totals and percentages from per-sentence records.
EvalReport aggregate(std::vector<SentenceEval> sentences);

struct Bucket {
  int min_length = 0;
  std::size_t population = 0;
  std::optional<EvalReport> report;  // absent when no sentence qualifies
};

// One report per threshold over the sentences of length >= threshold.
// Thresholds must be ascending.
std::vector<Bucket> bucketed_f1(std::span<const ParseTree> gold, std::span<const ParseTree> pred,
                                std::span<const int> thresholds);

// "min_length<TAB>sentences<TAB>P<TAB>R<TAB>F1<TAB>match"; NA for empty buckets.
std::string buckets_to_tsv(std::span<const Bucket> buckets);

// 5, 10, ..., 50.
std::vector<int> default_length_thresholds();

}  // namespace spanparse

#endif  // SPANPARSE_EVALUATOR_H_
