#ifndef SPANPARSE_SPAN_ATTENTION_H_
#define SPANPARSE_SPAN_ATTENTION_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spanparse/autodiff.h"
#include "spanparse/lexicon.h"
#include "spanparse/tensor.h"

namespace spanparse {

enum class AttentionMode { kBaseline, kSA, kCatSA };

std::string_view to_string(AttentionMode mode);
// Accepts "baseline", "sa", "catsa" (case-insensitive).
AttentionMode parse_attention_mode(std::string_view name);

// Raw value giving softplus(rho) = 1, i.e. ln(e - 1).
double unit_scale_raw();
double softplus(double x);

struct AttentionOutput {
  std::vector<double> vector;   // a_{i,j}: d_r (SA) or n * d_r (CatSA)
  std::vector<double> weights;  // one per candidate, candidate order
  AttentionMode mode = AttentionMode::kSA;
};

// Plain span attention: softmax over candidates of r . e, then the weighted
// average of their embeddings. No candidates gives a zero vector.
AttentionOutput span_attention(std::span<const double> r, std::span<const Candidate> cands,
                               const Tensor& embeddings);

// Categorical span attention: span attention restricted to each length
// category u in 1..n, scaled by deltas[u-1] and concatenated. Empty
// categories contribute zero blocks.
AttentionOutput categorical_span_attention(std::span<const double> r,
                                           std::span<const Candidate> cands,
                                           const Tensor& embeddings,
                                           std::span<const double> deltas, int n);

// Differentiable span attention for every span of a sentence.
//   spans_repr: S x d_r span representations
//   embeddings: |N| x d_r n-gram table
//   scale_raw:  1 x n raw category scales (CatSA only; invalid Var for SA)
// Returns S x d_r (SA) or S x n*d_r (CatSA). When `weights_out` is non-null
// it receives per-span candidate weights.
Var span_attention_op(Graph& g, Var spans_repr, Var embeddings, Var scale_raw,
                      std::span<const std::vector<Candidate>> cands, AttentionMode mode, int n,
                      std::vector<std::vector<double>>* weights_out = nullptr);

// Running per-n-gram and per-length attention statistics.
class AttentionAccumulator {
 public:
  void add(const AttentionOutput& out, std::span<const Candidate> cands);
  void add(std::span<const double> weights, std::span<const Candidate> cands);
  void merge(const AttentionAccumulator& other);

  double total(int id) const;
  std::uint64_t count(int id) const;
  // Average weight of one n-gram over its occurrences; 0 if never seen.
  double average(int id) const;
  // Mean weight over all occurrences of length-u candidates.
  double length_mean(int u) const;
  std::uint64_t length_count(int u) const;
  bool empty() const { return counts_.empty(); }
  std::vector<int> ids() const;

  // "ngram<TAB>length<TAB>avg_weight<TAB>count", sorted by length, then
  // average weight descending, then n-gram text.
  std::string to_tsv(const NGramLexicon& lexicon, int top_k_per_length = 0) const;

 private:
  std::vector<double> totals_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> length_totals_;
  std::vector<std::uint64_t> length_counts_;
  std::vector<int> lengths_;  // per id, 0 = unseen
};

}  // namespace spanparse

#endif  // SPANPARSE_SPAN_ATTENTION_H_
