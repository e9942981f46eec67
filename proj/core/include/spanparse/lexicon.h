#ifndef SPANPARSE_LEXICON_H_
#define SPANPARSE_LEXICON_H_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace spanparse {

using TokenSeq = std::vector<std::string>;

// Maximum-likelihood unigram and adjacent-bigram probabilities of a corpus.
// Bigrams never cross sentence boundaries.
class PmiTable {
 public:
  // Throws DataError on an empty corpus.
  static PmiTable compute(std::span<const TokenSeq> corpus);

  double unigram_prob(const std::string& x) const;
  double bigram_prob(const std::string& first, const std::string& second) const;
  // log p(x'x'') - log p(x') - log p(x''); -inf for pairs never adjacent.
  double pmi(const std::string& first, const std::string& second) const;

  std::uint64_t token_count() const { return token_count_; }
  std::uint64_t bigram_positions() const { return bigram_positions_; }
  const std::unordered_map<std::string, std::uint64_t>& unigram_counts() const {
    return unigrams_;
  }

 private:
  std::unordered_map<std::string, std::uint64_t> unigrams_;
  std::unordered_map<std::string, std::uint64_t> bigrams_;  // key: "a\x1fb"
  std::uint64_t token_count_ = 0;
  std::uint64_t bigram_positions_ = 0;
};

// Splits a sentence where PMI(x_{t-1}, x_t) < threshold. Segments longer than
// max_len are cut greedily left to right into max_len-sized pieces.
std::vector<TokenSeq> segment(std::span<const std::string> sentence, const PmiTable& pmi,
                              double threshold, int max_len);

struct LexiconEntry {
  TokenSeq tokens;
  std::uint64_t frequency = 0;
};

// N-gram lexicon with dense ids ordered by (length, lexicographic tokens).
class NGramLexicon {
 public:
  NGramLexicon() = default;
  NGramLexicon(int max_len, int min_freq) : max_len_(max_len), min_freq_(min_freq) {}

  // Entries are sorted and assigned ids 0..n-1.
  static NGramLexicon from_entries(std::vector<LexiconEntry> entries, int max_len, int min_freq);

  int size() const { return static_cast<int>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  int max_len() const { return max_len_; }
  int min_freq() const { return min_freq_; }
  const LexiconEntry& entry(int id) const { return entries_.at(static_cast<std::size_t>(id)); }
  const std::vector<LexiconEntry>& entries() const { return entries_; }
  int length_of(int id) const { return static_cast<int>(entry(id).tokens.size()); }

  // -1 when absent.
  int find(std::span<const std::string> ngram) const;

  // TSV: "tok tok ...<TAB>frequency", one entry per line, id order.
  void save_tsv(const std::string& path) const;
  std::string to_tsv() const;
  // max_len <= 0 infers it from the longest entry.
  static NGramLexicon load_tsv(const std::string& path, int max_len = 0);

 private:
  int max_len_ = 0;
  int min_freq_ = 1;
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, int> index_;  // space-joined tokens
};

struct LexiconOptions {
  int max_len = 5;
  int min_freq = 2;
  double threshold = 0.0;
};

// PMI segmentation of the corpus, then every segment whose occurrence count
// reaches min_freq.
NGramLexicon build_lexicon(std::span<const TokenSeq> corpus, const LexiconOptions& options = {});

// Keeps entries no longer than cap; ids are re-densified.
NGramLexicon max_len_filter(const NGramLexicon& lexicon, int cap);

// A lexicon n-gram occurring at tokens [start, start + length).
struct Candidate {
  int id = 0;
  int start = 0;
  int length = 0;
  auto operator<=>(const Candidate&) const = default;
};

// Every lexicon occurrence inside tokens [i, j), ordered by (start, length).
std::vector<Candidate> candidates_for_span(std::span<const std::string> tokens, int i, int j,
                                           const NGramLexicon& lexicon);

// All lexicon occurrences of one sentence, queried per span without
// re-matching.
class SentenceMatches {
 public:
  SentenceMatches(std::span<const std::string> tokens, const NGramLexicon& lexicon);

  std::vector<Candidate> for_span(int i, int j) const;
  const std::vector<Candidate>& all() const { return matches_; }

 private:
  std::vector<Candidate> matches_;  // sorted by (start, length)
  std::vector<std::size_t> first_at_;  // first match index with start >= t
};

}  // namespace spanparse

#endif  // SPANPARSE_LEXICON_H_
