#include "spanparse/lexicon.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "spanparse/errors.h"

namespace spanparse {

namespace {

std::string pair_key(const std::string& a, const std::string& b) {
  std::string k;
  k.reserve(a.size() + b.size() + 1);
  k += a;
  k += '\x1f';
  k += b;
  return k;
}

std::string join(std::span<const std::string> toks) {
  std::string out;
  for (std::size_t k = 0; k < toks.size(); ++k) {
    if (k) out += ' ';
    out += toks[k];
  }
  return out;
}

}  // namespace

PmiTable PmiTable::compute(std::span<const TokenSeq> corpus) {
  PmiTable t;
  for (const auto& sent : corpus) {
    for (std::size_t k = 0; k < sent.size(); ++k) {
      ++t.unigrams_[sent[k]];
      ++t.token_count_;
      if (k > 0) {
        ++t.bigrams_[pair_key(sent[k - 1], sent[k])];
        ++t.bigram_positions_;
      }
    }
  }
  if (t.token_count_ == 0) throw DataError("compute_pmi: empty corpus");
  return t;
}

double PmiTable::unigram_prob(const std::string& x) const {
  auto it = unigrams_.find(x);
  if (it == unigrams_.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(token_count_);
}

double PmiTable::bigram_prob(const std::string& first, const std::string& second) const {
  if (bigram_positions_ == 0) return 0.0;
  auto it = bigrams_.find(pair_key(first, second));
  if (it == bigrams_.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(bigram_positions_);
}

double PmiTable::pmi(const std::string& first, const std::string& second) const {
  const double joint = bigram_prob(first, second);
  if (joint == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(joint) - std::log(unigram_prob(first)) - std::log(unigram_prob(second));
}

std::vector<TokenSeq> segment(std::span<const std::string> sentence, const PmiTable& pmi,
                              double threshold, int max_len) {
  std::vector<TokenSeq> runs;
  if (sentence.empty()) return runs;
  runs.emplace_back(1, sentence[0]);
  for (std::size_t k = 1; k < sentence.size(); ++k) {
    if (pmi.pmi(sentence[k - 1], sentence[k]) < threshold) runs.emplace_back();
    runs.back().push_back(sentence[k]);
  }
  if (max_len <= 0) return runs;
  std::vector<TokenSeq> out;
  for (auto& run : runs) {
    for (std::size_t start = 0; start < run.size(); start += static_cast<std::size_t>(max_len)) {
      const std::size_t end = std::min(run.size(), start + static_cast<std::size_t>(max_len));
      out.emplace_back(run.begin() + static_cast<std::ptrdiff_t>(start),
                       run.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  return out;
}

NGramLexicon NGramLexicon::from_entries(std::vector<LexiconEntry> entries, int max_len,
                                        int min_freq) {
  std::sort(entries.begin(), entries.end(), [](const LexiconEntry& a, const LexiconEntry& b) {
    if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
    return a.tokens < b.tokens;
  });
  NGramLexicon lex(max_len, min_freq);
  for (auto& e : entries) {
    if (e.tokens.empty()) throw DataError("lexicon entry with no tokens");
    if (max_len > 0 && static_cast<int>(e.tokens.size()) > max_len) {
      throw DataError("lexicon entry longer than " + std::to_string(max_len) + ": " +
                      join(e.tokens));
    }
    auto [it, inserted] = lex.index_.emplace(join(e.tokens), lex.size());
    if (!inserted) throw DataError("duplicate lexicon entry: " + it->first);
    lex.entries_.push_back(std::move(e));
  }
  return lex;
}

int NGramLexicon::find(std::span<const std::string> ngram) const {
  auto it = index_.find(join(ngram));
  return it == index_.end() ? -1 : it->second;
}

std::string NGramLexicon::to_tsv() const {
  std::string out;
  for (const auto& e : entries_) {
    out += join(e.tokens);
    out += '\t';
    out += std::to_string(e.frequency);
    out += '\n';
  }
  return out;
}

void NGramLexicon::save_tsv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write lexicon: " + path);
  out << to_tsv();
}

NGramLexicon NGramLexicon::load_tsv(const std::string& path, int max_len) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon: " + path);
  std::vector<LexiconEntry> entries;
  std::string line;
  int line_no = 0;
  int longest = 0;
  std::uint64_t min_seen = std::numeric_limits<std::uint64_t>::max();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected <ngram>\\t<frequency>");
    }
    LexiconEntry e;
    std::istringstream toks(line.substr(0, tab));
    for (std::string t; toks >> t;) e.tokens.push_back(t);
    try {
      e.frequency = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(line_no) + ": bad frequency");
    }
    longest = std::max(longest, static_cast<int>(e.tokens.size()));
    min_seen = std::min(min_seen, e.frequency);
    entries.push_back(std::move(e));
  }
  const int min_freq = entries.empty() ? 1 : static_cast<int>(min_seen);
  return from_entries(std::move(entries), max_len > 0 ? max_len : longest, min_freq);
}

NGramLexicon build_lexicon(std::span<const TokenSeq> corpus, const LexiconOptions& options) {
  const PmiTable pmi = PmiTable::compute(corpus);
  std::map<TokenSeq, std::uint64_t> counts;
  for (const auto& sent : corpus) {
    for (auto& seg : segment(sent, pmi, options.threshold, options.max_len)) ++counts[seg];
  }
  std::vector<LexiconEntry> entries;
  for (auto& [toks, freq] : counts) {
    if (freq >= static_cast<std::uint64_t>(options.min_freq)) entries.push_back({toks, freq});
  }
  return NGramLexicon::from_entries(std::move(entries), options.max_len, options.min_freq);
}

NGramLexicon max_len_filter(const NGramLexicon& lexicon, int cap) {
  if (cap < 1) throw std::invalid_argument("max_len_filter: cap must be >= 1");
  std::vector<LexiconEntry> kept;
  for (const auto& e : lexicon.entries()) {
    if (static_cast<int>(e.tokens.size()) <= cap) kept.push_back(e);
  }
  return NGramLexicon::from_entries(std::move(kept), cap, lexicon.min_freq());
}

std::vector<Candidate> candidates_for_span(std::span<const std::string> tokens, int i, int j,
                                           const NGramLexicon& lexicon) {
  std::vector<Candidate> out;
  const int n = lexicon.max_len();
  for (int start = i; start < j; ++start) {
    for (int len = 1; len <= n && start + len <= j; ++len) {
      const int id = lexicon.find(tokens.subspan(static_cast<std::size_t>(start),
                                                 static_cast<std::size_t>(len)));
      if (id >= 0) out.push_back(Candidate{id, start, len});
    }
  }
  return out;
}

SentenceMatches::SentenceMatches(std::span<const std::string> tokens,
                                 const NGramLexicon& lexicon)
    : matches_(candidates_for_span(tokens, 0, static_cast<int>(tokens.size()), lexicon)),
      first_at_(tokens.size() + 1, matches_.size()) {
  for (std::size_t k = matches_.size(); k-- > 0;) {
    first_at_[static_cast<std::size_t>(matches_[k].start)] = k;
  }
  for (std::size_t t = tokens.size(); t-- > 0;) {
    first_at_[t] = std::min(first_at_[t], first_at_[t + 1]);
  }
}

std::vector<Candidate> SentenceMatches::for_span(int i, int j) const {
  std::vector<Candidate> out;
  for (std::size_t k = first_at_[static_cast<std::size_t>(i)];
       k < matches_.size() && matches_[k].start < j; ++k) {
    if (matches_[k].start + matches_[k].length <= j) out.push_back(matches_[k]);
  }
  return out;
}

}  // namespace spanparse
