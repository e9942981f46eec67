#ifndef SPANPARSE_MODEL_H_
#define SPANPARSE_MODEL_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spanparse/autodiff.h"
#include "spanparse/chart_decoder.h"
#include "spanparse/encoder.h"
#include "spanparse/lexicon.h"
#include "spanparse/params.h"
#include "spanparse/span_attention.h"
#include "spanparse/span_scorer.h"
#include "spanparse/treebank.h"

namespace spanparse {

struct ModelConfig {
  EncoderConfig encoder;
  AttentionMode mode = AttentionMode::kCatSA;
  int head_hidden = 250;
  int max_ngram = 5;  // number of CatSA length categories
  std::uint64_t seed = 1;

  // Flat "key=value" lines.
  std::string to_text() const;
  static ModelConfig from_text(const std::string& text);
};

// Per-sentence inputs: ids and lexicon candidates for every span, in
// SpanIndex order.
struct PreparedSentence {
  int length = 0;
  std::vector<int> word_ids;
  std::vector<int> tag_ids;
  std::vector<std::pair<int, int>> spans;
  std::vector<std::vector<Candidate>> candidates;
};

// Encoder + optional span attention + scoring head, with the vocabularies,
// label inventory and n-gram lexicon it was built for.
class ParserModel {
 public:
  // Fresh parameters initialized from config.seed. The lexicon is cut to
  // config.max_ngram; it is unused in baseline mode.
  ParserModel(ModelConfig config, Vocab words, Vocab tags, LabelSet labels, NGramLexicon lexicon);
  ParserModel(ParserModel&&) = default;
  ParserModel& operator=(ParserModel&&) = default;

  // Vocabularies and labels from `train`; encoder.vocab_size, use_pos and
  // pos_vocab_size are filled in, and max_len is raised to cover the data.
  static ParserModel build(ModelConfig config, std::span<const TreebankEntry> train,
                           NGramLexicon lexicon);

  // Model directory: model.cfg, model.ckpt, words.tsv, pos.tsv,
  // labels.tsv, lexicon.tsv.
  void save(const std::string& dir) const;
  static ParserModel load(const std::string& dir);

  const ModelConfig& config() const { return config_; }
  const Vocab& words() const { return words_; }
  const Vocab& tags() const { return tags_; }
  const LabelSet& labels() const { return labels_; }
  const NGramLexicon& lexicon() const { return lexicon_; }
  ParamRegistry& params() { return *params_; }
  const ParamRegistry& params() const { return *params_; }

  PreparedSentence prepare(const Sentence& sentence) const;

  // (number of spans) x (number of labels) score node. `weights_out`
  // receives per-span candidate attention weights (SA and CatSA only).
  Var score_vars(Graph& g, const PreparedSentence& input,
                 std::vector<std::vector<double>>* weights_out = nullptr) const;

  ScoreChart score_chart(const Sentence& sentence) const;
  // Best tree with unary chains expanded.
  ParseTree parse(const Sentence& sentence) const;

 private:
  ParserModel(ModelConfig config, Vocab words, Vocab tags, LabelSet labels, NGramLexicon lexicon,
              std::unique_ptr<ParamRegistry> params);
  void bind();

  ModelConfig config_;
  Vocab words_;
  Vocab tags_;
  LabelSet labels_;
  NGramLexicon lexicon_;
  std::unique_ptr<ParamRegistry> params_;
  std::unique_ptr<Encoder> encoder_;
  std::unique_ptr<ScoringHead> head_;
  const Parameter* ngram_emb_ = nullptr;
  const Parameter* scale_raw_ = nullptr;
};

// Parses every sentence; `threads` workers share the frozen model.
std::vector<ParseTree> parse_all(const ParserModel& model, std::span<const Sentence> sentences,
                                 int threads = 1);

void save_labels(const std::string& path, const LabelSet& labels);
LabelSet load_labels(const std::string& path);

}  // namespace spanparse

#endif  // SPANPARSE_MODEL_H_
