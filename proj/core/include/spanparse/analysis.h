#ifndef SPANPARSE_ANALYSIS_H_
#define SPANPARSE_ANALYSIS_H_

#include <span>
#include <string>
#include <vector>

#include "spanparse/lexicon.h"
#include "spanparse/model.h"
#include "spanparse/span_attention.h"
#include "spanparse/trainer.h"
#include "spanparse/treebank.h"

namespace spanparse {

// Attention statistics of an SA or CatSA model over every span of every
// sentence in `corpus`.
AttentionAccumulator attention_report(const ParserModel& model, std::span<const Sentence> corpus,
                                      int threads = 1);

// "length<TAB>mean_weight<TAB>occurrences" for lengths 1..max_len.
std::string length_means_tsv(const AttentionAccumulator& acc, int max_len);

struct AblationRow {
  int cap = 0;  // 0 for the baseline reference row
  int lexicon_size = 0;
  double dev_f1 = 0.0;
  double test_f1 = 0.0;
};

// Trains one model per n-gram length cap 1..lexicon.max_len() with the
// lexicon restricted to that cap, plus a baseline row. `base.mode` selects
// SA or CatSA for the capped models.
std::vector<AblationRow> ablation_run(const ModelConfig& base, const NGramLexicon& lexicon,
                                      std::span<const TreebankEntry> train_set,
                                      std::span<const TreebankEntry> dev_set,
                                      std::span<const TreebankEntry> test_set,
                                      const TrainConfig& config);

// "cap<TAB>lexicon_size<TAB>dev_f1<TAB>test_f1", baseline written as cap "baseline".
std::string ablation_to_tsv(std::span<const AblationRow> rows);

}  // namespace spanparse

#endif  // SPANPARSE_ANALYSIS_H_
