#include "spanparse/analysis.h"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "parallel.h"
#include "spanparse/errors.h"

namespace spanparse {

AttentionAccumulator attention_report(const ParserModel& model, std::span<const Sentence> corpus,
                                      int threads) {
  if (model.config().mode == AttentionMode::kBaseline) {
    throw std::invalid_argument("attention report needs an SA or CatSA model");
  }
  std::vector<AttentionAccumulator> per(corpus.size());
  detail::parallel_for(corpus.size(), threads, [&](std::size_t k) {
    const PreparedSentence input = model.prepare(corpus[k]);
    Graph g;
    std::vector<std::vector<double>> weights;
    model.score_vars(g, input, &weights);
    for (std::size_t s = 0; s < weights.size(); ++s) per[k].add(weights[s], input.candidates[s]);
  });
  AttentionAccumulator total;
  for (const auto& a : per) total.merge(a);
  return total;
}

std::string length_means_tsv(const AttentionAccumulator& acc, int max_len) {
  std::ostringstream out;
  out << "length\tmean_weight\toccurrences\n";
  char buf[64];
  for (int u = 1; u <= max_len; ++u) {
    std::snprintf(buf, sizeof buf, "%.6f", acc.length_mean(u));
    out << u << '\t' << buf << '\t' << acc.length_count(u) << '\n';
  }
  return out.str();
}

std::vector<AblationRow> ablation_run(const ModelConfig& base, const NGramLexicon& lexicon,
                                      std::span<const TreebankEntry> train_set,
                                      std::span<const TreebankEntry> dev_set,
                                      std::span<const TreebankEntry> test_set,
                                      const TrainConfig& config) {
  if (base.mode == AttentionMode::kBaseline) {
    throw std::invalid_argument("ablation needs an SA or CatSA configuration");
  }
  TrainConfig run_config = config;
  run_config.output_dir.clear();
  auto run = [&](ModelConfig mc, NGramLexicon lex, int cap) {
    AblationRow row;
    row.cap = cap;
    row.lexicon_size = mc.mode == AttentionMode::kBaseline ? 0 : lex.size();
    ParserModel model = ParserModel::build(std::move(mc), train_set, std::move(lex));
    const SweepResult sw = sweep(model, train_set, dev_set, run_config);
    row.dev_f1 = sw.best_state().best_dev_f1;
    row.test_f1 = evaluate_model(model, test_set, config.threads).f1;
    return row;
  };
  std::vector<AblationRow> rows;
  ModelConfig baseline = base;
  baseline.mode = AttentionMode::kBaseline;
  rows.push_back(run(baseline, NGramLexicon(lexicon.max_len(), lexicon.min_freq()), 0));
  for (int cap = 1; cap <= lexicon.max_len(); ++cap) {
    ModelConfig mc = base;
    mc.max_ngram = cap;
    rows.push_back(run(mc, max_len_filter(lexicon, cap), cap));
  }
  return rows;
}

std::string ablation_to_tsv(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << "cap\tlexicon_size\tdev_f1\ttest_f1\n";
  char buf[96];
  for (const auto& r : rows) {
    const std::string cap = r.cap == 0 ? "baseline" : std::to_string(r.cap);
    std::snprintf(buf, sizeof buf, "\t%d\t%.2f\t%.2f\n", r.lexicon_size, r.dev_f1, r.test_f1);
    out << cap << buf;
  }
  return out.str();
}

}  // namespace spanparse
