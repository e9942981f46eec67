#include "commands.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "spanparse/analysis.h"
#include "spanparse/errors.h"
#include "spanparse/evaluator.h"
#include "spanparse/lexicon.h"
#include "spanparse/model.h"
#include "spanparse/synthetic.h"
#include "spanparse/trainer.h"
#include "spanparse/treebank.h"

namespace spanparse::cli {

namespace fs = std::filesystem;

namespace {

void require_file(const std::string& path) {
  if (path.empty()) return;
  if (!fs::is_regular_file(path)) throw DataError("file not found: " + path);
}

void require_writable_parent(const std::string& path) {
  if (path.empty()) return;
  const fs::path parent = fs::absolute(path).parent_path();
  if (!fs::is_directory(parent)) throw DataError("output directory does not exist: " + parent.string());
}

std::vector<TreebankEntry> load_treebank(const std::string& path, const std::string& pos_path) {
  std::vector<TreebankEntry> entries;
  try {
    entries = read_treebank_file(path);
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  }
  if (!pos_path.empty()) attach_pos(entries, read_pos_file(pos_path));
  if (entries.empty()) throw DataError(path + ": no trees");
  return entries;
}

std::vector<TokenSeq> surfaces(std::span<const TreebankEntry> entries) {
  std::vector<TokenSeq> out;
  for (const auto& e : entries) {
    TokenSeq t;
    for (const auto& tok : e.tokens) t.push_back(tok.surface);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Sentence> sentences_of(std::span<const TreebankEntry> entries) {
  std::vector<Sentence> out;
  for (const auto& e : entries) out.push_back(e.tokens);
  return out;
}

std::vector<ParseTree> trees_of(std::span<const TreebankEntry> entries) {
  std::vector<ParseTree> out;
  for (const auto& e : entries) out.push_back(e.tree);
  return out;
}

// Writes to `path`, or stdout when empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

ModelConfig model_config(const TrainArgs& a) {
  ModelConfig mc;
  mc.mode = parse_attention_mode(a.mode);
  mc.encoder.d_model = a.d_model;
  mc.encoder.layers = a.layers;
  mc.encoder.heads = a.heads;
  mc.encoder.ff_width = a.ff_width;
  mc.encoder.use_pos = a.use_pos;
  mc.encoder.d_pos = a.d_pos;
  mc.head_hidden = a.head_hidden;
  mc.max_ngram = a.nmax;
  mc.seed = a.seed;
  return mc;
}

TrainConfig train_config(const TrainArgs& a) {
  TrainConfig tc;
  tc.learning_rates = a.lr;
  tc.max_epochs = a.epochs;
  tc.patience = a.patience;
  tc.batch_size = a.batch;
  tc.clip_norm = a.clip;
  tc.seed = a.seed;
  tc.threads = a.threads;
  tc.validate();
  return tc;
}

NGramLexicon lexicon_for(const TrainArgs& a, std::span<const TreebankEntry> train,
                         std::span<const TreebankEntry> dev) {
  if (!a.lexicon.empty()) return NGramLexicon::load_tsv(a.lexicon);
  std::vector<TokenSeq> corpus = surfaces(train);
  const std::vector<TokenSeq> dev_corpus = surfaces(dev);
  corpus.insert(corpus.end(), dev_corpus.begin(), dev_corpus.end());
  return build_lexicon(corpus, LexiconOptions{a.nmax, a.min_freq, a.threshold});
}

bool looks_like_treebank(const std::string& path) {
  std::ifstream in(path);
  char c = 0;
  while (in.get(c)) {
    if (!std::isspace(static_cast<unsigned char>(c))) return c == '(';
  }
  return false;
}

}  // namespace

int cmd_build_lexicon(const LexiconArgs& args) {
  if (args.treebanks.empty() && args.raw.empty()) {
    throw std::invalid_argument("build-lexicon: give at least one --input or --raw file");
  }
  for (const auto& p : args.treebanks) require_file(p);
  for (const auto& p : args.raw) require_file(p);
  require_writable_parent(args.output);
  std::vector<TokenSeq> corpus;
  for (const auto& p : args.treebanks) {
    const auto part = surfaces(load_treebank(p, ""));
    corpus.insert(corpus.end(), part.begin(), part.end());
  }
  for (const auto& p : args.raw) {
    for (const auto& s : read_raw_sentences(p)) {
      TokenSeq t;
      for (const auto& tok : s) t.push_back(tok.surface);
      corpus.push_back(std::move(t));
    }
  }
  const NGramLexicon lex = build_lexicon(corpus, LexiconOptions{args.nmax, args.min_freq, args.threshold});
  emit(args.output, lex.to_tsv());
  std::cerr << "lexicon: " << lex.size() << " n-grams\n";
  return kOk;
}

int cmd_train(const TrainArgs& args) {
  for (const auto& p : {args.train, args.dev, args.train_pos, args.dev_pos, args.lexicon}) require_file(p);
  if (args.output.empty()) throw std::invalid_argument("train: --output is required");
  require_writable_parent(args.output);
  ModelConfig mc = model_config(args);
  TrainConfig tc = train_config(args);

  const auto train_set = load_treebank(args.train, args.train_pos);
  const auto dev_set = load_treebank(args.dev, args.dev_pos);
  NGramLexicon lexicon = mc.mode == AttentionMode::kBaseline
                             ? NGramLexicon(args.nmax, args.min_freq)
                             : lexicon_for(args, train_set, dev_set);
  if (mc.mode != AttentionMode::kBaseline && lexicon.empty()) {
    std::cerr << "warning: empty n-gram lexicon; span attention contributes nothing\n";
  }
  ParserModel model = ParserModel::build(mc, train_set, std::move(lexicon));
  tc.output_dir = args.output;
  tc.log = &std::cerr;
  std::cerr << "epoch\tloss\tdevP\tdevR\tdevF1\tdevMatch\n";
  if (tc.learning_rates.size() == 1) {
    const TrainState st = train(model, train_set, dev_set, tc);
    std::cout << "best dev F1 " << st.best_dev_f1 << " at epoch " << st.best_epoch << ", lr "
              << st.learning_rate << "\n";
  } else {
    const SweepResult sw = sweep(model, train_set, dev_set, tc);
    const TrainState& st = sw.best_state();
    std::cout << "best dev F1 " << st.best_dev_f1 << " at epoch " << st.best_epoch << ", lr "
              << st.learning_rate << "\n";
  }
  std::cout << "model written to " << args.output << "\n";
  return kOk;
}

int cmd_parse(const ParseArgs& args) {
  if (args.model.empty() || args.input.empty()) throw std::invalid_argument("parse: --model and --input are required");
  require_file(args.input);
  require_file(args.pos_file);
  require_writable_parent(args.output);
  const ParserModel model = ParserModel::load(args.model);

  std::string format = args.format;
  if (format == "auto") format = looks_like_treebank(args.input) ? "treebank" : "raw";
  std::vector<Sentence> sentences;
  if (format == "treebank") {
    sentences = sentences_of(load_treebank(args.input, args.pos_file));
  } else if (format == "raw") {
    sentences = read_raw_sentences(args.input);
    if (!args.pos_file.empty()) {
      const auto tags = read_pos_file(args.pos_file);
      if (tags.size() != sentences.size()) throw DataError("POS file has a different number of sentences");
      for (std::size_t k = 0; k < sentences.size(); ++k) {
        if (tags[k].size() != sentences[k].size()) {
          throw DataError("POS file line " + std::to_string(k + 1) + ": tag count differs from token count");
        }
        for (std::size_t t = 0; t < tags[k].size(); ++t) sentences[k][t].pos = tags[k][t];
      }
    } else if (model.config().encoder.use_pos) {
      throw DataError("model uses POS features; raw input needs --pos-file");
    }
  } else {
    throw std::invalid_argument("parse: --format must be auto, treebank or raw");
  }

  const std::vector<ParseTree> trees = parse_all(model, sentences, args.threads);
  std::ostringstream out;
  for (std::size_t k = 0; k < trees.size(); ++k) out << write_bracketed(trees[k], sentences[k]) << '\n';
  emit(args.output, out.str());
  return kOk;
}

int cmd_eval(const EvalArgs& args) {
  require_file(args.gold);
  require_file(args.pred);
  require_writable_parent(args.tsv);
  require_writable_parent(args.buckets);
  const auto gold = trees_of(load_treebank(args.gold, ""));
  const auto pred = trees_of(load_treebank(args.pred, ""));
  const EvalReport report = score_trees(gold, pred);
  std::cout << report.summary();
  if (!args.tsv.empty()) emit(args.tsv, report.to_tsv());
  if (!args.buckets.empty()) {
    const auto thresholds = args.thresholds.empty() ? default_length_thresholds() : args.thresholds;
    emit(args.buckets, buckets_to_tsv(bucketed_f1(gold, pred, thresholds)));
  }
  return kOk;
}

int cmd_analyze(const AnalyzeArgs& args) {
  for (const auto& p : {args.test, args.train, args.dev}) require_file(p);
  for (const auto& p : {args.buckets, args.attention, args.lengths, args.ablation}) require_writable_parent(p);
  if (args.buckets.empty() && args.attention.empty() && args.lengths.empty() && args.ablation.empty()) {
    throw std::invalid_argument("analyze: choose at least one of --buckets, --attention, --lengths, --ablation");
  }
  if (args.test.empty()) throw std::invalid_argument("analyze: --test is required");
  const auto test = load_treebank(args.test, "");

  if (!args.buckets.empty() || !args.attention.empty() || !args.lengths.empty()) {
    if (args.model.empty()) throw std::invalid_argument("analyze: --model is required for this report");
    const ParserModel model = ParserModel::load(args.model);
    const auto sentences = sentences_of(test);
    if (!args.buckets.empty()) {
      const auto pred = parse_all(model, sentences, args.threads);
      const auto thresholds = args.thresholds.empty() ? default_length_thresholds() : args.thresholds;
      emit(args.buckets, buckets_to_tsv(bucketed_f1(trees_of(test), pred, thresholds)));
    }
    if (!args.attention.empty() || !args.lengths.empty()) {
      const AttentionAccumulator acc = attention_report(model, sentences, args.threads);
      if (!args.attention.empty()) emit(args.attention, acc.to_tsv(model.lexicon(), args.top_k));
      if (!args.lengths.empty()) emit(args.lengths, length_means_tsv(acc, model.lexicon().max_len()));
    }
  }

  if (!args.ablation.empty()) {
    if (args.train.empty() || args.dev.empty()) {
      throw std::invalid_argument("analyze: --ablation needs --train and --dev");
    }
    const auto train_set = load_treebank(args.train, "");
    const auto dev_set = load_treebank(args.dev, "");
    TrainArgs ta = args.train_args;
    ta.threads = args.threads;
    const ModelConfig mc = model_config(ta);
    const TrainConfig tc = train_config(ta);
    const NGramLexicon lexicon = lexicon_for(ta, train_set, dev_set);
    const auto rows = ablation_run(mc, lexicon, train_set, dev_set, test, tc);
    emit(args.ablation, ablation_to_tsv(rows));
  }
  return kOk;
}

int cmd_synth(const SynthArgs& args) {
  require_writable_parent(args.output);
  std::vector<TreebankEntry> entries;
  if (args.kind == "regular") {
    entries = regular_grammar_treebank(args.sentences, args.seed);
  } else if (args.kind == "trigram") {
    entries = trigram_cue_treebank(args.sentences, args.seed);
  } else {
    throw std::invalid_argument("synth: --kind must be regular or trigram");
  }
  std::ostringstream out;
  for (const auto& e : entries) out << write_bracketed(e.tree, e.tokens) << '\n';
  emit(args.output, out.str());
  return kOk;
}

}  // namespace spanparse::cli
