#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "commands.h"
#include "spanparse/errors.h"

namespace cli = spanparse::cli;

namespace {

void add_train_flags(CLI::App* sub, cli::TrainArgs& a) {
  sub->add_option("--mode", a.mode, "baseline, sa or catsa")->capture_default_str();
  sub->add_option("--lexicon", a.lexicon, "n-gram lexicon TSV; built from train+dev when omitted");
  sub->add_option("--nmax", a.nmax, "longest n-gram, also the number of CatSA categories")->capture_default_str();
  sub->add_option("--min-freq", a.min_freq, "minimum n-gram count when building the lexicon")->capture_default_str();
  sub->add_option("--threshold", a.threshold, "PMI threshold when building the lexicon")->capture_default_str();
  sub->add_flag("--pos", a.use_pos, "concatenate POS embeddings to the encoder output");
  sub->add_option("--d-model", a.d_model, "encoder width")->capture_default_str();
  sub->add_option("--layers", a.layers, "encoder layers")->capture_default_str();
  sub->add_option("--heads", a.heads, "attention heads per layer")->capture_default_str();
  sub->add_option("--ff-width", a.ff_width, "feed-forward width")->capture_default_str();
  sub->add_option("--d-pos", a.d_pos, "POS embedding width")->capture_default_str();
  sub->add_option("--head-hidden", a.head_hidden, "scoring head hidden width")->capture_default_str();
  sub->add_option("--lr", a.lr, "learning rates; more than one runs a sweep")->capture_default_str();
  sub->add_option("--epochs", a.epochs, "maximum epochs")->capture_default_str();
  sub->add_option("--patience", a.patience, "epochs without dev improvement before stopping")->capture_default_str();
  sub->add_option("--batch", a.batch, "sentences per update")->capture_default_str();
  sub->add_option("--clip", a.clip, "gradient global-norm clip")->capture_default_str();
  sub->add_option("--seed", a.seed, "random seed")->capture_default_str();
}

// Flat "key=value" file; keys are long flag names without dashes.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw spanparse::DataError("config file not found: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw spanparse::DataError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

// Fills options that were not given on the command line.
void apply_config(CLI::App* sub, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    CLI::Option* opt = nullptr;
    for (CLI::Option* o : sub->get_options()) {
      if (o->check_lname(key)) opt = o;
    }
    if (opt == nullptr) throw CLI::ValidationError("config", "unknown key '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;
    std::istringstream parts(value);
    std::vector<std::string> items;
    for (std::string item; parts >> item;) items.push_back(item);
    if (items.empty()) items.push_back(value);
    opt->add_result(items);
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chart-based constituency parser with n-gram span attention"};
  app.require_subcommand(1);
  std::string config_path;
  int threads = 1;
  app.add_option("--config", config_path, "flat key=value file; command-line flags take precedence");
  app.add_option("--threads", threads, "worker threads for sentence-level parallelism")->capture_default_str();

  cli::LexiconArgs lex;
  auto* lex_cmd = app.add_subcommand("build-lexicon", "PMI segmentation and n-gram lexicon extraction");
  lex_cmd->add_option("--input", lex.treebanks, "bracketed treebank files");
  lex_cmd->add_option("--raw", lex.raw, "whitespace-tokenized sentence files");
  lex_cmd->add_option("--output,-o", lex.output, "lexicon TSV (stdout when omitted)");
  lex_cmd->add_option("--nmax", lex.nmax, "longest n-gram")->capture_default_str();
  lex_cmd->add_option("--min-freq", lex.min_freq, "minimum n-gram count")->capture_default_str();
  lex_cmd->add_option("--threshold", lex.threshold, "PMI threshold")->capture_default_str();

  cli::TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a parser and save the best model directory");
  train_cmd->add_option("--train", tr.train, "training treebank")->required();
  train_cmd->add_option("--dev", tr.dev, "development treebank")->required();
  train_cmd->add_option("--train-pos", tr.train_pos, "predicted POS tags for the training set");
  train_cmd->add_option("--dev-pos", tr.dev_pos, "predicted POS tags for the development set");
  train_cmd->add_option("--output,-o", tr.output, "model directory")->required();
  add_train_flags(train_cmd, tr);

  cli::ParseArgs pa;
  auto* parse_cmd = app.add_subcommand("parse", "parse sentences with a trained model");
  parse_cmd->add_option("--model,-m", pa.model, "model directory")->required();
  parse_cmd->add_option("--input,-i", pa.input, "raw sentences or a treebank")->required();
  parse_cmd->add_option("--format", pa.format, "auto, raw or treebank")->capture_default_str();
  parse_cmd->add_option("--pos-file", pa.pos_file, "POS tags, one sentence per line");
  parse_cmd->add_option("--output,-o", pa.output, "output trees (stdout when omitted)");

  cli::EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "labeled bracket scores of predicted trees");
  eval_cmd->add_option("--gold", ev.gold, "gold treebank")->required();
  eval_cmd->add_option("--pred", ev.pred, "predicted treebank")->required();
  eval_cmd->add_option("--tsv", ev.tsv, "per-sentence TSV report");
  eval_cmd->add_option("--buckets", ev.buckets, "F1 by minimum sentence length, TSV");
  eval_cmd->add_option("--thresholds", ev.thresholds, "minimum lengths (default 5 10 ... 50)");

  cli::AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "length buckets, attention weights, n-gram length ablation");
  analyze_cmd->add_option("--model,-m", an.model, "model directory");
  analyze_cmd->add_option("--test", an.test, "test treebank")->required();
  analyze_cmd->add_option("--buckets", an.buckets, "F1 by minimum sentence length, TSV");
  analyze_cmd->add_option("--thresholds", an.thresholds, "minimum lengths (default 5 10 ... 50)");
  analyze_cmd->add_option("--attention", an.attention, "average attention weight per n-gram, TSV");
  analyze_cmd->add_option("--top-k", an.top_k, "n-grams kept per length (0 keeps all)")->capture_default_str();
  analyze_cmd->add_option("--lengths", an.lengths, "mean attention weight per n-gram length, TSV");
  analyze_cmd->add_option("--ablation", an.ablation, "retrain per n-gram length cap, TSV");
  analyze_cmd->add_option("--train", an.train, "training treebank for --ablation");
  analyze_cmd->add_option("--dev", an.dev, "development treebank for --ablation");
  add_train_flags(analyze_cmd, an.train_args);

  cli::SynthArgs sy;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic treebank");
  synth_cmd->add_option("--kind", sy.kind, "regular or trigram")->capture_default_str();
  synth_cmd->add_option("--sentences,-n", sy.sentences, "number of sentences")->capture_default_str();
  synth_cmd->add_option("--seed", sy.seed, "random seed")->capture_default_str();
  synth_cmd->add_option("--output,-o", sy.output, "output treebank (stdout when omitted)");

  try {
    app.parse(argc, argv);
    if (!config_path.empty()) {
      const auto kv = read_config(config_path);
      for (CLI::App* sub : app.get_subcommands()) apply_config(sub, kv);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  } catch (const spanparse::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kDataError;
  }

  tr.threads = threads;
  pa.threads = threads;
  an.threads = threads;
  try {
    if (lex_cmd->parsed()) return cli::cmd_build_lexicon(lex);
    if (train_cmd->parsed()) return cli::cmd_train(tr);
    if (parse_cmd->parsed()) return cli::cmd_parse(pa);
    if (eval_cmd->parsed()) return cli::cmd_eval(ev);
    if (analyze_cmd->parsed()) return cli::cmd_analyze(an);
    if (synth_cmd->parsed()) return cli::cmd_synth(sy);
  } catch (const spanparse::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return cli::kNumericError;
  } catch (const spanparse::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kDataError;
  }
  return cli::kUsage;
}
