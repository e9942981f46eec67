#ifndef SPANPARSE_TOOLS_COMMANDS_H_
#define SPANPARSE_TOOLS_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spanparse::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kNumericError = 3 };

struct LexiconArgs {
  std::vector<std::string> treebanks;
  std::vector<std::string> raw;
  std::string output;
  int nmax = 5;
  int min_freq = 2;
  double threshold = 0.0;
};

struct TrainArgs {
  std::string train;
  std::string dev;
  std::string train_pos;
  std::string dev_pos;
  std::string lexicon;
  std::string output;
  std::string mode = "catsa";
  bool use_pos = false;
  int nmax = 5;
  int min_freq = 2;
  double threshold = 0.0;
  int d_model = 64;
  int layers = 3;
  int heads = 4;
  int ff_width = 128;
  int d_pos = 16;
  int head_hidden = 250;
  std::vector<double> lr = {5e-5, 1e-5, 5e-6};
  int epochs = 50;
  int patience = 10;
  int batch = 8;
  double clip = 5.0;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct ParseArgs {
  std::string model;
  std::string input;
  std::string format = "auto";
  std::string pos_file;
  std::string output;
  int threads = 1;
};

struct EvalArgs {
  std::string gold;
  std::string pred;
  std::string tsv;
  std::string buckets;
  std::vector<int> thresholds;
};

struct AnalyzeArgs {
  std::string model;
  std::string test;
  std::string buckets;
  std::vector<int> thresholds;
  std::string attention;
  std::string lengths;
  int top_k = 0;
  std::string ablation;
  std::string train;
  std::string dev;
  TrainArgs train_args;
  int threads = 1;
};

struct SynthArgs {
  std::string kind = "regular";
  int sentences = 50;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_build_lexicon(const LexiconArgs& args);
int cmd_train(const TrainArgs& args);
int cmd_parse(const ParseArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_analyze(const AnalyzeArgs& args);
int cmd_synth(const SynthArgs& args);

}  // namespace spanparse::cli

#endif  // SPANPARSE_TOOLS_COMMANDS_H_
