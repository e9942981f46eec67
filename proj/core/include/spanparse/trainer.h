#ifndef SPANPARSE_TRAINER_H_
#define SPANPARSE_TRAINER_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "spanparse/chart_decoder.h"
#include "spanparse/evaluator.h"
#include "spanparse/model.h"
#include "spanparse/params.h"
#include "spanparse/span_scorer.h"
#include "spanparse/treebank.h"

namespace spanparse {

struct HingeResult {
  double loss = 0.0;
  DecodeResult augmented;  // cost-augmented argmax, score includes costs
  DecodeResult gold;       // best binarization of the gold tree
  // loss = sum(coef * scores) + offset; coef is +1 on augmented cells and
  // -1 on gold cells, so shared cells cancel.
  Tensor coef;
  double offset = 0.0;
};

// Structured hinge loss max(0, max_T [s(T) + cost(T)] - s(gold)) with the
// Hamming cost of decode_augmented.
HingeResult hinge_loss(const ScoreChart& scores, std::span<const LabeledSpan> gold);

struct TrainConfig {
  std::vector<double> learning_rates = {5e-5, 1e-5, 5e-6};
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 5.0;
  int batch_size = 8;
  int max_epochs = 50;
  int patience = 10;
  std::uint64_t seed = 1;
  int threads = 1;
  // Stop as soon as dev F1 reaches this value.
  std::optional<double> target_dev_f1;
  // When set, the best model is saved here and epoch lines go to train.log.
  std::string output_dir;
  // Optional extra sink for epoch lines.
  std::ostream* log = nullptr;

  // Throws std::invalid_argument.
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;  // mean per sentence
  double dev_precision = 0.0;
  double dev_recall = 0.0;
  double dev_f1 = 0.0;
  double dev_match = 0.0;

  // "epoch<TAB>loss<TAB>devP<TAB>devR<TAB>devF1<TAB>devMatch"
  std::string to_line() const;
};

struct TrainState {
  double learning_rate = 0.0;
  int epoch = 0;
  double best_dev_f1 = -1.0;
  int best_epoch = 0;
  std::string best_checkpoint;
  std::vector<EpochRecord> log;
  std::vector<Tensor> best_params;
};

class Adam {
 public:
  Adam(const ParamRegistry& params, double beta1, double beta2, double eps);
  void step(ParamRegistry& params, const Gradients& grads, double learning_rate);
  long steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Tensor> m_, v_;
};

// Parses `data` with the model and scores it against the gold trees.
EvalReport evaluate_model(const ParserModel& model, std::span<const TreebankEntry> data,
                          int threads = 1);

// Loss of one sentence and its gradient, accumulated into `grads`.
double sentence_gradient(const ParserModel& model, const PreparedSentence& input,
                         std::span<const LabeledSpan> gold, Gradients& grads);

// Trains at one learning rate. Dev F1 is measured after every epoch; the
// model ends up holding the best epoch's parameters. Throws NumericError on
// a non-finite loss.
TrainState train(ParserModel& model, std::span<const TreebankEntry> train_set,
                 std::span<const TreebankEntry> dev_set, const TrainConfig& config,
                 double learning_rate);
// Uses the first configured learning rate.
TrainState train(ParserModel& model, std::span<const TreebankEntry> train_set,
                 std::span<const TreebankEntry> dev_set, const TrainConfig& config);

struct SweepResult {
  std::vector<TrainState> runs;
  std::size_t best = 0;
  const TrainState& best_state() const { return runs[best]; }
};

// One train() per learning rate, each from the model's initial parameters.
// The model ends up with the best run's parameters (highest dev F1, earliest
// run on ties).
SweepResult sweep(ParserModel& model, std::span<const TreebankEntry> train_set,
                  std::span<const TreebankEntry> dev_set, const TrainConfig& config);

}  // namespace spanparse

#endif  // SPANPARSE_TRAINER_H_
