#include "spanparse/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "parallel.h"
#include "spanparse/errors.h"

namespace spanparse {

namespace fs = std::filesystem;

HingeResult hinge_loss(const ScoreChart& scores, std::span<const LabeledSpan> gold) {
  HingeResult h;
  h.augmented = decode_augmented(scores, gold);
  h.gold = best_gold_binarization(scores, gold);
  const GoldLabels labels(gold, scores.length());
  h.coef = Tensor(static_cast<std::size_t>(scores.num_spans()), static_cast<std::size_t>(scores.num_labels()));
  const SpanIndex& idx = scores.index();
  for (const auto& s : h.augmented.spans) {
    h.coef(static_cast<std::size_t>(idx.index(s.i, s.j)), static_cast<std::size_t>(s.label)) += 1.0;
    if (s.label != labels(s.i, s.j)) h.offset += 1.0;
  }
  for (const auto& s : h.gold.spans) {
    h.coef(static_cast<std::size_t>(idx.index(s.i, s.j)), static_cast<std::size_t>(s.label)) -= 1.0;
  }
  h.loss = std::max(0.0, h.augmented.score - h.gold.score);
  return h;
}

void TrainConfig::validate() const {
  if (learning_rates.empty()) throw std::invalid_argument("train: no learning rate given");
  for (double r : learning_rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("train: learning rates must be non-negative");
  }
  if (batch_size < 1) throw std::invalid_argument("train: batch size must be at least 1");
  if (max_epochs < 1) throw std::invalid_argument("train: max epochs must be at least 1");
  if (patience < 1) throw std::invalid_argument("train: patience must be at least 1");
  if (threads < 1) throw std::invalid_argument("train: threads must be at least 1");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("train: clip norm must be positive");
}

std::string EpochRecord::to_line() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d\t%.6f\t%.2f\t%.2f\t%.2f\t%.2f", epoch, loss, dev_precision,
                dev_recall, dev_f1, dev_match);
  return buf;
}

Adam::Adam(const ParamRegistry& params, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Tensor& v = params[k].value;
    m_.emplace_back(v.rows(), v.cols());
    v_.emplace_back(v.rows(), v.cols());
  }
}

void Adam::step(ParamRegistry& params, const Gradients& grads, double learning_rate) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!grads.has(k)) continue;
    const Tensor& g = grads.at(k);
    Tensor& w = params[k].value;
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t e = 0; e < w.size(); ++e) {
      m[e] = beta1_ * m[e] + (1.0 - beta1_) * g[e];
      v[e] = beta2_ * v[e] + (1.0 - beta2_) * g[e] * g[e];
      w[e] -= learning_rate * (m[e] / c1) / (std::sqrt(v[e] / c2) + eps_);
    }
  }
}

EvalReport evaluate_model(const ParserModel& model, std::span<const TreebankEntry> data, int threads) {
  std::vector<Sentence> sentences;
  std::vector<ParseTree> gold;
  sentences.reserve(data.size());
  gold.reserve(data.size());
  for (const auto& e : data) {
    sentences.push_back(e.tokens);
    gold.push_back(e.tree);
  }
  const std::vector<ParseTree> pred = parse_all(model, sentences, threads);
  return score_trees(gold, pred);
}

double sentence_gradient(const ParserModel& model, const PreparedSentence& input,
                         std::span<const LabeledSpan> gold, Gradients& grads) {
  Graph g;
  Var scores = model.score_vars(g, input);
  const ScoreChart chart(input.length, g.value(scores));
  if (!chart.matrix().all_finite()) throw NumericError("non-finite span scores");
  HingeResult h = hinge_loss(chart, gold);
  if (!std::isfinite(h.loss)) throw NumericError("non-finite loss");
  if (h.loss > 0.0) {
    Var loss = ops::weighted_sum(g, scores, std::move(h.coef), h.offset);
    g.backward(loss);
    g.collect_param_grads(grads);
  }
  return h.loss;
}

namespace {

struct Example {
  PreparedSentence input;
  std::vector<LabeledSpan> gold;
};

std::vector<Example> prepare_examples(const ParserModel& model, std::span<const TreebankEntry> data) {
  std::vector<Example> out;
  out.reserve(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    Example ex;
    ex.input = model.prepare(data[k].tokens);
    try {
      ex.gold = tree_to_spans(collapse_unaries(data[k].tree), model.labels());
    } catch (const DataError& e) {
      throw DataError("training sentence " + std::to_string(k + 1) + ": " + e.what());
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

TrainState train(ParserModel& model, std::span<const TreebankEntry> train_set,
                 std::span<const TreebankEntry> dev_set, const TrainConfig& config,
                 double learning_rate) {
  config.validate();
  if (train_set.empty()) throw DataError("train: empty training set");
  if (dev_set.empty()) throw DataError("train: empty development set");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("train: negative learning rate");

  const std::vector<Example> examples = prepare_examples(model, train_set);
  ParamRegistry& params = model.params();
  Adam adam(params, config.beta1, config.beta2, config.adam_eps);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  std::ofstream log_file;
  if (!config.output_dir.empty()) {
    fs::create_directories(config.output_dir);
    log_file.open(fs::path(config.output_dir) / "train.log", std::ios::trunc);
    if (!log_file) throw DataError("cannot write " + (fs::path(config.output_dir) / "train.log").string());
  }

  TrainState state;
  state.learning_rate = learning_rate;
  state.best_params = params.snapshot();
  int since_best = 0;
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t n = std::min(batch, order.size() - start);
      std::vector<Gradients> per(n, Gradients(params.size()));
      std::vector<double> losses(n, 0.0);
      detail::parallel_for(n, config.threads, [&](std::size_t k) {
        const Example& ex = examples[order[start + k]];
        losses[k] = sentence_gradient(model, ex.input, ex.gold, per[k]);
      });
      Gradients grads(params.size());
      for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(losses[k])) {
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", sentence " +
                             std::to_string(order[start + k] + 1));
        }
        total_loss += losses[k];
        grads.merge(per[k]);
      }
      grads.scale(1.0 / static_cast<double>(n));
      const double norm = grads.global_norm();
      if (!std::isfinite(norm)) {
        throw NumericError("non-finite gradient norm at epoch " + std::to_string(epoch));
      }
      if (norm > config.clip_norm) grads.scale(config.clip_norm / norm);
      adam.step(params, grads, learning_rate);
    }

    const EvalReport dev = evaluate_model(model, dev_set, config.threads);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = total_loss / static_cast<double>(examples.size());
    rec.dev_precision = dev.precision;
    rec.dev_recall = dev.recall;
    rec.dev_f1 = dev.f1;
    rec.dev_match = dev.complete_match;
    state.log.push_back(rec);
    state.epoch = epoch;
    const std::string line = rec.to_line();
    if (log_file) log_file << line << '\n' << std::flush;
    if (config.log != nullptr) *config.log << line << '\n' << std::flush;

    if (rec.dev_f1 > state.best_dev_f1) {
      state.best_dev_f1 = rec.dev_f1;
      state.best_epoch = epoch;
      state.best_params = params.snapshot();
      since_best = 0;
      if (!config.output_dir.empty()) {
        model.save(config.output_dir);
        state.best_checkpoint = (fs::path(config.output_dir) / "model.ckpt").string();
      }
    } else {
      ++since_best;
    }
    if (config.target_dev_f1 && rec.dev_f1 >= *config.target_dev_f1) break;
    if (since_best >= config.patience) break;
  }
  params.restore(state.best_params);
  return state;
}

TrainState train(ParserModel& model, std::span<const TreebankEntry> train_set,
                 std::span<const TreebankEntry> dev_set, const TrainConfig& config) {
  config.validate();
  return train(model, train_set, dev_set, config, config.learning_rates.front());
}

SweepResult sweep(ParserModel& model, std::span<const TreebankEntry> train_set,
                  std::span<const TreebankEntry> dev_set, const TrainConfig& config) {
  config.validate();
  const std::vector<Tensor> initial = model.params().snapshot();
  TrainConfig run_config = config;
  run_config.output_dir.clear();
  SweepResult result;
  for (std::size_t k = 0; k < config.learning_rates.size(); ++k) {
    model.params().restore(initial);
    if (config.log != nullptr) *config.log << "# learning rate " << config.learning_rates[k] << '\n';
    result.runs.push_back(train(model, train_set, dev_set, run_config, config.learning_rates[k]));
    if (result.runs[k].best_dev_f1 > result.runs[result.best].best_dev_f1) result.best = k;
  }
  TrainState& best = result.runs[result.best];
  model.params().restore(best.best_params);
  if (!config.output_dir.empty()) {
    model.save(config.output_dir);
    best.best_checkpoint = (fs::path(config.output_dir) / "model.ckpt").string();
    std::ofstream log_file(fs::path(config.output_dir) / "train.log", std::ios::trunc);
    for (std::size_t k = 0; k < result.runs.size(); ++k) {
      log_file << "# learning rate " << result.runs[k].learning_rate << '\n';
      for (const auto& rec : result.runs[k].log) log_file << rec.to_line() << '\n';
    }
  }
  return result;
}

}  // namespace spanparse
