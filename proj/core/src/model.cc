#include "spanparse/model.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "spanparse/errors.h"
#include "parallel.h"

namespace spanparse {

namespace fs = std::filesystem;

std::string ModelConfig::to_text() const {
  std::ostringstream out;
  out << "mode=" << to_string(mode) << '\n'
      << "vocab_size=" << encoder.vocab_size << '\n'
      << "d_model=" << encoder.d_model << '\n'
      << "layers=" << encoder.layers << '\n'
      << "heads=" << encoder.heads << '\n'
      << "ff_width=" << encoder.ff_width << '\n'
      << "max_len=" << encoder.max_len << '\n'
      << "use_pos=" << (encoder.use_pos ? 1 : 0) << '\n'
      << "pos_vocab_size=" << encoder.pos_vocab_size << '\n'
      << "d_pos=" << encoder.d_pos << '\n'
      << "head_hidden=" << head_hidden << '\n'
      << "max_ngram=" << max_ngram << '\n'
      << "seed=" << seed << '\n';
  return out.str();
}

ModelConfig ModelConfig::from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get_int = [&](const char* key, int fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
      return std::stoi(it->second);
    } catch (const std::exception&) {
      throw DataError(std::string("model config: bad integer for ") + key);
    }
  };
  ModelConfig c;
  if (auto it = kv.find("mode"); it != kv.end()) {
    try {
      c.mode = parse_attention_mode(it->second);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("model config: ") + e.what());
    }
  }
  c.encoder.vocab_size = get_int("vocab_size", 0);
  c.encoder.d_model = get_int("d_model", c.encoder.d_model);
  c.encoder.layers = get_int("layers", c.encoder.layers);
  c.encoder.heads = get_int("heads", c.encoder.heads);
  c.encoder.ff_width = get_int("ff_width", c.encoder.ff_width);
  c.encoder.max_len = get_int("max_len", c.encoder.max_len);
  c.encoder.use_pos = get_int("use_pos", 0) != 0;
  c.encoder.pos_vocab_size = get_int("pos_vocab_size", 0);
  c.encoder.d_pos = get_int("d_pos", c.encoder.d_pos);
  c.head_hidden = get_int("head_hidden", c.head_hidden);
  c.max_ngram = get_int("max_ngram", c.max_ngram);
  c.seed = static_cast<std::uint64_t>(get_int("seed", 1));
  return c;
}

ParserModel::ParserModel(ModelConfig config, Vocab words, Vocab tags, LabelSet labels,
                         NGramLexicon lexicon)
    : config_(std::move(config)),
      words_(std::move(words)),
      tags_(std::move(tags)),
      labels_(std::move(labels)),
      params_(std::make_unique<ParamRegistry>()) {
  if (config_.mode != AttentionMode::kBaseline && config_.max_ngram < 1) {
    throw std::invalid_argument("model: max_ngram must be at least 1");
  }
  if (labels_.size() < 2) throw DataError("model: label set has no constituent labels");
  lexicon_ = config_.mode == AttentionMode::kBaseline || lexicon.max_len() <= config_.max_ngram
                 ? std::move(lexicon)
                 : max_len_filter(lexicon, config_.max_ngram);
  Initializer init(config_.seed);
  encoder_ = std::make_unique<Encoder>(config_.encoder, *params_, init);
  const int d_r = config_.encoder.span_width();
  if (config_.mode != AttentionMode::kBaseline) {
    params_->add("attention.ngram_emb", init.uniform(static_cast<std::size_t>(lexicon_.size()),
                                                     static_cast<std::size_t>(d_r), -0.01, 0.01));
    if (config_.mode == AttentionMode::kCatSA) {
      params_->add("attention.scale_raw",
                   Tensor(1, static_cast<std::size_t>(config_.max_ngram), unit_scale_raw()));
    }
  }
  head_ = std::make_unique<ScoringHead>(head_input_width(config_.mode, d_r, config_.max_ngram),
                                        config_.head_hidden, labels_.size(), *params_, init);
  bind();
}

ParserModel::ParserModel(ModelConfig config, Vocab words, Vocab tags, LabelSet labels,
                         NGramLexicon lexicon, std::unique_ptr<ParamRegistry> params)
    : config_(std::move(config)),
      words_(std::move(words)),
      tags_(std::move(tags)),
      labels_(std::move(labels)),
      lexicon_(std::move(lexicon)),
      params_(std::move(params)) {
  encoder_ = std::make_unique<Encoder>(config_.encoder, *params_);
  head_ = std::make_unique<ScoringHead>(
      head_input_width(config_.mode, config_.encoder.span_width(), config_.max_ngram),
      config_.head_hidden, labels_.size(), std::as_const(*params_));
  bind();
}

void ParserModel::bind() {
  ngram_emb_ = params_->find("attention.ngram_emb");
  scale_raw_ = params_->find("attention.scale_raw");
  if (config_.mode != AttentionMode::kBaseline && ngram_emb_ == nullptr) {
    throw DataError("model: attention mode without n-gram embeddings");
  }
  if (config_.mode == AttentionMode::kCatSA && scale_raw_ == nullptr) {
    throw DataError("model: CatSA mode without category scales");
  }
  if (ngram_emb_ != nullptr && ngram_emb_->value.rows() != static_cast<std::size_t>(lexicon_.size())) {
    throw DataError("model: n-gram embedding rows do not match the lexicon size");
  }
}

ParserModel ParserModel::build(ModelConfig config, std::span<const TreebankEntry> train,
                               NGramLexicon lexicon) {
  std::vector<Sentence> sentences;
  std::vector<ParseTree> trees;
  int longest = 0;
  bool any_pos = false;
  for (const auto& e : train) {
    sentences.push_back(e.tokens);
    trees.push_back(collapse_unaries(e.tree));
    longest = std::max(longest, static_cast<int>(e.tokens.size()));
    for (const auto& t : e.tokens) any_pos = any_pos || t.pos.has_value();
  }
  Vocab words = Vocab::from_words(sentences);
  Vocab tags = Vocab::from_tags(sentences);
  if (config.encoder.use_pos && !any_pos) {
    throw DataError("model: POS features requested but the training data has no tags");
  }
  config.encoder.vocab_size = words.size();
  config.encoder.pos_vocab_size = config.encoder.use_pos ? tags.size() : 0;
  config.encoder.max_len = std::max(config.encoder.max_len, longest);
  return ParserModel(std::move(config), std::move(words), std::move(tags), LabelSet::from_trees(trees),
                     std::move(lexicon));
}

void save_labels(const std::string& path, const LabelSet& labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write labels: " + path);
  for (int i = 0; i < labels.size(); ++i) out << labels.name(i) << '\t' << i << '\n';
}

LabelSet load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels: " + path);
  LabelSet labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const std::string name = line.substr(0, tab);
    const int id = tab == std::string::npos ? -1 : std::atoi(line.c_str() + tab + 1);
    const int got = name == LabelSet::kEmptyName ? LabelSet::kEmpty : labels.add(name);
    if (got != id) throw DataError(path + ":" + std::to_string(line_no) + ": label ids out of order");
  }
  return labels;
}

void ParserModel::save(const std::string& dir) const {
  fs::create_directories(dir);
  const fs::path p(dir);
  {
    std::ofstream out(p / "model.cfg", std::ios::trunc);
    if (!out) throw DataError("cannot write " + (p / "model.cfg").string());
    out << config_.to_text();
  }
  save_checkpoint((p / "model.ckpt").string(), *params_);
  words_.save_tsv((p / "words.tsv").string());
  tags_.save_tsv((p / "pos.tsv").string());
  save_labels((p / "labels.tsv").string(), labels_);
  lexicon_.save_tsv((p / "lexicon.tsv").string());
}

ParserModel ParserModel::load(const std::string& dir) {
  const fs::path p(dir);
  if (!fs::is_directory(p)) throw DataError("model directory not found: " + dir);
  ModelConfig config = ModelConfig::from_text(read_file((p / "model.cfg").string()));
  Vocab words = Vocab::load_tsv((p / "words.tsv").string());
  Vocab tags = Vocab::load_tsv((p / "pos.tsv").string());
  LabelSet labels = load_labels((p / "labels.tsv").string());
  NGramLexicon lexicon = NGramLexicon::load_tsv((p / "lexicon.tsv").string());
  if (lexicon.max_len() == 0) lexicon = NGramLexicon(config.max_ngram, lexicon.min_freq());
  auto params = std::make_unique<ParamRegistry>();
  for (auto& [name, value] : read_checkpoint((p / "model.ckpt").string())) {
    params->add(name, std::move(value));
  }
  return ParserModel(std::move(config), std::move(words), std::move(tags), std::move(labels),
                     std::move(lexicon), std::move(params));
}

PreparedSentence ParserModel::prepare(const Sentence& sentence) const {
  if (sentence.empty()) throw DataError("cannot parse an empty sentence");
  PreparedSentence p;
  p.length = static_cast<int>(sentence.size());
  std::vector<std::string> surfaces;
  surfaces.reserve(sentence.size());
  for (const auto& t : sentence) {
    surfaces.push_back(t.surface);
    p.word_ids.push_back(words_.id(t.surface));
    if (config_.encoder.use_pos) p.tag_ids.push_back(t.pos ? tags_.id(*t.pos) : Vocab::kUnkId);
  }
  const SpanIndex index(p.length);
  p.spans = index.spans();
  if (config_.mode != AttentionMode::kBaseline) {
    const SentenceMatches matches(surfaces, lexicon_);
    p.candidates.reserve(p.spans.size());
    for (const auto& [i, j] : p.spans) p.candidates.push_back(matches.for_span(i, j));
  }
  return p;
}

Var ParserModel::score_vars(Graph& g, const PreparedSentence& input,
                            std::vector<std::vector<double>>* weights_out) const {
  Var h = encoder_->encode(g, input.word_ids, input.tag_ids);
  Var r = ops::span_diff(g, h, input.spans);
  if (config_.mode == AttentionMode::kBaseline) return head_->forward(g, r);
  Var scale = config_.mode == AttentionMode::kCatSA ? g.param(*scale_raw_) : Var{};
  Var a = span_attention_op(g, r, g.param(*ngram_emb_), scale, input.candidates, config_.mode,
                            config_.max_ngram, weights_out);
  const Var parts[] = {r, a};
  return head_->forward(g, ops::concat_cols(g, parts));
}

ScoreChart ParserModel::score_chart(const Sentence& sentence) const {
  const PreparedSentence input = prepare(sentence);
  Graph g;
  Var s = score_vars(g, input);
  return ScoreChart(input.length, g.value(s));
}

ParseTree ParserModel::parse(const Sentence& sentence) const {
  const ScoreChart chart = score_chart(sentence);
  const DecodeResult best = decode(chart);
  return spans_to_tree(best.spans, chart.length(), labels_);
}

std::vector<ParseTree> parse_all(const ParserModel& model, std::span<const Sentence> sentences,
                                 int threads) {
  std::vector<ParseTree> out(sentences.size());
  detail::parallel_for(sentences.size(), threads, [&](std::size_t k) { out[k] = model.parse(sentences[k]); });
  return out;
}

}  // namespace spanparse
