#include "spanparse/encoder.h"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "spanparse/errors.h"

namespace spanparse {

Vocab::Vocab() {
  add(std::string(kUnk));
  add(std::string(kBos));
  add(std::string(kEos));
}

int Vocab::add(const std::string& s) {
  auto it = index_.find(s);
  if (it != index_.end()) return it->second;
  const int id = size();
  names_.push_back(s);
  index_.emplace(s, id);
  return id;
}

int Vocab::id(const std::string& s) const {
  auto it = index_.find(s);
  return it == index_.end() ? kUnkId : it->second;
}

Vocab Vocab::from_words(std::span<const Sentence> sentences) {
  Vocab v;
  for (const auto& s : sentences) {
    for (const auto& t : s) v.add(t.surface);
  }
  return v;
}

Vocab Vocab::from_tags(std::span<const Sentence> sentences) {
  Vocab v;
  for (const auto& s : sentences) {
    for (const auto& t : s) {
      if (t.pos) v.add(*t.pos);
    }
  }
  return v;
}

void Vocab::save_tsv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write vocabulary: " + path);
  for (int i = 0; i < size(); ++i) out << names_[static_cast<std::size_t>(i)] << '\t' << i << '\n';
}

Vocab Vocab::load_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary: " + path);
  Vocab v;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw DataError(path + ":" + std::to_string(line_no) + ": missing id");
    const std::string entry = line.substr(0, tab);
    int expected = 0;
    try {
      expected = std::stoi(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(line_no) + ": bad id");
    }
    if (v.add(entry) != expected) {
      throw DataError(path + ":" + std::to_string(line_no) + ": ids must be dense and ordered");
    }
  }
  return v;
}

void EncoderConfig::validate() const {
  if (vocab_size <= 0) throw std::invalid_argument("encoder: vocab_size must be positive");
  if (d_model <= 0 || heads <= 0 || d_model % heads != 0) {
    throw std::invalid_argument("encoder: d_model (" + std::to_string(d_model) +
                                ") must be a positive multiple of heads (" +
                                std::to_string(heads) + ")");
  }
  if (layers < 0 || ff_width <= 0 || max_len <= 0) {
    throw std::invalid_argument("encoder: layers, ff_width and max_len must be valid");
  }
  if (use_pos && (pos_vocab_size <= 0 || d_pos <= 0)) {
    throw std::invalid_argument("encoder: use_pos requires pos_vocab_size and d_pos");
  }
}

namespace {

std::string layer_name(int l, const char* leaf) {
  return "encoder.layer" + std::to_string(l) + "." + leaf;
}

}  // namespace

Encoder::Encoder(const EncoderConfig& config, ParamRegistry& params, Initializer& init)
    : config_(config) {
  config_.validate();
  const auto d = static_cast<std::size_t>(config_.d_model);
  const auto ff = static_cast<std::size_t>(config_.ff_width);
  params.add("encoder.word_emb",
             init.uniform(static_cast<std::size_t>(config_.vocab_size), d, -0.01, 0.01));
  params.add("encoder.position_emb",
             init.uniform(static_cast<std::size_t>(config_.max_len) + 2, d, -0.01, 0.01));
  for (int l = 0; l < config_.layers; ++l) {
    params.add(layer_name(l, "ln1.gamma"), Tensor(1, d, 1.0));
    params.add(layer_name(l, "ln1.beta"), Tensor(1, d, 0.0));
    params.add(layer_name(l, "attn.wq"), init.glorot(d, d));
    params.add(layer_name(l, "attn.wk"), init.glorot(d, d));
    params.add(layer_name(l, "attn.wv"), init.glorot(d, d));
    params.add(layer_name(l, "attn.wo"), init.glorot(d, d));
    params.add(layer_name(l, "attn.bo"), Tensor(1, d, 0.0));
    params.add(layer_name(l, "ln2.gamma"), Tensor(1, d, 1.0));
    params.add(layer_name(l, "ln2.beta"), Tensor(1, d, 0.0));
    params.add(layer_name(l, "ff.w1"), init.glorot(ff, d));
    params.add(layer_name(l, "ff.b1"), Tensor(1, ff, 0.0));
    params.add(layer_name(l, "ff.w2"), init.glorot(d, ff));
    params.add(layer_name(l, "ff.b2"), Tensor(1, d, 0.0));
  }
  params.add("encoder.final_ln.gamma", Tensor(1, d, 1.0));
  params.add("encoder.final_ln.beta", Tensor(1, d, 0.0));
  if (config_.use_pos) {
    params.add("encoder.tag_emb",
               init.uniform(static_cast<std::size_t>(config_.pos_vocab_size),
                            static_cast<std::size_t>(config_.d_pos), -0.01, 0.01));
  }
  bind(params);
}

Encoder::Encoder(const EncoderConfig& config, const ParamRegistry& params) : config_(config) {
  config_.validate();
  bind(params);
}

void Encoder::bind(const ParamRegistry& params) {
  word_emb_ = &params.get("encoder.word_emb");
  position_emb_ = &params.get("encoder.position_emb");
  final_gamma_ = &params.get("encoder.final_ln.gamma");
  final_beta_ = &params.get("encoder.final_ln.beta");
  tag_emb_ = config_.use_pos ? &params.get("encoder.tag_emb") : nullptr;
  layers_.clear();
  for (int l = 0; l < config_.layers; ++l) {
    layers_.push_back(Layer{
        &params.get(layer_name(l, "ln1.gamma")), &params.get(layer_name(l, "ln1.beta")),
        &params.get(layer_name(l, "attn.wq")),   &params.get(layer_name(l, "attn.wk")),
        &params.get(layer_name(l, "attn.wv")),   &params.get(layer_name(l, "attn.wo")),
        &params.get(layer_name(l, "attn.bo")),   &params.get(layer_name(l, "ln2.gamma")),
        &params.get(layer_name(l, "ln2.beta")),  &params.get(layer_name(l, "ff.w1")),
        &params.get(layer_name(l, "ff.b1")),     &params.get(layer_name(l, "ff.w2")),
        &params.get(layer_name(l, "ff.b2"))});
  }
}

Var Encoder::encode(Graph& g, std::span<const int> word_ids, std::span<const int> tag_ids) const {
  const int q = static_cast<int>(word_ids.size());
  if (q < 1) throw DataError("encode: empty sentence");
  if (q > config_.max_len) {
    throw DataError("encode: sentence length " + std::to_string(q) + " exceeds max_len " +
                    std::to_string(config_.max_len));
  }
  if (config_.use_pos && static_cast<int>(tag_ids.size()) != q) {
    throw DataError("encode: POS tags required for every token when use_pos is set");
  }

  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(q) + 2);
  ids.push_back(Vocab::kBosId);
  ids.insert(ids.end(), word_ids.begin(), word_ids.end());
  ids.push_back(Vocab::kEosId);
  std::vector<int> positions(ids.size());
  std::iota(positions.begin(), positions.end(), 0);

  Var x = ops::add(g, ops::gather_rows(g, g.param(*word_emb_), ids),
                   ops::gather_rows(g, g.param(*position_emb_), positions));

  const int heads = config_.heads;
  const auto dh = static_cast<std::size_t>(config_.d_model / heads);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  for (const Layer& L : layers_) {
    Var n1 = ops::layer_norm(g, x, g.param(*L.ln1_gamma), g.param(*L.ln1_beta));
    Var qm = ops::matmul_nt(g, n1, g.param(*L.wq));
    Var km = ops::matmul_nt(g, n1, g.param(*L.wk));
    Var vm = ops::matmul_nt(g, n1, g.param(*L.wv));
    std::vector<Var> head_out;
    head_out.reserve(static_cast<std::size_t>(heads));
    for (int h = 0; h < heads; ++h) {
      const std::size_t off = static_cast<std::size_t>(h) * dh;
      Var qh = ops::slice_cols(g, qm, off, dh);
      Var kh = ops::slice_cols(g, km, off, dh);
      Var vh = ops::slice_cols(g, vm, off, dh);
      Var att = ops::softmax_rows(g, ops::scale(g, ops::matmul_nt(g, qh, kh), inv_sqrt));
      head_out.push_back(ops::matmul(g, att, vh));
    }
    Var attn = ops::add_row(g, ops::matmul_nt(g, ops::concat_cols(g, head_out), g.param(*L.wo)),
                            g.param(*L.bo));
    x = ops::add(g, x, attn);

    Var n2 = ops::layer_norm(g, x, g.param(*L.ln2_gamma), g.param(*L.ln2_beta));
    Var hidden = ops::relu(g, ops::add_row(g, ops::matmul_nt(g, n2, g.param(*L.ff1)),
                                           g.param(*L.ff1_bias)));
    Var ff = ops::add_row(g, ops::matmul_nt(g, hidden, g.param(*L.ff2)), g.param(*L.ff2_bias));
    x = ops::add(g, x, ff);
  }
  x = ops::layer_norm(g, x, g.param(*final_gamma_), g.param(*final_beta_));
  Var fence = ops::slice_rows(g, x, 0, static_cast<std::size_t>(q) + 1);
  if (!config_.use_pos) return fence;

  std::vector<int> tags;
  tags.reserve(static_cast<std::size_t>(q) + 1);
  tags.push_back(Vocab::kBosId);
  tags.insert(tags.end(), tag_ids.begin(), tag_ids.end());
  Var tag_vecs = ops::gather_rows(g, g.param(*tag_emb_), tags);
  const Var parts[] = {fence, tag_vecs};
  return ops::concat_cols(g, parts);
}

std::vector<double> span_repr(const Tensor& hidden, int i, int j) {
  if (i < 0 || i >= j || static_cast<std::size_t>(j) >= hidden.rows()) {
    throw std::invalid_argument("span_repr: need 0 <= i < j <= q, got (" + std::to_string(i) +
                                ", " + std::to_string(j) + ")");
  }
  std::vector<double> r(hidden.cols());
  auto hi = hidden.row_span(static_cast<std::size_t>(i));
  auto hj = hidden.row_span(static_cast<std::size_t>(j));
  for (std::size_t c = 0; c < r.size(); ++c) r[c] = hj[c] - hi[c];
  return r;
}

}  // namespace spanparse
