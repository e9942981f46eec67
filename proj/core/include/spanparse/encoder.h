#ifndef SPANPARSE_ENCODER_H_
#define SPANPARSE_ENCODER_H_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spanparse/autodiff.h"
#include "spanparse/params.h"
#include "spanparse/treebank.h"

namespace spanparse {

// String <-> id table with reserved <unk>, <s>, </s> at ids 0, 1, 2.
class Vocab {
 public:
  static constexpr std::string_view kUnk = "<unk>";
  static constexpr std::string_view kBos = "<s>";
  static constexpr std::string_view kEos = "</s>";
  static constexpr int kUnkId = 0;
  static constexpr int kBosId = 1;
  static constexpr int kEosId = 2;

  Vocab();

  int add(const std::string& s);
  int id(const std::string& s) const;  // kUnkId when absent
  bool contains(const std::string& s) const { return index_.count(s) != 0; }
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(names_.size()); }

  // Word vocabulary from token surfaces, or tag vocabulary from POS tags.
  static Vocab from_words(std::span<const Sentence> sentences);
  static Vocab from_tags(std::span<const Sentence> sentences);

  // TSV "entry<TAB>id", id order.
  void save_tsv(const std::string& path) const;
  static Vocab load_tsv(const std::string& path);

 private:
  std::vector<std::string> names_;
  std::map<std::string, int, std::less<>> index_;
};

struct EncoderConfig {
  int vocab_size = 0;
  int d_model = 64;
  int layers = 3;
  int heads = 4;
  int ff_width = 128;
  int max_len = 256;  // tokens, excluding sentinels
  bool use_pos = false;
  int pos_vocab_size = 0;
  int d_pos = 16;

  // Width d_r of the fencepost vectors and span representations.
  int span_width() const { return d_model + (use_pos ? d_pos : 0); }
  // Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

// Pre-LN transformer stack over "<s> x_1 .. x_q </s>". Row t of the output
// (t in 0..q) is the fencepost vector h_t: the <s> output for t = 0 and the
// output at token t otherwise. With use_pos, the POS embedding of the same
// position (a reserved <s> tag for t = 0) is concatenated on the right.
class Encoder {
 public:
  // Registers all encoder parameters under "encoder." in `params`.
  Encoder(const EncoderConfig& config, ParamRegistry& params, Initializer& init);
  // Binds to parameters already present in `params` (e.g. after loading).
  Encoder(const EncoderConfig& config, const ParamRegistry& params);

  const EncoderConfig& config() const { return config_; }

  // word_ids and tag_ids have one entry per token; tag_ids is ignored (and
  // may be empty) unless use_pos. Returns a (q + 1) x span_width() node.
  Var encode(Graph& g, std::span<const int> word_ids, std::span<const int> tag_ids) const;

 private:
  struct Layer {
    const Parameter* ln1_gamma;
    const Parameter* ln1_beta;
    const Parameter* wq;
    const Parameter* wk;
    const Parameter* wv;
    const Parameter* wo;
    const Parameter* bo;
    const Parameter* ln2_gamma;
    const Parameter* ln2_beta;
    const Parameter* ff1;
    const Parameter* ff1_bias;
    const Parameter* ff2;
    const Parameter* ff2_bias;
  };

  void bind(const ParamRegistry& params);

  EncoderConfig config_;
  const Parameter* word_emb_ = nullptr;
  const Parameter* position_emb_ = nullptr;
  const Parameter* tag_emb_ = nullptr;
  const Parameter* final_gamma_ = nullptr;
  const Parameter* final_beta_ = nullptr;
  std::vector<Layer> layers_;
};

// r_{i,j} = h_j - h_i. Throws std::invalid_argument unless 0 <= i < j < rows.
std::vector<double> span_repr(const Tensor& hidden, int i, int j);

}  // namespace spanparse

#endif  // SPANPARSE_ENCODER_H_
