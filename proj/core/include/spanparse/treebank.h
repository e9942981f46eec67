#ifndef SPANPARSE_TREEBANK_H_
#define SPANPARSE_TREEBANK_H_

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spanparse {

// Separator joining the labels of a collapsed unary chain, top to bottom.
inline constexpr std::string_view kChainSeparator = "::";

struct Token {
  std::string surface;             // unescaped, e.g. "(" rather than "-LRB-"
  std::optional<std::string> pos;  // gold or predicted tag
};

using Sentence = std::vector<Token>;

// Constituency tree over token indices. A leaf has an empty label and a
// token index; an internal node has a label and at least one child.
// Preterminals are not nodes: POS tags live on the tokens.
struct ParseTree {
  std::string label;
  int leaf = -1;
  std::vector<ParseTree> children;

  static ParseTree make_leaf(int index);
  static ParseTree make_node(std::string label, std::vector<ParseTree> children);

  bool is_leaf() const { return leaf >= 0; }
  // Number of leaves.
  int length() const;
  bool operator==(const ParseTree&) const = default;
};

// Span [i, j) over fenceposts 0..q, i.e. tokens i..j-1, 0-based.
struct LabeledSpan {
  int i = 0;
  int j = 0;
  int label = 0;
  auto operator<=>(const LabeledSpan&) const = default;
};

// Label inventory. Index 0 is the empty label (no constituent), used for
// spans introduced by implicit binarization.
class LabelSet {
 public:
  static constexpr int kEmpty = 0;
  static constexpr std::string_view kEmptyName = "<empty>";

  LabelSet();

  int add(const std::string& label);
  // -1 when absent.
  int find(const std::string& label) const;
  // Throws DataError when absent.
  int id(const std::string& label) const;
  const std::string& name(int id) const { return labels_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }

  // Collects every label of the given (collapsed) trees, sorted for
  // deterministic ids.
  static LabelSet from_trees(std::span<const ParseTree> trees);

 private:
  std::vector<std::string> labels_;
  std::map<std::string, int, std::less<>> index_;
};

struct TreebankEntry {
  ParseTree tree;
  Sentence tokens;
};

// One tree per line, Penn bracket notation. Blank lines are skipped.
// Function tags are stripped, -NONE- elements removed, and an outer
// unlabeled wrapper "( (S ...) )" is dropped. Throws ParseError.
std::vector<TreebankEntry> read_bracketed(std::string_view text);
std::vector<TreebankEntry> read_treebank_file(const std::string& path);

// Canonical single-line bracketing. Tokens with a POS are written as
// "(POS word)", tokens without one as bare words. Brackets are escaped.
std::string write_bracketed(const ParseTree& tree, std::span<const Token> tokens);

std::string escape_token(std::string_view surface);
std::string unescape_token(std::string_view atom);

// Merges every chain of single-internal-child nodes into one node whose
// label joins the chain's labels with `sep`.
ParseTree collapse_unaries(const ParseTree& tree, std::string_view sep = kChainSeparator);

// One span per internal node of a collapsed tree, sorted. Throws DataError
// on a label missing from `labels`.
std::vector<LabeledSpan> tree_to_spans(const ParseTree& tree, const LabelSet& labels);

// Inverse of tree_to_spans: empty-label spans are dropped and composite
// labels re-expanded into chains. Throws DataError on crossing or duplicate
// spans or when (0, q) is missing or unlabeled.
ParseTree spans_to_tree(std::span<const LabeledSpan> spans, int q, const LabelSet& labels,
                        std::string_view sep = kChainSeparator);

// Labeled brackets (i, j, label string) of an uncollapsed tree, in preorder.
struct Bracket {
  int i = 0;
  int j = 0;
  std::string label;
  auto operator<=>(const Bracket&) const = default;
};
std::vector<Bracket> tree_brackets(const ParseTree& tree);

// Predicted-POS sidecar: one line per sentence, whitespace-separated tags.
std::vector<std::vector<std::string>> read_pos_file(const std::string& path);
// Overwrites token POS tags; counts must agree sentence by sentence.
void attach_pos(std::vector<TreebankEntry>& entries,
                std::span<const std::vector<std::string>> tags);

// Whitespace-tokenized raw sentences, one per line.
std::vector<Sentence> read_raw_sentences(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace spanparse

#endif  // SPANPARSE_TREEBANK_H_
