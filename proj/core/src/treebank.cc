#include "spanparse/treebank.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <utility>

#include "spanparse/errors.h"

namespace spanparse {

ParseTree ParseTree::make_leaf(int index) {
  ParseTree t;
  t.leaf = index;
  return t;
}

ParseTree ParseTree::make_node(std::string label, std::vector<ParseTree> children) {
  ParseTree t;
  t.label = std::move(label);
  t.children = std::move(children);
  return t;
}

int ParseTree::length() const {
  if (is_leaf()) return 1;
  int n = 0;
  for (const auto& c : children) n += c.length();
  return n;
}

LabelSet::LabelSet() { add(std::string(kEmptyName)); }

int LabelSet::add(const std::string& label) {
  auto it = index_.find(label);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(labels_.size());
  labels_.push_back(label);
  index_.emplace(label, id);
  return id;
}

int LabelSet::find(const std::string& label) const {
  auto it = index_.find(label);
  return it == index_.end() ? -1 : it->second;
}

int LabelSet::id(const std::string& label) const {
  const int id = find(label);
  if (id < 0) throw DataError("label not in label set: " + label);
  return id;
}

namespace {

void collect_labels(const ParseTree& t, std::vector<std::string>& out) {
  if (t.is_leaf()) return;
  out.push_back(t.label);
  for (const auto& c : t.children) collect_labels(c, out);
}

}  // namespace

LabelSet LabelSet::from_trees(std::span<const ParseTree> trees) {
  std::vector<std::string> all;
  for (const auto& t : trees) collect_labels(t, all);
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  LabelSet set;
  for (const auto& l : all) set.add(l);
  return set;
}

// ---------------------------------------------------------------------------
// Reading

namespace {

struct SExpr {
  bool atom = false;
  std::string text;  // atom text or node label
  std::vector<SExpr> children;
};

class LineParser {
 public:
  LineParser(std::string_view line, int line_no) : s_(line), line_(line_no) {}

  SExpr parse() {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != '(') throw ParseError(line_, "expected '('");
    SExpr e = parse_node();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError(line_, "trailing text after tree");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string read_atom() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != '(' && s_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
    return std::string(s_.substr(start, pos_ - start));
  }

  SExpr parse_node() {
    ++pos_;  // '('
    SExpr node;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '(' && s_[pos_] != ')') node.text = read_atom();
    while (true) {
      skip_ws();
      if (pos_ >= s_.size()) throw ParseError(line_, "unbalanced brackets: missing ')'");
      if (s_[pos_] == ')') {
        ++pos_;
        return node;
      }
      if (s_[pos_] == '(') {
        node.children.push_back(parse_node());
      } else {
        SExpr a;
        a.atom = true;
        a.text = read_atom();
        node.children.push_back(std::move(a));
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

std::string strip_function_tags(const std::string& label) {
  if (label.empty() || label[0] == '-') return label;
  const auto cut = label.find_first_of("-=");
  return cut == std::string::npos ? label : label.substr(0, cut);
}

bool is_preterminal(const SExpr& e) {
  return !e.atom && e.children.size() == 1 && e.children[0].atom;
}

// Returns false when the subtree vanishes (only -NONE- material).
bool convert(const SExpr& e, Sentence& tokens, ParseTree& out, int line) {
  if (e.atom) {
    out = ParseTree::make_leaf(static_cast<int>(tokens.size()));
    tokens.push_back(Token{unescape_token(e.text), std::nullopt});
    return true;
  }
  if (is_preterminal(e)) {
    if (e.text == "-NONE-") return false;
    out = ParseTree::make_leaf(static_cast<int>(tokens.size()));
    tokens.push_back(Token{unescape_token(e.children[0].text), e.text});
    return true;
  }
  std::vector<ParseTree> kids;
  for (const auto& c : e.children) {
    ParseTree k;
    if (convert(c, tokens, k, line)) kids.push_back(std::move(k));
  }
  if (kids.empty()) return false;
  std::string label = strip_function_tags(e.text);
  if (label.empty()) throw ParseError(line, "constituent without a label");
  out = ParseTree::make_node(std::move(label), std::move(kids));
  return true;
}

}  // namespace

std::vector<TreebankEntry> read_bracketed(std::string_view text) {
  std::vector<TreebankEntry> out;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (nl == std::string_view::npos) break;
      continue;
    }
    SExpr e = LineParser(line, line_no).parse();
    // Unlabeled wrappers such as "( (S ...) )".
    while (e.text.empty() && e.children.size() == 1 && !e.children[0].atom) {
      SExpr inner = std::move(e.children[0]);
      e = std::move(inner);
    }
    if (e.text.empty() && e.children.empty()) throw ParseError(line_no, "empty tree");
    if (is_preterminal(e)) throw ParseError(line_no, "tree has no constituent above the POS level");
    TreebankEntry entry;
    if (!convert(e, entry.tokens, entry.tree, line_no)) throw ParseError(line_no, "empty tree");
    out.push_back(std::move(entry));
    if (nl == std::string_view::npos) break;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<TreebankEntry> read_treebank_file(const std::string& path) {
  try {
    return read_bracketed(read_file(path));
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string escape_token(std::string_view surface) {
  if (surface == "(") return "-LRB-";
  if (surface == ")") return "-RRB-";
  if (surface == "{") return "-LCB-";
  if (surface == "}") return "-RCB-";
  return std::string(surface);
}

std::string unescape_token(std::string_view atom) {
  if (atom == "-LRB-") return "(";
  if (atom == "-RRB-") return ")";
  if (atom == "-LCB-") return "{";
  if (atom == "-RCB-") return "}";
  return std::string(atom);
}

namespace {

void write_tree(const ParseTree& t, std::span<const Token> tokens, std::string& out) {
  if (t.is_leaf()) {
    const Token& tok = tokens[static_cast<std::size_t>(t.leaf)];
    if (tok.pos) {
      out += '(';
      out += *tok.pos;
      out += ' ';
      out += escape_token(tok.surface);
      out += ')';
    } else {
      out += escape_token(tok.surface);
    }
    return;
  }
  out += '(';
  out += t.label;
  for (const auto& c : t.children) {
    out += ' ';
    write_tree(c, tokens, out);
  }
  out += ')';
}

}  // namespace

std::string write_bracketed(const ParseTree& tree, std::span<const Token> tokens) {
  if (tree.length() != static_cast<int>(tokens.size())) {
    throw DataError("write_bracketed: tree covers " + std::to_string(tree.length()) +
                    " tokens, sentence has " + std::to_string(tokens.size()));
  }
  std::string out;
  write_tree(tree, tokens, out);
  return out;
}

// ---------------------------------------------------------------------------
// Unary chains and spans

ParseTree collapse_unaries(const ParseTree& tree, std::string_view sep) {
  if (tree.is_leaf()) return tree;
  std::string label = tree.label;
  const ParseTree* cur = &tree;
  while (cur->children.size() == 1 && !cur->children[0].is_leaf()) {
    cur = &cur->children[0];
    label += sep;
    label += cur->label;
  }
  std::vector<ParseTree> kids;
  kids.reserve(cur->children.size());
  for (const auto& c : cur->children) kids.push_back(collapse_unaries(c, sep));
  return ParseTree::make_node(std::move(label), std::move(kids));
}

namespace {

int spans_rec(const ParseTree& t, int start, const LabelSet& labels,
              std::vector<LabeledSpan>& out) {
  if (t.is_leaf()) return start + 1;
  int end = start;
  for (const auto& c : t.children) end = spans_rec(c, end, labels, out);
  out.push_back(LabeledSpan{start, end, labels.id(t.label)});
  return end;
}

int brackets_rec(const ParseTree& t, int start, std::vector<Bracket>& out) {
  if (t.is_leaf()) return start + 1;
  const std::size_t slot = out.size();
  out.push_back(Bracket{start, start, t.label});
  int end = start;
  for (const auto& c : t.children) end = brackets_rec(c, end, out);
  out[slot].j = end;
  return end;
}

std::vector<std::string> split_chain(const std::string& label, std::string_view sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto at = label.find(sep, start);
    if (at == std::string::npos) {
      parts.push_back(label.substr(start));
      return parts;
    }
    parts.push_back(label.substr(start, at - start));
    start = at + sep.size();
  }
}

}  // namespace

std::vector<LabeledSpan> tree_to_spans(const ParseTree& tree, const LabelSet& labels) {
  std::vector<LabeledSpan> out;
  spans_rec(tree, 0, labels, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Bracket> tree_brackets(const ParseTree& tree) {
  std::vector<Bracket> out;
  brackets_rec(tree, 0, out);
  return out;
}

ParseTree spans_to_tree(std::span<const LabeledSpan> spans, int q, const LabelSet& labels,
                        std::string_view sep) {
  if (q < 1) throw DataError("spans_to_tree: sentence length must be positive");
  std::vector<LabeledSpan> sorted;
  for (const auto& s : spans) {
    if (s.i < 0 || s.j > q || s.i >= s.j) {
      throw DataError("spans_to_tree: span (" + std::to_string(s.i) + ", " +
                      std::to_string(s.j) + ") outside sentence of length " + std::to_string(q));
    }
    if (s.label < 0 || s.label >= labels.size()) throw DataError("spans_to_tree: bad label id");
  }
  // Laminarity over all spans, including empty-labeled ones.
  for (std::size_t a = 0; a < spans.size(); ++a) {
    for (std::size_t b = a + 1; b < spans.size(); ++b) {
      const auto& x = spans[a];
      const auto& y = spans[b];
      const bool crossing = (x.i < y.i && y.i < x.j && x.j < y.j) ||
                            (y.i < x.i && x.i < y.j && y.j < x.j);
      if (crossing) {
        throw DataError("spans_to_tree: crossing spans (" + std::to_string(x.i) + ", " +
                        std::to_string(x.j) + ") and (" + std::to_string(y.i) + ", " +
                        std::to_string(y.j) + ")");
      }
    }
    if (spans[a].label != LabelSet::kEmpty) sorted.push_back(spans[a]);
  }
  // Outermost first, so parents precede children.
  std::sort(sorted.begin(), sorted.end(), [](const LabeledSpan& a, const LabeledSpan& b) {
    if (a.i != b.i) return a.i < b.i;
    return a.j > b.j;
  });
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k].i == sorted[k - 1].i && sorted[k].j == sorted[k - 1].j) {
      throw DataError("spans_to_tree: duplicate labeled span (" + std::to_string(sorted[k].i) +
                      ", " + std::to_string(sorted[k].j) + ")");
    }
  }
  if (sorted.empty() || sorted[0].i != 0 || sorted[0].j != q) {
    throw DataError("spans_to_tree: missing labeled root span (0, " + std::to_string(q) + ")");
  }

  // children[k] lists direct child span indices of span k.
  std::vector<std::vector<std::size_t>> children(sorted.size());
  std::vector<std::size_t> stack;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    while (!stack.empty() && sorted[stack.back()].j <= sorted[k].i) stack.pop_back();
    if (!stack.empty()) children[stack.back()].push_back(k);
    stack.push_back(k);
  }

  auto build = [&](auto&& self, std::size_t k) -> ParseTree {
    const LabeledSpan& s = sorted[k];
    std::vector<ParseTree> kids;
    int pos = s.i;
    for (std::size_t c : children[k]) {
      for (; pos < sorted[c].i; ++pos) kids.push_back(ParseTree::make_leaf(pos));
      kids.push_back(self(self, c));
      pos = sorted[c].j;
    }
    for (; pos < s.j; ++pos) kids.push_back(ParseTree::make_leaf(pos));
    const auto chain = split_chain(labels.name(s.label), sep);
    ParseTree node = ParseTree::make_node(chain.back(), std::move(kids));
    for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) {
      std::vector<ParseTree> one;
      one.push_back(std::move(node));
      node = ParseTree::make_node(*it, std::move(one));
    }
    return node;
  };
  return build(build, 0);
}

// ---------------------------------------------------------------------------
// Sidecars

std::vector<std::vector<std::string>> read_pos_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open POS file: " + path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<std::string> tags;
    for (std::string t; ss >> t;) tags.push_back(t);
    if (tags.empty()) continue;
    out.push_back(std::move(tags));
  }
  return out;
}

void attach_pos(std::vector<TreebankEntry>& entries,
                std::span<const std::vector<std::string>> tags) {
  if (tags.size() != entries.size()) {
    throw DataError("POS file has " + std::to_string(tags.size()) + " sentences, treebank has " +
                    std::to_string(entries.size()));
  }
  for (std::size_t s = 0; s < entries.size(); ++s) {
    auto& toks = entries[s].tokens;
    if (tags[s].size() != toks.size()) {
      throw DataError("POS line " + std::to_string(s + 1) + " has " +
                      std::to_string(tags[s].size()) + " tags for " +
                      std::to_string(toks.size()) + " tokens");
    }
    for (std::size_t t = 0; t < toks.size(); ++t) toks[t].pos = tags[s][t];
  }
}

std::vector<Sentence> read_raw_sentences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    Sentence s;
    for (std::string w; ss >> w;) s.push_back(Token{unescape_token(w), std::nullopt});
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace spanparse
