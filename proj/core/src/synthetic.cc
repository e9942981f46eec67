#include "spanparse/synthetic.h"

#include <random>
#include <stdexcept>
#include <string>

namespace spanparse {

namespace {

int pick(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

void push(Sentence& tokens, std::string word, std::string tag) {
  tokens.push_back(Token{std::move(word), std::move(tag)});
}

ParseTree noun_phrase(std::mt19937_64& rng, Sentence& tokens) {
  std::vector<ParseTree> kids;
  if (pick(rng, 0, 1) == 0) {
    push(tokens, "d" + std::to_string(pick(rng, 0, 3)), "D");
    kids.push_back(ParseTree::make_leaf(static_cast<int>(tokens.size()) - 1));
    const int adjectives = pick(rng, 0, 2);
    for (int a = 0; a < adjectives; ++a) {
      push(tokens, "a" + std::to_string(pick(rng, 0, 3)), "A");
      kids.push_back(ParseTree::make_leaf(static_cast<int>(tokens.size()) - 1));
    }
  }
  push(tokens, "n" + std::to_string(pick(rng, 0, 5)), "N");
  kids.push_back(ParseTree::make_leaf(static_cast<int>(tokens.size()) - 1));
  return ParseTree::make_node("NP", std::move(kids));
}

ParseTree clause(std::mt19937_64& rng, Sentence& tokens, int remaining) {
  ParseTree np = noun_phrase(rng, tokens);
  std::vector<ParseTree> kids;
  kids.push_back(std::move(np));
  if (remaining > 1 && pick(rng, 0, 1) == 0) {
    kids.push_back(clause(rng, tokens, remaining - 1));
  } else {
    push(tokens, "v" + std::to_string(pick(rng, 0, 5)), "V");
    kids.push_back(ParseTree::make_leaf(static_cast<int>(tokens.size()) - 1));
  }
  return ParseTree::make_node("S", std::move(kids));
}

}  // namespace

std::vector<TreebankEntry> regular_grammar_treebank(int sentences, std::uint64_t seed, int max_clauses) {
  if (sentences < 0 || max_clauses < 1) throw std::invalid_argument("regular_grammar_treebank: bad sizes");
  std::mt19937_64 rng(seed);
  std::vector<TreebankEntry> out;
  for (int s = 0; s < sentences; ++s) {
    TreebankEntry e;
    e.tree = clause(rng, e.tokens, max_clauses);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<TreebankEntry> trigram_cue_treebank(int sentences, std::uint64_t seed, int min_words,
                                                int max_words) {
  if (sentences < 0 || min_words < 1 || max_words < min_words) {
    throw std::invalid_argument("trigram_cue_treebank: bad sizes");
  }
  std::mt19937_64 rng(seed);
  auto tok = [](int k) { return "t" + std::to_string(((k % 12) + 12) % 12); };
  std::vector<TreebankEntry> out;
  for (int s = 0; s < sentences; ++s) {
    TreebankEntry e;
    std::vector<ParseTree> words;
    const int m = pick(rng, min_words, max_words);
    for (int w = 0; w < m; ++w) {
      const int k = pick(rng, 0, 11);
      const bool swapped = pick(rng, 0, 1) == 1;
      const std::string x = tok(k + 1), y = tok(k + 2), z = tok(k);
      const int base = static_cast<int>(e.tokens.size());
      e.tokens.push_back(Token{swapped ? y : x, std::nullopt});
      e.tokens.push_back(Token{swapped ? x : y, std::nullopt});
      e.tokens.push_back(Token{z, std::nullopt});
      words.push_back(ParseTree::make_node(swapped ? "Q" : "P",
                                           {ParseTree::make_leaf(base), ParseTree::make_leaf(base + 1),
                                            ParseTree::make_leaf(base + 2)}));
    }
    e.tree = ParseTree::make_node("S", std::move(words));
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace spanparse
