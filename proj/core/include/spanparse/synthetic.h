#ifndef SPANPARSE_SYNTHETIC_H_
#define SPANPARSE_SYNTHETIC_H_

#include <cstdint>
#include <vector>

#include "spanparse/treebank.h"

namespace spanparse {

// Right-branching toy grammar over 20 word types and labels S, NP:
//   S  -> NP S | NP v
//   NP -> d a{0,2} n | n
// with d0-d3, a0-a3, n0-n5, v0-v5 and POS tags D, A, N, V. `max_clauses`
// bounds the number of NPs per sentence.
std::vector<TreebankEntry> regular_grammar_treebank(int sentences, std::uint64_t seed,
                                                    int max_clauses = 3);

// Flat sentences (S W1 .. Wm) of 3-token words over types t0..t11. Word k
// (k in 0..11) uses x = t(k+1), y = t(k+2), z = t(k) (indices mod 12) and
// comes as "x y z" labeled P or "y x z" labeled Q, so the label depends
// only on the order of the first two tokens.
std::vector<TreebankEntry> trigram_cue_treebank(int sentences, std::uint64_t seed,
                                                int min_words = 2, int max_words = 5);

}  // namespace spanparse

#endif  // SPANPARSE_SYNTHETIC_H_
