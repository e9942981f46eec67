#include <benchmark/benchmark.h>

#include "spanparse/model.h"
#include "spanparse/synthetic.h"

namespace {

using namespace spanparse;

ParserModel make_model(AttentionMode mode, const std::vector<TreebankEntry>& data) {
  std::vector<TokenSeq> corpus;
  for (const auto& e : data) {
    TokenSeq s;
    for (const auto& t : e.tokens) s.push_back(t.surface);
    corpus.push_back(s);
  }
  ModelConfig c;
  c.mode = mode;
  return ParserModel::build(c, data, build_lexicon(corpus));
}

void BM_ParseSentence(benchmark::State& state) {
  const auto data = regular_grammar_treebank(200, 5);
  const ParserModel model = make_model(static_cast<AttentionMode>(state.range(0)), data);
  std::size_t k = 0;
  std::int64_t tokens = 0;
  for (auto _ : state) {
    const auto& s = data[k++ % data.size()].tokens;
    tokens += static_cast<std::int64_t>(s.size());
    benchmark::DoNotOptimize(model.parse(s));
  }
  state.counters["tokens/s"] = benchmark::Counter(static_cast<double>(tokens), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ParseSentence)
    ->Arg(static_cast<int>(AttentionMode::kBaseline))
    ->Arg(static_cast<int>(AttentionMode::kSA))
    ->Arg(static_cast<int>(AttentionMode::kCatSA))
    ->Unit(benchmark::kMicrosecond);

}  // namespace
