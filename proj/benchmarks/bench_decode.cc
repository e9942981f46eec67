#include <benchmark/benchmark.h>

#include <random>

#include "spanparse/chart_decoder.h"

namespace {

spanparse::ScoreChart random_chart(int q, int labels) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> nd(0.0, 1.0);
  spanparse::ScoreChart c(q, labels);
  for (const auto& [i, j] : c.index().spans()) {
    for (int l = 0; l < labels; ++l) c.at(i, j, l) = nd(rng);
  }
  return c;
}

void BM_Decode(benchmark::State& state) {
  const auto chart = random_chart(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(spanparse::decode(chart));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Decode)->Args({10, 30})->Args({25, 30})->Args({50, 30})->Args({100, 30})->Unit(benchmark::kMillisecond);

void BM_DecodeAugmented(benchmark::State& state) {
  const int q = static_cast<int>(state.range(0));
  const auto chart = random_chart(q, 30);
  std::vector<spanparse::LabeledSpan> gold = {{0, q, 1}};
  for (int i = 0; i < q; ++i) gold.push_back({i, i + 1, 2});
  for (auto _ : state) benchmark::DoNotOptimize(spanparse::decode_augmented(chart, gold));
}
BENCHMARK(BM_DecodeAugmented)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
