#include "spanparse/chart_decoder.h"

#include <algorithm>
#include <limits>

#include "spanparse/errors.h"

namespace spanparse {

Chart::Chart(int q)
    : index(q),
      best(static_cast<std::size_t>(index.count()), 0.0),
      best_label(static_cast<std::size_t>(index.count()), 0),
      best_split(static_cast<std::size_t>(index.count()), -1) {}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <typename Cost>
DecodeResult cky(const ScoreChart& scores, Chart& chart, Cost cost) {
  const int q = scores.length();
  const int nl = scores.num_labels();
  if (nl < 2) throw DataError("decode: need at least one non-empty label");
  const SpanIndex& idx = scores.index();
  for (int len = 1; len <= q; ++len) {
    for (int i = 0; i + len <= q; ++i) {
      const int j = i + len;
      const auto s = static_cast<std::size_t>(idx.index(i, j));
      const bool root = (i == 0 && j == q);
      int arg = root ? 1 : 0;
      double label_best = scores(i, j, arg) + cost(i, j, arg);
      for (int l = arg + 1; l < nl; ++l) {
        const double v = scores(i, j, l) + cost(i, j, l);
        if (v > label_best) {
          label_best = v;
          arg = l;
        }
      }
      double split_best = 0.0;
      int split = -1;
      if (len > 1) {
        split_best = kNegInf;
        for (int k = i + 1; k < j; ++k) {
          const double v = chart.best[static_cast<std::size_t>(idx.index(i, k))] +
                           chart.best[static_cast<std::size_t>(idx.index(k, j))];
          if (v > split_best) {
            split_best = v;
            split = k;
          }
        }
      }
      chart.best[s] = label_best + split_best;
      chart.best_label[s] = arg;
      chart.best_split[s] = split;
    }
  }

  DecodeResult result;
  result.score = chart.best[static_cast<std::size_t>(idx.index(0, q))];
  std::vector<std::pair<int, int>> stack = {{0, q}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    const auto s = static_cast<std::size_t>(idx.index(i, j));
    result.spans.push_back(LabeledSpan{i, j, chart.best_label[s]});
    if (chart.best_split[s] >= 0) {
      stack.emplace_back(chart.best_split[s], j);
      stack.emplace_back(i, chart.best_split[s]);
    }
  }
  std::sort(result.spans.begin(), result.spans.end());
  return result;
}

}  // namespace

DecodeResult decode(const ScoreChart& scores, Chart& chart) {
  return cky(scores, chart, [](int, int, int) { return 0.0; });
}

DecodeResult decode(const ScoreChart& scores) {
  Chart chart(scores.length());
  return decode(scores, chart);
}

GoldLabels::GoldLabels(std::span<const LabeledSpan> gold, int q)
    : q_(q), table_(static_cast<std::size_t>((q + 1) * (q + 1)), LabelSet::kEmpty) {
  for (const auto& s : gold) {
    if (s.i < 0 || s.j > q || s.i >= s.j) {
      throw DataError("gold span (" + std::to_string(s.i) + ", " + std::to_string(s.j) +
                      ") inconsistent with sentence length " + std::to_string(q));
    }
    if (s.label != LabelSet::kEmpty) table_[static_cast<std::size_t>(s.i * (q + 1) + s.j)] = s.label;
  }
}

DecodeResult decode_augmented(const ScoreChart& scores, std::span<const LabeledSpan> gold) {
  const GoldLabels gl(gold, scores.length());
  Chart chart(scores.length());
  return cky(scores, chart, [&gl](int i, int j, int l) { return l == gl(i, j) ? 0.0 : 1.0; });
}

double tree_score(const ScoreChart& scores, std::span<const LabeledSpan> spans) {
  double total = 0.0;
  for (const auto& s : spans) total += scores(s.i, s.j, s.label);
  return total;
}

DecodeResult best_gold_binarization(const ScoreChart& scores, std::span<const LabeledSpan> gold) {
  const int q = scores.length();
  std::vector<LabeledSpan> nodes;
  for (const auto& s : gold) {
    if (s.i < 0 || s.j > q || s.i >= s.j) {
      throw DataError("gold span (" + std::to_string(s.i) + ", " + std::to_string(s.j) +
                      ") inconsistent with sentence length " + std::to_string(q));
    }
    if (s.label != LabelSet::kEmpty) nodes.push_back(s);
  }
  std::sort(nodes.begin(), nodes.end(), [](const LabeledSpan& a, const LabeledSpan& b) {
    if (a.i != b.i) return a.i < b.i;
    return a.j > b.j;
  });
  if (nodes.empty() || nodes[0].i != 0 || nodes[0].j != q) {
    throw DataError("gold tree lacks a labeled root span (0, " + std::to_string(q) + ")");
  }
  std::vector<std::vector<std::size_t>> children(nodes.size());
  std::vector<std::size_t> stack;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    while (!stack.empty() && nodes[stack.back()].j <= nodes[k].i) stack.pop_back();
    if (!stack.empty()) {
      const auto& parent = nodes[stack.back()];
      if (nodes[k].j > parent.j || (nodes[k].i == parent.i && nodes[k].j == parent.j)) {
        throw DataError("gold spans are not a laminar set of distinct spans");
      }
      children[stack.back()].push_back(k);
    }
    stack.push_back(k);
  }

  struct Unit {
    int i, j;
    double score;
    std::vector<LabeledSpan> spans;
  };

  auto solve = [&](auto&& self, std::size_t k) -> Unit {
    const LabeledSpan& node = nodes[k];
    if (node.j - node.i == 1) {
      return Unit{node.i, node.j, scores(node.i, node.j, node.label), {node}};
    }
    std::vector<Unit> units;
    int pos = node.i;
    for (std::size_t c : children[k]) {
      for (; pos < nodes[c].i; ++pos) {
        units.push_back(Unit{pos, pos + 1, scores(pos, pos + 1, LabelSet::kEmpty),
                             {LabeledSpan{pos, pos + 1, LabelSet::kEmpty}}});
      }
      units.push_back(self(self, c));
      pos = nodes[c].j;
    }
    for (; pos < node.j; ++pos) {
      units.push_back(Unit{pos, pos + 1, scores(pos, pos + 1, LabelSet::kEmpty),
                           {LabeledSpan{pos, pos + 1, LabelSet::kEmpty}}});
    }
    const std::size_t m = units.size();
    // best[a][b] over unit ranges a..b, split[a][b] = last unit of the left part.
    std::vector<std::vector<double>> best(m, std::vector<double>(m, 0.0));
    std::vector<std::vector<std::size_t>> split(m, std::vector<std::size_t>(m, 0));
    for (std::size_t a = 0; a < m; ++a) best[a][a] = units[a].score;
    for (std::size_t width = 2; width <= m; ++width) {
      for (std::size_t a = 0; a + width <= m; ++a) {
        const std::size_t b = a + width - 1;
        const int label = width == m ? node.label : LabelSet::kEmpty;
        double bs = kNegInf;
        for (std::size_t c = a; c < b; ++c) {
          const double v = best[a][c] + best[c + 1][b];
          if (v > bs) {
            bs = v;
            split[a][b] = c;
          }
        }
        best[a][b] = bs + scores(units[a].i, units[b].j, label);
      }
    }
    Unit out{node.i, node.j, best[0][m - 1], {}};
    auto emit = [&](auto&& rec, std::size_t a, std::size_t b) -> void {
      if (a == b) {
        out.spans.insert(out.spans.end(), units[a].spans.begin(), units[a].spans.end());
        return;
      }
      const int label = (a == 0 && b == m - 1) ? node.label : LabelSet::kEmpty;
      out.spans.push_back(LabeledSpan{units[a].i, units[b].j, label});
      rec(rec, a, split[a][b]);
      rec(rec, split[a][b] + 1, b);
    };
    emit(emit, 0, m - 1);
    return out;
  };

  Unit root = solve(solve, 0);
  DecodeResult result;
  result.score = root.score;
  result.spans = std::move(root.spans);
  std::sort(result.spans.begin(), result.spans.end());
  return result;
}

}  // namespace spanparse
