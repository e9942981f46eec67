#include "spanparse/evaluator.h"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "spanparse/errors.h"

namespace spanparse {

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

SentenceEval compare(const ParseTree& gold, const ParseTree& pred) {
  std::vector<Bracket> g = tree_brackets(gold);
  std::vector<Bracket> p = tree_brackets(pred);
  std::sort(g.begin(), g.end());
  std::sort(p.begin(), p.end());
  SentenceEval s;
  s.length = gold.length();
  s.gold = static_cast<int>(g.size());
  s.predicted = static_cast<int>(p.size());
  // Multiset intersection of two sorted ranges.
  std::size_t a = 0, b = 0;
  while (a < g.size() && b < p.size()) {
    if (g[a] < p[b]) {
      ++a;
    } else if (p[b] < g[a]) {
      ++b;
    } else {
      ++s.matched;
      ++a;
      ++b;
    }
  }
  s.complete = g == p;
  return s;
}

}  // namespace

EvalReport aggregate(std::vector<SentenceEval> sentences) {
  EvalReport r;
  for (const auto& s : sentences) {
    r.matched += s.matched;
    r.predicted += s.predicted;
    r.gold += s.gold;
    r.complete += s.complete ? 1 : 0;
  }
  r.precision = r.predicted > 0 ? 100.0 * static_cast<double>(r.matched) / static_cast<double>(r.predicted) : 0.0;
  r.recall = r.gold > 0 ? 100.0 * static_cast<double>(r.matched) / static_cast<double>(r.gold) : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.complete_match =
      sentences.empty() ? 0.0 : 100.0 * static_cast<double>(r.complete) / static_cast<double>(sentences.size());
  r.sentences = std::move(sentences);
  return r;
}

EvalReport score_trees(std::span<const ParseTree> gold, std::span<const ParseTree> pred) {
  if (gold.empty() && pred.empty()) throw DataError("evaluation: no sentences");
  if (gold.size() != pred.size()) {
    throw DataError("evaluation: " + std::to_string(gold.size()) + " gold trees but " +
                    std::to_string(pred.size()) + " predicted trees");
  }
  std::vector<SentenceEval> rows;
  rows.reserve(gold.size());
  for (std::size_t k = 0; k < gold.size(); ++k) {
    if (gold[k].length() != pred[k].length()) {
      throw DataError("evaluation: sentence " + std::to_string(k + 1) + " has " +
                      std::to_string(gold[k].length()) + " gold tokens but " +
                      std::to_string(pred[k].length()) + " predicted tokens");
    }
    rows.push_back(compare(gold[k], pred[k]));
  }
  return aggregate(std::move(rows));
}

std::string EvalReport::to_tsv() const {
  std::ostringstream out;
  out << "sentence\tlength\tmatched\tgold\tpredicted\tcomplete\n";
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    const auto& s = sentences[k];
    out << k + 1 << '\t' << s.length << '\t' << s.matched << '\t' << s.gold << '\t' << s.predicted
        << '\t' << (s.complete ? 1 : 0) << '\n';
  }
  out << "total\t-\t" << matched << '\t' << gold << '\t' << predicted << '\t' << complete << '\n';
  return out.str();
}

std::string EvalReport::summary() const {
  std::ostringstream out;
  out << "Number of sentences  = " << sentences.size() << '\n'
      << "Bracketing Recall    = " << fmt2(recall) << '\n'
      << "Bracketing Precision = " << fmt2(precision) << '\n'
      << "Bracketing FMeasure  = " << fmt2(f1) << '\n'
      << "Complete match       = " << fmt2(complete_match) << '\n';
  return out.str();
}

std::vector<Bucket> bucketed_f1(std::span<const ParseTree> gold, std::span<const ParseTree> pred,
                                std::span<const int> thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw std::invalid_argument("bucketed_f1: thresholds must be ascending");
  }
  const EvalReport all = score_trees(gold, pred);
  std::vector<Bucket> out;
  for (int t : thresholds) {
    std::vector<SentenceEval> rows;
    for (const auto& s : all.sentences) {
      if (s.length >= t) rows.push_back(s);
    }
    Bucket b;
    b.min_length = t;
    b.population = rows.size();
    if (!rows.empty()) b.report = aggregate(std::move(rows));
    out.push_back(std::move(b));
  }
  return out;
}

std::string buckets_to_tsv(std::span<const Bucket> buckets) {
  std::ostringstream out;
  out << "min_length\tsentences\tprecision\trecall\tf1\tcomplete_match\n";
  for (const auto& b : buckets) {
    out << b.min_length << '\t' << b.population << '\t';
    if (b.report) {
      out << fmt2(b.report->precision) << '\t' << fmt2(b.report->recall) << '\t' << fmt2(b.report->f1)
          << '\t' << fmt2(b.report->complete_match) << '\n';
    } else {
      out << "NA\tNA\tNA\tNA\n";
    }
  }
  return out.str();
}

std::vector<int> default_length_thresholds() {
  std::vector<int> t;
  for (int l = 5; l <= 50; l += 5) t.push_back(l);
  return t;
}

}  // namespace spanparse
