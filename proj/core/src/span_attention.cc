#include "spanparse/span_attention.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "spanparse/errors.h"

namespace spanparse {

std::string_view to_string(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::kBaseline: return "baseline";
    case AttentionMode::kSA: return "sa";
    case AttentionMode::kCatSA: return "catsa";
  }
  return "baseline";
}

AttentionMode parse_attention_mode(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "baseline" || lower == "none") return AttentionMode::kBaseline;
  if (lower == "sa") return AttentionMode::kSA;
  if (lower == "catsa") return AttentionMode::kCatSA;
  throw std::invalid_argument("unknown attention mode: " + std::string(name));
}

double unit_scale_raw() { return std::log(std::exp(1.0) - 1.0); }

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

namespace {

// Softmax attention over the candidates listed in `members` (indices into
// cands). Writes weights into weights[members[k]] and accumulates
// scale * sum_k w_k e_k into block.
void attend(std::span<const double> r, std::span<const Candidate> cands,
            std::span<const std::size_t> members, const Tensor& emb, double scale,
            std::span<double> block, std::span<double> weights) {
  if (members.empty()) return;
  const std::size_t d = r.size();
  std::vector<double> logits(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    auto e = emb.row_span(static_cast<std::size_t>(cands[members[k]].id));
    double dot = 0.0;
    for (std::size_t c = 0; c < d; ++c) dot += r[c] * e[c];
    logits[k] = dot;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& l : logits) {
    l = std::exp(l - mx);
    z += l;
  }
  for (std::size_t k = 0; k < members.size(); ++k) {
    const double w = logits[k] / z;
    weights[members[k]] = w;
    auto e = emb.row_span(static_cast<std::size_t>(cands[members[k]].id));
    for (std::size_t c = 0; c < d; ++c) block[c] += scale * w * e[c];
  }
}

void check_widths(std::size_t r_width, const Tensor& emb, std::span<const Candidate> cands) {
  if (emb.cols() != r_width) {
    throw ShapeError("span attention: span width " + std::to_string(r_width) +
                     " does not match n-gram embedding width " + std::to_string(emb.cols()));
  }
  for (const auto& c : cands) {
    if (c.id < 0 || static_cast<std::size_t>(c.id) >= emb.rows()) {
      throw std::out_of_range("span attention: candidate id outside embedding table");
    }
  }
}

std::vector<std::vector<std::size_t>> by_length(std::span<const Candidate> cands, int n) {
  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < cands.size(); ++k) {
    const int u = cands[k].length;
    if (u < 1 || u > n) {
      throw std::invalid_argument("categorical span attention: candidate length " +
                                  std::to_string(u) + " outside 1.." + std::to_string(n));
    }
    groups[static_cast<std::size_t>(u - 1)].push_back(k);
  }
  return groups;
}

}  // namespace

AttentionOutput span_attention(std::span<const double> r, std::span<const Candidate> cands,
                               const Tensor& embeddings) {
  check_widths(r.size(), embeddings, cands);
  AttentionOutput out;
  out.mode = AttentionMode::kSA;
  out.vector.assign(r.size(), 0.0);
  out.weights.assign(cands.size(), 0.0);
  std::vector<std::size_t> all(cands.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  attend(r, cands, all, embeddings, 1.0, out.vector, out.weights);
  return out;
}

AttentionOutput categorical_span_attention(std::span<const double> r,
                                           std::span<const Candidate> cands,
                                           const Tensor& embeddings,
                                           std::span<const double> deltas, int n) {
  if (static_cast<int>(deltas.size()) != n) {
    throw std::invalid_argument("categorical span attention: " + std::to_string(deltas.size()) +
                                " category scales for n = " + std::to_string(n));
  }
  check_widths(r.size(), embeddings, cands);
  const std::size_t d = r.size();
  AttentionOutput out;
  out.mode = AttentionMode::kCatSA;
  out.vector.assign(d * static_cast<std::size_t>(n), 0.0);
  out.weights.assign(cands.size(), 0.0);
  const auto groups = by_length(cands, n);
  for (int u = 0; u < n; ++u) {
    std::span<double> block(out.vector.data() + static_cast<std::size_t>(u) * d, d);
    attend(r, cands, groups[static_cast<std::size_t>(u)], embeddings,
           deltas[static_cast<std::size_t>(u)], block, out.weights);
  }
  return out;
}

Var span_attention_op(Graph& g, Var spans_repr, Var embeddings, Var scale_raw,
                      std::span<const std::vector<Candidate>> cands, AttentionMode mode, int n,
                      std::vector<std::vector<double>>* weights_out) {
  if (mode == AttentionMode::kBaseline) {
    throw std::invalid_argument("span_attention_op: baseline mode has no span attention");
  }
  const Tensor& R = g.value(spans_repr);
  const Tensor& E = g.value(embeddings);
  const std::size_t S = R.rows();
  const std::size_t d = R.cols();
  if (cands.size() != S) {
    throw ShapeError("span_attention_op: " + std::to_string(cands.size()) +
                     " candidate lists for " + std::to_string(S) + " spans");
  }
  if (E.cols() != d) {
    throw ShapeError("span_attention_op: span width " + std::to_string(d) +
                     " does not match n-gram embedding width " + std::to_string(E.cols()));
  }
  const bool categorical = mode == AttentionMode::kCatSA;
  const int blocks = categorical ? n : 1;
  std::vector<double> deltas(static_cast<std::size_t>(blocks), 1.0);
  if (categorical) {
    const Tensor& raw = g.value(scale_raw);
    if (static_cast<int>(raw.size()) != n) {
      throw ShapeError("span_attention_op: " + std::to_string(raw.size()) +
                       " category scales for n = " + std::to_string(n));
    }
    for (int u = 0; u < n; ++u) deltas[static_cast<std::size_t>(u)] = softplus(raw[static_cast<std::size_t>(u)]);
  }

  Tensor out(S, d * static_cast<std::size_t>(blocks));
  std::vector<std::vector<double>> weights(S);
  std::vector<std::vector<std::vector<std::size_t>>> groups(S);
  for (std::size_t s = 0; s < S; ++s) {
    const auto& cs = cands[s];
    check_widths(d, E, cs);
    weights[s].assign(cs.size(), 0.0);
    if (categorical) {
      groups[s] = by_length(cs, n);
    } else {
      groups[s].assign(1, std::vector<std::size_t>(cs.size()));
      for (std::size_t k = 0; k < cs.size(); ++k) groups[s][0][k] = k;
    }
    for (int u = 0; u < blocks; ++u) {
      std::span<double> block(out.data() + s * out.cols() + static_cast<std::size_t>(u) * d, d);
      attend(R.row_span(s), cs, groups[s][static_cast<std::size_t>(u)], E,
             deltas[static_cast<std::size_t>(u)], block, weights[s]);
    }
  }
  if (weights_out != nullptr) *weights_out = weights;

  std::vector<Var> parents = {spans_repr, embeddings};
  if (categorical) parents.push_back(scale_raw);
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(
      std::move(out), parents,
      [=, cands = std::vector<std::vector<Candidate>>(cands.begin(), cands.end()),
       weights = std::move(weights), groups = std::move(groups),
       deltas = std::move(deltas)](Graph& gr) {
        const Tensor& dy = gr.grad(self);
        const Tensor& Rv = gr.value(spans_repr);
        const Tensor& Ev = gr.value(embeddings);
        const Tensor& Y = gr.value(self);
        Tensor* dR = gr.requires_grad(spans_repr) ? &gr.grad(spans_repr) : nullptr;
        Tensor* dE = gr.requires_grad(embeddings) ? &gr.grad(embeddings) : nullptr;
        Tensor* dRaw = categorical && gr.requires_grad(scale_raw) ? &gr.grad(scale_raw) : nullptr;
        std::vector<double> ga(d);
        for (std::size_t s = 0; s < cands.size(); ++s) {
          const auto& cs = cands[s];
          auto r = Rv.row_span(s);
          for (int u = 0; u < blocks; ++u) {
            const auto& members = groups[s][static_cast<std::size_t>(u)];
            if (members.empty()) continue;
            const double delta = deltas[static_cast<std::size_t>(u)];
            const std::size_t off = s * dy.cols() + static_cast<std::size_t>(u) * d;
            for (std::size_t c = 0; c < d; ++c) ga[c] = delta * dy[off + c];
            if (dRaw != nullptr) {
              // d out / d delta = a^{(u)} = block / delta.
              double dd = 0.0;
              for (std::size_t c = 0; c < d; ++c) dd += dy[off + c] * Y[off + c] / delta;
              const double raw = gr.value(scale_raw)[static_cast<std::size_t>(u)];
              (*dRaw)[static_cast<std::size_t>(u)] += dd / (1.0 + std::exp(-raw));
            }
            std::vector<double> t(members.size());
            double mean = 0.0;
            for (std::size_t k = 0; k < members.size(); ++k) {
              auto e = Ev.row_span(static_cast<std::size_t>(cs[members[k]].id));
              double dot = 0.0;
              for (std::size_t c = 0; c < d; ++c) dot += ga[c] * e[c];
              t[k] = dot;
              mean += weights[s][members[k]] * dot;
            }
            for (std::size_t k = 0; k < members.size(); ++k) {
              const double w = weights[s][members[k]];
              const double dz = w * (t[k] - mean);
              const auto id = static_cast<std::size_t>(cs[members[k]].id);
              auto e = Ev.row_span(id);
              if (dR != nullptr) {
                auto dr = dR->row_span(s);
                for (std::size_t c = 0; c < d; ++c) dr[c] += dz * e[c];
              }
              if (dE != nullptr) {
                auto de = dE->row_span(id);
                for (std::size_t c = 0; c < d; ++c) de[c] += w * ga[c] + dz * r[c];
              }
            }
          }
        }
      });
}

// ---------------------------------------------------------------------------

void AttentionAccumulator::add(const AttentionOutput& out, std::span<const Candidate> cands) {
  add(out.weights, cands);
}

void AttentionAccumulator::add(std::span<const double> weights,
                               std::span<const Candidate> cands) {
  if (weights.size() != cands.size()) {
    throw std::invalid_argument("attention accumulator: weight/candidate count mismatch");
  }
  for (std::size_t k = 0; k < cands.size(); ++k) {
    const auto id = static_cast<std::size_t>(cands[k].id);
    const auto u = static_cast<std::size_t>(cands[k].length);
    if (id >= totals_.size()) {
      totals_.resize(id + 1, 0.0);
      counts_.resize(id + 1, 0);
      lengths_.resize(id + 1, 0);
    }
    if (u >= length_totals_.size()) {
      length_totals_.resize(u + 1, 0.0);
      length_counts_.resize(u + 1, 0);
    }
    totals_[id] += weights[k];
    ++counts_[id];
    lengths_[id] = cands[k].length;
    length_totals_[u] += weights[k];
    ++length_counts_[u];
  }
}

void AttentionAccumulator::merge(const AttentionAccumulator& other) {
  if (other.totals_.size() > totals_.size()) {
    totals_.resize(other.totals_.size(), 0.0);
    counts_.resize(other.totals_.size(), 0);
    lengths_.resize(other.totals_.size(), 0);
  }
  for (std::size_t id = 0; id < other.totals_.size(); ++id) {
    totals_[id] += other.totals_[id];
    counts_[id] += other.counts_[id];
    if (other.lengths_[id] != 0) lengths_[id] = other.lengths_[id];
  }
  if (other.length_totals_.size() > length_totals_.size()) {
    length_totals_.resize(other.length_totals_.size(), 0.0);
    length_counts_.resize(other.length_totals_.size(), 0);
  }
  for (std::size_t u = 0; u < other.length_totals_.size(); ++u) {
    length_totals_[u] += other.length_totals_[u];
    length_counts_[u] += other.length_counts_[u];
  }
}

double AttentionAccumulator::total(int id) const {
  return static_cast<std::size_t>(id) < totals_.size() ? totals_[static_cast<std::size_t>(id)] : 0.0;
}

std::uint64_t AttentionAccumulator::count(int id) const {
  return static_cast<std::size_t>(id) < counts_.size() ? counts_[static_cast<std::size_t>(id)] : 0;
}

double AttentionAccumulator::average(int id) const {
  const auto c = count(id);
  return c == 0 ? 0.0 : total(id) / static_cast<double>(c);
}

double AttentionAccumulator::length_mean(int u) const {
  const auto c = length_count(u);
  return c == 0 ? 0.0 : length_totals_[static_cast<std::size_t>(u)] / static_cast<double>(c);
}

std::uint64_t AttentionAccumulator::length_count(int u) const {
  return u >= 0 && static_cast<std::size_t>(u) < length_counts_.size()
             ? length_counts_[static_cast<std::size_t>(u)]
             : 0;
}

std::vector<int> AttentionAccumulator::ids() const {
  std::vector<int> out;
  for (std::size_t id = 0; id < counts_.size(); ++id) {
    if (counts_[id] != 0) out.push_back(static_cast<int>(id));
  }
  return out;
}

std::string AttentionAccumulator::to_tsv(const NGramLexicon& lexicon, int top_k_per_length) const {
  struct Row {
    std::string text;
    int length;
    double avg;
    std::uint64_t count;
  };
  std::vector<Row> rows;
  for (int id : ids()) {
    const auto& toks = lexicon.entry(id).tokens;
    std::string text;
    for (std::size_t k = 0; k < toks.size(); ++k) {
      if (k) text += ' ';
      text += toks[k];
    }
    rows.push_back(Row{std::move(text), static_cast<int>(toks.size()), average(id), count(id)});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.length != b.length) return a.length < b.length;
    if (a.avg != b.avg) return a.avg > b.avg;
    return a.text < b.text;
  });
  std::ostringstream out;
  out.precision(6);
  int current_len = -1;
  int emitted = 0;
  for (const auto& r : rows) {
    if (r.length != current_len) {
      current_len = r.length;
      emitted = 0;
    }
    if (top_k_per_length > 0 && emitted >= top_k_per_length) continue;
    ++emitted;
    out << r.text << '\t' << r.length << '\t' << std::fixed << r.avg << '\t' << r.count << '\n';
    out.unsetf(std::ios::fixed);
  }
  return out.str();
}

}  // namespace spanparse
