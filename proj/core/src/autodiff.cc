#include "spanparse/autodiff.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "spanparse/errors.h"

namespace spanparse {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<RowMat>;
using CMap = Eigen::Map<const RowMat>;

Map as_mat(Tensor& t) {
  return Map(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}
CMap as_mat(const Tensor& t) {
  return CMap(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                   b.shape_string());
}

}  // namespace

Var Graph::constant(Tensor value) {
  Node n;
  n.own = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Graph::param(const Parameter& p) {
  auto it = param_nodes_.find(p.index);
  if (it != param_nodes_.end()) return Var{it->second};
  Node n;
  n.ext = &p.value;
  n.requires_grad = true;
  n.param_index = static_cast<int>(p.index);
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size() - 1);
  param_nodes_.emplace(p.index, id);
  return Var{id};
}

Var Graph::add_node(Tensor value, std::span<const Var> parents, Backward backward) {
  Node n;
  n.own = std::move(value);
  for (Var p : parents) {
    if (p.valid() && nodes_[p.id].requires_grad) n.requires_grad = true;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

const Tensor& Graph::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.ext != nullptr ? *n.ext : n.own;
}

void Graph::backward(Var root) {
  const Tensor& rv = value(root);
  if (rv.size() != 1) throw ShapeError("backward: root must be 1x1, got " + rv.shape_string());
  for (int id = 0; id <= root.id; ++id) {
    Node& n = nodes_[id];
    if (n.requires_grad) {
      const Tensor& v = n.ext != nullptr ? *n.ext : n.own;
      n.grad = Tensor(v.rows(), v.cols(), 0.0);
    }
  }
  if (!nodes_[root.id].requires_grad) return;
  nodes_[root.id].grad[0] = 1.0;
  for (int id = root.id; id >= 0; --id) {
    if (nodes_[id].requires_grad && nodes_[id].backward) nodes_[id].backward(*this);
  }
}

void Graph::collect_param_grads(Gradients& out) const {
  for (const auto& n : nodes_) {
    if (n.param_index >= 0 && !n.grad.empty()) {
      out.accumulate(static_cast<std::size_t>(n.param_index), n.grad);
    }
  }
}

namespace ops {

Var matmul(Graph& g, Var a, Var b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  if (av.cols() != bv.rows()) shape_fail("matmul", av, bv);
  Tensor out(av.rows(), bv.cols());
  as_mat(out).noalias() = as_mat(av) * as_mat(bv);
  const Var parents[] = {a, b};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(std::move(out), parents, [a, b, self](Graph& gr) {
    const auto dy = as_mat(std::as_const(gr.grad(self)));
    if (gr.requires_grad(a)) as_mat(gr.grad(a)).noalias() += dy * as_mat(gr.value(b)).transpose();
    if (gr.requires_grad(b)) as_mat(gr.grad(b)).noalias() += as_mat(gr.value(a)).transpose() * dy;
  });
}

Var matmul_nt(Graph& g, Var a, Var b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  if (av.cols() != bv.cols()) shape_fail("matmul_nt", av, bv);
  Tensor out(av.rows(), bv.rows());
  as_mat(out).noalias() = as_mat(av) * as_mat(bv).transpose();
  const Var parents[] = {a, b};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(std::move(out), parents, [a, b, self](Graph& gr) {
    const auto dy = as_mat(std::as_const(gr.grad(self)));
    if (gr.requires_grad(a)) as_mat(gr.grad(a)).noalias() += dy * as_mat(gr.value(b));
    if (gr.requires_grad(b)) as_mat(gr.grad(b)).noalias() += dy.transpose() * as_mat(gr.value(a));
  });
}

namespace {

Var add_scaled(Graph& g, Var a, Var b, double sign, const char* name) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  if (!av.same_shape(bv)) shape_fail(name, av, bv);
  Tensor out = av;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += sign * bv[k];
  const Var parents[] = {a, b};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(std::move(out), parents, [a, b, self, sign](Graph& gr) {
    const Tensor& dy = gr.grad(self);
    if (gr.requires_grad(a)) gr.grad(a).add_inplace(dy);
    if (gr.requires_grad(b)) {
      Tensor& db = gr.grad(b);
      for (std::size_t k = 0; k < dy.size(); ++k) db[k] += sign * dy[k];
    }
  });
}

}  // namespace

Var add(Graph& g, Var a, Var b) { return add_scaled(g, a, b, 1.0, "add"); }
Var sub(Graph& g, Var a, Var b) { return add_scaled(g, a, b, -1.0, "sub"); }

Var add_row(Graph& g, Var a, Var row) {
  const Tensor& av = g.value(a);
  const Tensor& rv = g.value(row);
  if (rv.rows() != 1 || rv.cols() != av.cols()) shape_fail("add_row", av, rv);
  Tensor out = av;
  as_mat(out).rowwise() += as_mat(rv).row(0);
  const Var parents[] = {a, row};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(std::move(out), parents, [a, row, self](Graph& gr) {
    const Tensor& dy = gr.grad(self);
    if (gr.requires_grad(a)) gr.grad(a).add_inplace(dy);
    if (gr.requires_grad(row)) as_mat(gr.grad(row)).row(0) += as_mat(dy).colwise().sum();
  });
}

Var scale(Graph& g, Var a, double c) {
  Tensor out = g.value(a);
  for (double& v : out.values()) v *= c;
  const Var parents[] = {a};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(std::move(out), parents, [a, self, c](Graph& gr) {
    const Tensor& dy = gr.grad(self);
    Tensor& da = gr.grad(a);
    for (std::size_t k = 0; k < dy.size(); ++k) da[k] += c * dy[k];
  });
}

Var relu(Graph& g, Var a) {
  Tensor out = g.value(a);
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  const Var parents[] = {a};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(std::move(out), parents, [a, self](Graph& gr) {
    const Tensor& dy = gr.grad(self);
    const Tensor& x = gr.value(a);
    Tensor& da = gr.grad(a);
    for (std::size_t k = 0; k < dy.size(); ++k) {
      if (x[k] > 0.0) da[k] += dy[k];
    }
  });
}

Var softplus(Graph& g, Var a) {
  Tensor out = g.value(a);
  for (double& v : out.values()) v = v > 30.0 ? v : std::log1p(std::exp(v));
  const Var parents[] = {a};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(std::move(out), parents, [a, self](Graph& gr) {
    const Tensor& dy = gr.grad(self);
    const Tensor& x = gr.value(a);
    Tensor& da = gr.grad(a);
    for (std::size_t k = 0; k < dy.size(); ++k) da[k] += dy[k] / (1.0 + std::exp(-x[k]));
  });
}

Var layer_norm(Graph& g, Var x, Var gamma, Var beta, double eps) {
  const Tensor& xv = g.value(x);
  const std::size_t rows = xv.rows();
  const std::size_t n = xv.cols();
  if (gamma.valid() && (g.value(gamma).rows() != 1 || g.value(gamma).cols() != n)) {
    shape_fail("layer_norm(gamma)", xv, g.value(gamma));
  }
  if (beta.valid() && (g.value(beta).rows() != 1 || g.value(beta).cols() != n)) {
    shape_fail("layer_norm(beta)", xv, g.value(beta));
  }
  Tensor xhat(rows, n);
  std::vector<double> inv_sigma(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    auto in = xv.row_span(r);
    double mean = 0.0;
    for (double v : in) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    inv_sigma[r] = 1.0 / std::sqrt(var + eps);
    auto o = xhat.row_span(r);
    for (std::size_t c = 0; c < n; ++c) o[c] = (in[c] - mean) * inv_sigma[r];
  }
  Tensor out = xhat;
  if (gamma.valid()) {
    const Tensor& gv = g.value(gamma);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < n; ++c) out(r, c) *= gv[c];
    }
  }
  if (beta.valid()) {
    const Tensor& bv = g.value(beta);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < n; ++c) out(r, c) += bv[c];
    }
  }
  const Var parents[] = {x, gamma, beta};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(
      std::move(out), parents,
      [x, gamma, beta, self, xhat = std::move(xhat), inv_sigma = std::move(inv_sigma)](Graph& gr) {
        const Tensor& dy = gr.grad(self);
        const std::size_t rows = dy.rows();
        const std::size_t n = dy.cols();
        const bool dx_needed = gr.requires_grad(x);
        std::vector<double> dxhat(n);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < n; ++c) {
            dxhat[c] = dy(r, c) * (gamma.valid() ? gr.value(gamma)[c] : 1.0);
          }
          if (gamma.valid() && gr.requires_grad(gamma)) {
            Tensor& dg = gr.grad(gamma);
            for (std::size_t c = 0; c < n; ++c) dg[c] += dy(r, c) * xhat(r, c);
          }
          if (beta.valid() && gr.requires_grad(beta)) {
            Tensor& db = gr.grad(beta);
            for (std::size_t c = 0; c < n; ++c) db[c] += dy(r, c);
          }
          if (!dx_needed) continue;
          double mean_d = 0.0;
          double mean_dx = 0.0;
          for (std::size_t c = 0; c < n; ++c) {
            mean_d += dxhat[c];
            mean_dx += dxhat[c] * xhat(r, c);
          }
          mean_d /= static_cast<double>(n);
          mean_dx /= static_cast<double>(n);
          Tensor& dx = gr.grad(x);
          for (std::size_t c = 0; c < n; ++c) {
            dx(r, c) += inv_sigma[r] * (dxhat[c] - mean_d - xhat(r, c) * mean_dx);
          }
        }
      });
}

Var softmax_rows(Graph& g, Var a) {
  const Tensor& av = g.value(a);
  Tensor out(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    auto in = av.row_span(r);
    auto o = out.row_span(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      o[c] = std::exp(in[c] - mx);
      z += o[c];
    }
    for (double& v : o) v /= z;
  }
  const Var parents[] = {a};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(std::move(out), parents, [a, self](Graph& gr) {
    const Tensor& dy = gr.grad(self);
    const Tensor& y = gr.value(self);
    Tensor& da = gr.grad(a);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += dy(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) da(r, c) += y(r, c) * (dy(r, c) - dot);
    }
  });
}

Var gather_rows(Graph& g, Var table, std::span<const int> ids) {
  const Tensor& tv = g.value(table);
  Tensor out(ids.size(), tv.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= tv.rows()) {
      throw std::out_of_range("gather_rows: id " + std::to_string(ids[r]) + " outside table " +
                              tv.shape_string());
    }
    std::copy_n(tv.row_span(ids[r]).begin(), tv.cols(), out.row_span(r).begin());
  }
  const Var parents[] = {table};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(std::move(out), parents,
                    [table, self, idv = std::vector<int>(ids.begin(), ids.end())](Graph& gr) {
                      const Tensor& dy = gr.grad(self);
                      Tensor& dt = gr.grad(table);
                      for (std::size_t r = 0; r < idv.size(); ++r) {
                        auto src = dy.row_span(r);
                        auto dst = dt.row_span(idv[r]);
                        for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                      }
                    });
}

Var concat_cols(Graph& g, std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = g.value(parts[0]).rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    if (g.value(p).rows() != rows) shape_fail("concat_cols", g.value(parts[0]), g.value(p));
    cols += g.value(p).cols();
  }
  Tensor out(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& pv = g.value(p);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(pv.row_span(r).begin(), pv.cols(), out.row_span(r).begin() + offset);
    }
    offset += pv.cols();
  }
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(std::move(out), parts,
                    [self, pv = std::vector<Var>(parts.begin(), parts.end())](Graph& gr) {
                      const Tensor& dy = gr.grad(self);
                      std::size_t offset = 0;
                      for (Var p : pv) {
                        const std::size_t w = gr.value(p).cols();
                        if (gr.requires_grad(p)) {
                          Tensor& dp = gr.grad(p);
                          for (std::size_t r = 0; r < dy.rows(); ++r) {
                            for (std::size_t c = 0; c < w; ++c) dp(r, c) += dy(r, offset + c);
                          }
                        }
                        offset += w;
                      }
                    });
}

Var slice_cols(Graph& g, Var a, std::size_t begin, std::size_t count) {
  const Tensor& av = g.value(a);
  if (begin + count > av.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " + av.shape_string());
  }
  Tensor out(av.rows(), count);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < count; ++c) out(r, c) = av(r, begin + c);
  }
  const Var parents[] = {a};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(std::move(out), parents, [a, self, begin](Graph& gr) {
    const Tensor& dy = gr.grad(self);
    Tensor& da = gr.grad(a);
    for (std::size_t r = 0; r < dy.rows(); ++r) {
      for (std::size_t c = 0; c < dy.cols(); ++c) da(r, begin + c) += dy(r, c);
    }
  });
}

Var slice_rows(Graph& g, Var a, std::size_t begin, std::size_t count) {
  const Tensor& av = g.value(a);
  if (begin + count > av.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " + av.shape_string());
  }
  Tensor out(count, av.cols());
  std::copy_n(av.data() + begin * av.cols(), count * av.cols(), out.data());
  const Var parents[] = {a};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(std::move(out), parents, [a, self, begin](Graph& gr) {
    const Tensor& dy = gr.grad(self);
    Tensor& da = gr.grad(a);
    double* dst = da.data() + begin * da.cols();
    for (std::size_t k = 0; k < dy.size(); ++k) dst[k] += dy[k];
  });
}

Var span_diff(Graph& g, Var h, std::span<const std::pair<int, int>> spans) {
  const Tensor& hv = g.value(h);
  const std::size_t d = hv.cols();
  Tensor out(spans.size(), d);
  for (std::size_t s = 0; s < spans.size(); ++s) {
    const auto [i, j] = spans[s];
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= hv.rows() ||
        static_cast<std::size_t>(j) >= hv.rows()) {
      throw std::out_of_range("span_diff: fencepost outside " + hv.shape_string());
    }
    auto o = out.row_span(s);
    auto hi = hv.row_span(i);
    auto hj = hv.row_span(j);
    for (std::size_t c = 0; c < d; ++c) o[c] = hj[c] - hi[c];
  }
  const Var parents[] = {h};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(
      std::move(out), parents,
      [h, self, sv = std::vector<std::pair<int, int>>(spans.begin(), spans.end())](Graph& gr) {
        const Tensor& dy = gr.grad(self);
        Tensor& dh = gr.grad(h);
        for (std::size_t s = 0; s < sv.size(); ++s) {
          auto src = dy.row_span(s);
          auto di = dh.row_span(sv[s].first);
          auto dj = dh.row_span(sv[s].second);
          for (std::size_t c = 0; c < src.size(); ++c) {
            dj[c] += src[c];
            di[c] -= src[c];
          }
        }
      });
}

Var sum(Graph& g, Var a) {
  const Tensor& av = g.value(a);
  double s = 0.0;
  for (double v : av.values()) s += v;
  const Var parents[] = {a};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(Tensor(1, 1, s), parents, [a, self](Graph& gr) {
    const double dy = gr.grad(self)[0];
    for (double& v : gr.grad(a).values()) v += dy;
  });
}

Var weighted_sum(Graph& g, Var a, Tensor coef, double offset) {
  const Tensor& av = g.value(a);
  if (!av.same_shape(coef)) shape_fail("weighted_sum", av, coef);
  double s = offset;
  for (std::size_t k = 0; k < av.size(); ++k) s += av[k] * coef[k];
  const Var parents[] = {a};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(Tensor(1, 1, s), parents, [a, self, coef = std::move(coef)](Graph& gr) {
    const double dy = gr.grad(self)[0];
    Tensor& da = gr.grad(a);
    for (std::size_t k = 0; k < da.size(); ++k) da[k] += dy * coef[k];
  });
}

Var sum_squares(Graph& g, Var a) {
  const Tensor& av = g.value(a);
  double s = 0.0;
  for (double v : av.values()) s += v * v;
  const Var parents[] = {a};
  Var self{static_cast<int>(g.node_count())};
  return g.add_node(Tensor(1, 1, s), parents, [a, self](Graph& gr) {
    const double dy = gr.grad(self)[0];
    const Tensor& x = gr.value(a);
    Tensor& da = gr.grad(a);
    for (std::size_t k = 0; k < da.size(); ++k) da[k] += 2.0 * dy * x[k];
  });
}

}  // namespace ops

}  // namespace spanparse
