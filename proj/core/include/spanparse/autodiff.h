#ifndef SPANPARSE_AUTODIFF_H_
#define SPANPARSE_AUTODIFF_H_

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spanparse/params.h"
#include "spanparse/tensor.h"

namespace spanparse {

// Handle to a node of a Graph.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape. Nodes are appended in topological order, so backward()
// runs closures in reverse creation order. A Graph holds its own gradient
// buffers; parameters are read through const pointers, which makes one Graph
// per thread safe against a shared, frozen ParamRegistry.
class Graph {
 public:
  using Backward = std::function<void(Graph&)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // Same parameter requested twice yields the same node.
  Var param(const Parameter& p);

  // Low-level op registration. `backward` is invoked only when the node
  // requires a gradient; it reads grad(self) and accumulates into parents.
  Var add_node(Tensor value, std::span<const Var> parents, Backward backward);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  // Valid only during/after backward(); zero-initialized there.
  Tensor& grad(Var v) { return nodes_[v.id].grad; }
  const Tensor& grad(Var v) const { return nodes_[v.id].grad; }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and propagates.
  void backward(Var root);
  // Adds the gradients of every parameter node into `out`.
  void collect_param_grads(Gradients& out) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor own;
    const Tensor* ext = nullptr;
    Tensor grad;
    bool requires_grad = false;
    int param_index = -1;
    Backward backward;
  };
  std::vector<Node> nodes_;
  std::unordered_map<std::size_t, int> param_nodes_;
};

namespace ops {

// a (m x k) * b (k x n)
Var matmul(Graph& g, Var a, Var b);
// a (m x k) * b^T, b is (n x k). Linear layers store weights as (out x in).
Var matmul_nt(Graph& g, Var a, Var b);
Var add(Graph& g, Var a, Var b);
Var sub(Graph& g, Var a, Var b);
// Adds a 1 x n row to every row of a (m x n).
Var add_row(Graph& g, Var a, Var row);
Var scale(Graph& g, Var a, double c);
Var relu(Graph& g, Var a);
Var softplus(Graph& g, Var a);
// Row-wise layer normalization. gamma/beta (1 x n) may be invalid Vars, in
// which case no affine transform is applied.
Var layer_norm(Graph& g, Var x, Var gamma, Var beta, double eps = 1e-5);
Var softmax_rows(Graph& g, Var a);
// Rows of `table` selected by ids (embedding lookup).
Var gather_rows(Graph& g, Var table, std::span<const int> ids);
Var concat_cols(Graph& g, std::span<const Var> parts);
Var slice_cols(Graph& g, Var a, std::size_t begin, std::size_t count);
Var slice_rows(Graph& g, Var a, std::size_t begin, std::size_t count);
// Row s of the result is h[j_s] - h[i_s].
Var span_diff(Graph& g, Var h, std::span<const std::pair<int, int>> spans);
Var sum(Graph& g, Var a);
// sum(a .* coef) + offset, as a 1 x 1 node. coef has a's shape.
Var weighted_sum(Graph& g, Var a, Tensor coef, double offset = 0.0);
Var sum_squares(Graph& g, Var a);

}  // namespace ops

}  // namespace spanparse

#endif  // SPANPARSE_AUTODIFF_H_
