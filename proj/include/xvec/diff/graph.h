// include/xvec/diff/graph.h

// Copyright 2026  The xvec Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef XVEC_DIFF_GRAPH_H_
#define XVEC_DIFF_GRAPH_H_

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "xvec/diff/tensor.h"

namespace xvec {
namespace diff {

class Graph;

/// Handle to a node recorded on a Graph. Cheap to copy; only valid while the
/// owning Graph is alive.
class Var {
 public:
  Var() = default;

  const Tensor &value() const;
  const Shape &shape() const { return value().shape(); }
  Graph *graph() const { return graph_; }
  std::size_t index() const { return index_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph *graph, std::size_t index) : graph_(graph), index_(index) {}

  Graph *graph_ = nullptr;
  std::size_t index_ = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so the reverse
/// of insertion order is a valid topological order for Backward().
///
/// Parameters are borrowed: their gradients accumulate directly into the
/// Tensor's own grad buffer, and the Tensor must outlive the graph.
class Graph {
 public:
  /// Receives the gradient of the node's output and accumulates into inputs.
  using BackwardFn = std::function<void(Graph &, std::span<const double>)>;

  Graph() = default;
  Graph(const Graph &) = delete;
  Graph &operator=(const Graph &) = delete;

  Var Constant(Tensor value);
  /// Trainable leaf; gradients accumulate into `tensor.grad()`.
  Var Parameter(Tensor &tensor);
  /// Read-only leaf referring to `tensor` without copying it. Never receives
  /// a gradient.
  Var Parameter(const Tensor &tensor);

  /// Appends an op output. The output is checked for finiteness and tagged
  /// as requiring a gradient iff any input does; `backward` is dropped
  /// otherwise.
  Var Record(std::string_view op, Tensor value, std::span<const Var> inputs,
             BackwardFn backward);

  const Tensor &Value(Var v) const;
  bool RequiresGrad(Var v) const;
  /// Gradient buffer for `v`, allocated (zeroed) on first use.
  std::span<double> Grad(Var v);

  /// Seeds d(root)/d(root) = 1 and propagates to every node that requires a
  /// gradient. `root` must be a scalar.
  void Backward(Var root);

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor *external = nullptr;
    Tensor *writable = nullptr;
    AlignedBuffer grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Node &NodeOf(Var v);
  const Node &NodeOf(Var v) const;

  std::deque<Node> nodes_;
};

}  // namespace diff
}  // namespace xvec

#endif  // XVEC_DIFF_GRAPH_H_
