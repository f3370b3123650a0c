// src/diff/graph.cc

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

#include "xvec/diff/graph.h"

#include <string>

#include "xvec/base/error.h"

namespace xvec {
namespace diff {

const Tensor &Var::value() const {
  if (graph_ == nullptr) throw Error("use of an unbound Var");
  return graph_->Value(*this);
}

Graph::Node &Graph::NodeOf(Var v) {
  if (v.graph_ != this || v.index_ >= nodes_.size())
    throw Error("Var does not belong to this graph");
  return nodes_[v.index_];
}

const Graph::Node &Graph::NodeOf(Var v) const {
  if (v.graph_ != this || v.index_ >= nodes_.size())
    throw Error("Var does not belong to this graph");
  return nodes_[v.index_];
}

Var Graph::Constant(Tensor value) {
  value.CheckFinite("constant");
  Node &n = nodes_.emplace_back();
  n.owned = std::move(value);
  return Var(this, nodes_.size() - 1);
}

Var Graph::Parameter(Tensor &tensor) {
  tensor.CheckFinite("parameter");
  Node &n = nodes_.emplace_back();
  n.external = &tensor;
  n.writable = &tensor;
  n.requires_grad = true;
  return Var(this, nodes_.size() - 1);
}

Var Graph::Parameter(const Tensor &tensor) {
  tensor.CheckFinite("parameter");
  Node &n = nodes_.emplace_back();
  n.external = &tensor;
  return Var(this, nodes_.size() - 1);
}

Var Graph::Record(std::string_view op, Tensor value, std::span<const Var> inputs,
                  BackwardFn backward) {
  value.CheckFinite(std::string(op) + " output");
  bool needs_grad = false;
  for (const Var &in : inputs) needs_grad = needs_grad || NodeOf(in).requires_grad;
  Node &n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = needs_grad;
  if (needs_grad) n.backward = std::move(backward);
  return Var(this, nodes_.size() - 1);
}

const Tensor &Graph::Value(Var v) const {
  const Node &n = NodeOf(v);
  return n.external ? *n.external : n.owned;
}

bool Graph::RequiresGrad(Var v) const { return NodeOf(v).requires_grad; }

std::span<double> Graph::Grad(Var v) {
  Node &n = NodeOf(v);
  if (n.writable) return n.writable->grad();
  if (n.external) throw Error("gradient requested for a read-only leaf");
  if (n.grad.size() != n.owned.size()) n.grad.assign(n.owned.size(), 0.0);
  return n.grad;
}

void Graph::Backward(Var root) {
  Node &r = NodeOf(root);
  if (r.owned.size() != 1 || r.external)
    throw DimensionError("Backward() root must be a scalar op output");
  if (!r.requires_grad) return;
  Grad(root)[0] += 1.0;
  for (std::size_t i = root.index_ + 1; i-- > 0;) {
    Node &n = nodes_[i];
    // Nodes whose gradient buffer was never touched carry a zero gradient.
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, n.grad);
  }
}

}  // namespace diff
}  // namespace xvec
