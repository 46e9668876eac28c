// Copyright (c) 2026 The HINT-CIR Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hint/graph.hpp"

#include <limits>

#include "hint/errors.hpp"

namespace hint {

std::string_view name(OpKind op) noexcept {
  switch (op) {
    case OpKind::constant: return "constant";
    case OpKind::parameter: return "parameter";
    case OpKind::add: return "add";
    case OpKind::add_row: return "add_row";
    case OpKind::mul: return "mul";
    case OpKind::scale: return "scale";
    case OpKind::matmul: return "matmul";
    case OpKind::transpose: return "transpose";
    case OpKind::softmax: return "softmax";
    case OpKind::log_softmax: return "log_softmax";
    case OpKind::layer_norm: return "layer_norm";
    case OpKind::relu: return "relu";
    case OpKind::mean_pool: return "mean_pool";
    case OpKind::concat_rows: return "concat_rows";
    case OpKind::concat_cols: return "concat_cols";
    case OpKind::slice_rows: return "slice_rows";
    case OpKind::slice_cols: return "slice_cols";
    case OpKind::sum: return "sum";
    case OpKind::mean: return "mean";
    case OpKind::diagonal: return "diagonal";
    case OpKind::max_entry: return "max_entry";
    case OpKind::logsumexp: return "logsumexp";
    case OpKind::normalize_rows: return "normalize_rows";
    case OpKind::stack: return "stack";
  }
  return "unknown";
}

const Tensor& Var::value() const {
  if (!graph) throw GraphError("use of an unbound Var");
  return graph->value(*this);
}

Var Graph::push(Node node) {
  if (nodes_.size() >= std::numeric_limits<std::uint32_t>::max()) throw GraphError("graph node limit reached");
  if (backward_done_) throw GraphError("cannot record new operations after backward()");
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Graph::check_owned(Var v) const {
  if (v.graph != this || v.id >= nodes_.size()) throw GraphError("Var does not belong to this graph");
}

Var Graph::constant(Tensor value) {
  return push(Node{OpKind::constant, std::move(value), {}, false, {}, {}});
}

Var Graph::parameter(Tensor value) {
  return push(Node{OpKind::parameter, std::move(value), {}, true, {}, {}});
}

Var Graph::record(OpKind op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Node node{op, std::move(value), {}, false, {}, std::move(backward)};
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    check_owned(in);
    node.inputs.push_back(in.id);
    node.requires_grad = node.requires_grad || nodes_[in.id].requires_grad;
  }
  return push(std::move(node));
}

void Graph::backward(Var loss) {
  check_owned(loss);
  if (backward_done_) throw GraphError("backward() already ran on this graph; call zero_grad() first");
  const Tensor& out = nodes_[loss.id].value;
  if (out.size() != 1) throw GraphError("backward() needs a scalar loss, got shape " + to_string(out.shape()));
  backward_done_ = true;
  if (!nodes_[loss.id].requires_grad) return;

  nodes_[loss.id].grad = Tensor::full(out.shape(), 1.0);
  std::vector<Tensor*> input_grads;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.requires_grad || node.grad.empty() || !node.backward) continue;
    input_grads.clear();
    for (std::uint32_t in : node.inputs) {
      Node& src = nodes_[in];
      if (!src.requires_grad) {
        input_grads.push_back(nullptr);
        continue;
      }
      if (src.grad.empty()) src.grad = Tensor(src.value.shape());
      input_grads.push_back(&src.grad);
    }
    node.backward(*this, node.grad, input_grads);
  }
}

void Graph::zero_grad() {
  for (Node& node : nodes_) node.grad = Tensor();
  backward_done_ = false;
}

Tensor Graph::grad(Var v) const {
  check_owned(v);
  const Node& node = nodes_[v.id];
  if (node.grad.empty()) return Tensor(node.value.shape());
  return node.grad;
}

}  // namespace hint
