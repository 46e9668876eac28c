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

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "hint/tensor.hpp"

namespace hint {

class Graph;

enum class OpKind : std::uint8_t {
  constant,
  parameter,
  add,
  add_row,
  mul,
  scale,
  matmul,
  transpose,
  softmax,
  log_softmax,
  layer_norm,
  relu,
  mean_pool,
  concat_rows,
  concat_cols,
  slice_rows,
  slice_cols,
  sum,
  mean,
  diagonal,
  max_entry,
  logsumexp,
  normalize_rows,
  stack,
};

std::string_view name(OpKind op) noexcept;

/// Handle to a node of a Graph. Cheap to copy; only valid while its graph lives.
struct Var {
  Graph* graph = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Tape of recorded operations in execution order. Node ids are assigned
/// monotonically, so the tape is topologically sorted by construction and
/// backward() is a single reverse sweep.
///
/// A graph supports exactly one backward(); call zero_grad() to run another.
/// Graphs are confined to one thread.
class Graph {
 public:
  // grad_out is the gradient w.r.t. this node's output; input_grads[i] is the
  // accumulation target for input i, or nullptr if that input needs no gradient.
  using BackwardFn =
      std::function<void(const Graph& g, const Tensor& grad_out, std::span<Tensor* const> input_grads)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor value);
  Var record(OpKind op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  const Tensor& value(std::uint32_t id) const { return nodes_.at(id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  OpKind op(Var v) const { return nodes_.at(v.id).op; }
  std::span<const std::uint32_t> inputs(Var v) const { return nodes_.at(v.id).inputs; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse-mode sweep from a scalar loss.
  void backward(Var loss);
  bool backward_done() const noexcept { return backward_done_; }
  void zero_grad();

  /// Gradient of the last backward() loss w.r.t. v (zeros when v was unreachable).
  Tensor grad(Var v) const;

 private:
  struct Node {
    OpKind op;
    Tensor value;
    Tensor grad;  // empty until reached during backward
    bool requires_grad = false;
    std::vector<std::uint32_t> inputs;
    BackwardFn backward;
  };

  Var push(Node node);
  void check_owned(Var v) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace hint
