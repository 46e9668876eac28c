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

#include "hint/objective.hpp"

#include <cmath>
#include <string>

#include "hint/errors.hpp"
#include "hint/kernels.hpp"
#include "hint/ops.hpp"

namespace hint {
namespace {

void check_tau(double tau) {
  if (!(tau > 0.0)) throw ArgumentError("temperature must be positive, got " + std::to_string(tau));
}

// mean_i -log softmax(logits[i, :])[i]
Var diagonal_nll(Var logits) { return scale(mean(diagonal(log_softmax(logits))), -1.0); }

void check_rows_nonzero(const Tensor& x, const char* which) {
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    if (!(kernels::dot(row, row) > 0.0)) {
      throw ArgumentError(std::string("rank_loss: ") + which + " row " + std::to_string(r) + " has zero norm");
    }
  }
}

}  // namespace

Var context_loss(Var scores, double tau) {
  check_tau(tau);
  if (scores.rows() != scores.cols()) {
    throw DimensionError("context_loss needs a square score matrix, got " + to_string(scores.shape()));
  }
  return diagonal_nll(scale(scores, 1.0 / tau));
}

double context_loss(const Tensor& scores, double tau) {
  Graph g;
  return context_loss(g.constant(scores), tau).value().item();
}

Var rank_loss(Var query_pooled, Var target_pooled, double tau) {
  check_tau(tau);
  if (query_pooled.rows() != target_pooled.rows() || query_pooled.cols() != target_pooled.cols()) {
    throw DimensionError("rank_loss: pooled shapes " + to_string(query_pooled.shape()) + " and " +
                         to_string(target_pooled.shape()) + " differ");
  }
  check_rows_nonzero(query_pooled.value(), "query");
  check_rows_nonzero(target_pooled.value(), "target");
  const Var cos = matmul(normalize_rows(query_pooled), transpose(normalize_rows(target_pooled)));
  return diagonal_nll(scale(cos, 1.0 / tau));
}

double rank_loss(const Tensor& query_pooled, const Tensor& target_pooled, double tau) {
  Graph g;
  return rank_loss(g.constant(query_pooled), g.constant(target_pooled), tau).value().item();
}

LossBreakdown total_loss(double l_rank, double l_context, double lambda) {
  return LossBreakdown{l_rank, l_context, l_rank + lambda * l_context, lambda};
}

OptimState OptimState::create(std::size_t parameter_count, const AdamWOptions& options) {
  return OptimState{options, std::vector<double>(parameter_count, 0.0), std::vector<double>(parameter_count, 0.0), 0};
}

void adamw_step(std::span<double> params, std::span<const double> grads, OptimState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size() || params.size() != state.v.size()) {
    throw DimensionError("adamw_step: " + std::to_string(params.size()) + " params, " +
                         std::to_string(grads.size()) + " grads, " + std::to_string(state.m.size()) + " moments");
  }
  const AdamWOptions& o = state.options;
  if (!(o.lr > 0.0)) throw ArgumentError("adamw_step: learning rate must be positive");
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const kernels::AdamWCoefficients c{o.lr,         o.beta1, o.beta2, o.eps, o.weight_decay,
                                     1.0 - std::pow(o.beta1, t), 1.0 - std::pow(o.beta2, t)};
  kernels::active().adamw(params.data(), grads.data(), state.m.data(), state.v.data(), params.size(), c);
}

}  // namespace hint
