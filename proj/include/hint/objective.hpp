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
#include <span>
#include <vector>

#include "hint/graph.hpp"
#include "hint/tensor.hpp"

namespace hint {

/// In-batch contrastive loss over a B x B score matrix whose diagonal holds
/// the matching pairs: mean_i -log softmax_j(S(i, j) / tau)[i].
Var context_loss(Var scores, double tau);
double context_loss(const Tensor& scores, double tau);

/// The same contrastive form over cosine similarities of pooled features
/// (B x D each). A zero-norm row is an ArgumentError naming the row.
Var rank_loss(Var query_pooled, Var target_pooled, double tau);
double rank_loss(const Tensor& query_pooled, const Tensor& target_pooled, double tau);

struct LossBreakdown {
  double l_rank = 0.0;
  double l_context = 0.0;
  double total = 0.0;
  double lambda = 0.0;
};

/// total = l_rank + lambda * l_context
LossBreakdown total_loss(double l_rank, double l_context, double lambda);

struct AdamWOptions {
  double lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct OptimState {
  AdamWOptions options;
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  static OptimState create(std::size_t parameter_count, const AdamWOptions& options);
};

/// theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta), with
/// bias-corrected moments. Increments state.step.
void adamw_step(std::span<double> params, std::span<const double> grads, OptimState& state);

}  // namespace hint
