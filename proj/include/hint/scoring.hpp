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

// Contextual relevance between fused query features U (Q x D) and target
// features F (Q x D).
//
//   S_k  = softmax(U[:k] F^T)      k x Q, one distribution per row
//   Sb_k = mean of the k rows of S_k   (1 x Q)
//   s_u  = mean over k = 1..Q of Sb_k  (1 x Q)
//
// s_u always sums to 1, so its mean is the constant 1/Q; the pair score is
// therefore the max entry of s_u rather than its mean.

#include <cstddef>
#include <span>
#include <vector>

#include "hint/graph.hpp"
#include "hint/ops.hpp"
#include "hint/tensor.hpp"

namespace hint {

enum class Reduction { max, logsumexp };

struct ScoringOptions {
  Axis softmax_axis = Axis::rows;
  Reduction reduction = Reduction::max;
  bool multi_channel = true;  // false: only the k = Q level
  bool qcr = true;            // false: cosine of mean-pooled features
};

/// softmax(U[:k] F^T) along `axis`, shape k x Q.
Var incremental_similarity(Var fused, Var target, std::size_t k, Axis axis = Axis::rows);

struct RelevanceNodes {
  Var s_u;
  std::vector<Var> per_level;  // Sb_1..Sb_Q, or just Sb_Q without multi-channel
};

/// Level-by-level construction, one incremental_similarity per k.
RelevanceNodes relevance_profile(Var fused, Var target, const ScoringOptions& opt = {});

/// s_u only. With row-wise softmax each prefix S_k is the first k rows of one
/// Q x Q softmax, so s_u collapses to w * softmax(U F^T) with fixed weights
/// w_i = (1/Q) * sum_{k > i} 1/k. Falls back to the level loop otherwise.
Var relevance_vector(Var fused, Var target, const ScoringOptions& opt = {});

/// Weights w_i above, length Q.
std::vector<double> prefix_weights(std::size_t queries);

struct RelevanceProfile {
  Tensor s_u;
  std::vector<Tensor> per_level;
};

RelevanceProfile relevance_profile(const Tensor& fused, const Tensor& target, const ScoringOptions& opt = {});

/// Scalar score of one (query, candidate) pair.
Var pair_score(Var fused, Var target, const ScoringOptions& opt = {});
double pair_score(const Tensor& fused, const Tensor& target, const ScoringOptions& opt = {});

/// Cosine similarity of the mean-pooled features.
Var cosine_score(Var fused, Var target);
double cosine_score(const Tensor& fused, const Tensor& target);

/// B x B matrix of pair_score(queries[i], targets[j]).
Var score_matrix(std::span<const Var> queries, std::span<const Var> targets, const ScoringOptions& opt = {});
Tensor score_matrix(std::span<const Tensor> queries, std::span<const Tensor> targets,
                    const ScoringOptions& opt = {});

}  // namespace hint
