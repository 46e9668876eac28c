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

#include "hint/scoring.hpp"

#include <string>

#include "hint/errors.hpp"

namespace hint {
namespace {

void check_pair(Var fused, Var target) {
  if (fused.rows() != target.rows() || fused.cols() != target.cols()) {
    throw DimensionError("relevance: fused " + to_string(fused.shape()) + " vs target " + to_string(target.shape()));
  }
}

}  // namespace

std::vector<double> prefix_weights(std::size_t queries) {
  std::vector<double> w(queries, 0.0);
  const double q = static_cast<double>(queries);
  double tail = 0.0;  // sum_{k > i} 1/k, built from the back
  for (std::size_t i = queries; i-- > 0;) {
    tail += 1.0 / static_cast<double>(i + 1);
    w[i] = tail / q;
  }
  return w;
}

Var incremental_similarity(Var fused, Var target, std::size_t k, Axis axis) {
  check_pair(fused, target);
  if (k < 1 || k > fused.rows()) {
    throw ArgumentError("incremental_similarity: k = " + std::to_string(k) + " outside [1, " +
                        std::to_string(fused.rows()) + "]");
  }
  return softmax(matmul(slice_rows(fused, 0, k), transpose(target)), axis);
}

RelevanceNodes relevance_profile(Var fused, Var target, const ScoringOptions& opt) {
  check_pair(fused, target);
  const std::size_t q = fused.rows();
  RelevanceNodes out;
  if (!opt.multi_channel) {
    out.s_u = mean_pool(incremental_similarity(fused, target, q, opt.softmax_axis));
    out.per_level.push_back(out.s_u);
    return out;
  }
  for (std::size_t k = 1; k <= q; ++k)
    out.per_level.push_back(mean_pool(incremental_similarity(fused, target, k, opt.softmax_axis)));
  out.s_u = mean_pool(concat_rows(out.per_level));
  return out;
}

Var relevance_vector(Var fused, Var target, const ScoringOptions& opt) {
  check_pair(fused, target);
  if (opt.softmax_axis != Axis::rows) return relevance_profile(fused, target, opt).s_u;
  const std::size_t q = fused.rows();
  const Var rows = softmax(matmul(fused, transpose(target)), Axis::rows);
  if (!opt.multi_channel) return mean_pool(rows);
  const Var weights = fused.graph->constant(Tensor({1, q}, prefix_weights(q)));
  return matmul(weights, rows);
}

RelevanceProfile relevance_profile(const Tensor& fused, const Tensor& target, const ScoringOptions& opt) {
  Graph g;
  const RelevanceNodes nodes = relevance_profile(g.constant(fused), g.constant(target), opt);
  RelevanceProfile out{nodes.s_u.value(), {}};
  for (const Var& level : nodes.per_level) out.per_level.push_back(level.value());
  return out;
}

Var cosine_score(Var fused, Var target) {
  const Var u = normalize_rows(mean_pool(fused));
  const Var f = normalize_rows(mean_pool(target));
  return matmul(u, transpose(f));
}

double cosine_score(const Tensor& fused, const Tensor& target) {
  Graph g;
  return cosine_score(g.constant(fused), g.constant(target)).value().item();
}

Var pair_score(Var fused, Var target, const ScoringOptions& opt) {
  if (!opt.qcr) return cosine_score(fused, target);
  const Var s_u = relevance_vector(fused, target, opt);
  return opt.reduction == Reduction::max ? max_entry(s_u) : logsumexp(s_u);
}

double pair_score(const Tensor& fused, const Tensor& target, const ScoringOptions& opt) {
  Graph g;
  return pair_score(g.constant(fused), g.constant(target), opt).value().item();
}

Var score_matrix(std::span<const Var> queries, std::span<const Var> targets, const ScoringOptions& opt) {
  if (queries.size() != targets.size() || queries.empty()) {
    throw DimensionError("score_matrix: " + std::to_string(queries.size()) + " queries vs " +
                         std::to_string(targets.size()) + " targets");
  }
  const std::size_t b = queries.size();
  std::vector<Var> entries;
  entries.reserve(b * b);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) entries.push_back(pair_score(queries[i], targets[j], opt));
  return stack(entries, b, b);
}

Tensor score_matrix(std::span<const Tensor> queries, std::span<const Tensor> targets, const ScoringOptions& opt) {
  Graph g;
  std::vector<Var> q, t;
  for (const Tensor& x : queries) q.push_back(g.constant(x));
  for (const Tensor& x : targets) t.push_back(g.constant(x));
  return score_matrix(q, t, opt).value();
}

}  // namespace hint
