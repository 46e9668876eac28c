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

// Dual context extraction: position encoding, visual context modelling (a
// post-norm transformer block over the reference queries), cross-modal
// context modelling (the same block over [visual ; text]) and query pooling,
// where Q learnable queries cross-attend to the fused sequence.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hint/graph.hpp"
#include "hint/tensor.hpp"

namespace hint {

struct ModelDims {
  std::size_t queries = 8;   // Q, rows of reference / target / fused features
  std::size_t text_len = 6;  // L
  std::size_t width = 32;    // D
  std::size_t heads = 4;     // H, must divide D
  std::size_t ffn = 128;     // hidden width of the feed-forward sublayer

  void validate() const;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Weights of one attention + feed-forward block. Attention projections have
/// no bias; the feed-forward layers do.
template <class T>
struct BlockWeights {
  T wq, wk, wv, wo;  // D x D, heads are column slices
  T w1, b1;          // D x F, 1 x F
  T w2, b2;          // F x D, 1 x D
  T ln1_gamma, ln1_beta;
  T ln2_gamma, ln2_beta;
};

/// Calls f(name, field) for every tensor of a block in a fixed order.
template <class Block, class F>
void for_each_field(Block& b, const std::string& prefix, F&& f) {
  f(prefix + "wq", b.wq);
  f(prefix + "wk", b.wk);
  f(prefix + "wv", b.wv);
  f(prefix + "wo", b.wo);
  f(prefix + "w1", b.w1);
  f(prefix + "b1", b.b1);
  f(prefix + "w2", b.w2);
  f(prefix + "b2", b.b2);
  f(prefix + "ln1_gamma", b.ln1_gamma);
  f(prefix + "ln1_beta", b.ln1_beta);
  f(prefix + "ln2_gamma", b.ln2_gamma);
  f(prefix + "ln2_beta", b.ln2_beta);
}

template <class T>
struct ModelWeights {
  T pos_enc;  // Q x D
  BlockWeights<T> vcm;
  BlockWeights<T> ccm;
  T pool_queries;  // Q x D
  BlockWeights<T> pool;
};

/// The stable parameter ordering used by the optimizer, the params file and
/// gradient checking.
template <class Model, class F>
void for_each_field(Model& m, F&& f) {
  f(std::string("pos_enc"), m.pos_enc);
  for_each_field(m.vcm, "vcm.", f);
  for_each_field(m.ccm, "ccm.", f);
  f(std::string("pool_queries"), m.pool_queries);
  for_each_field(m.pool, "pool.", f);
}

using BlockParams = BlockWeights<Tensor>;
using BlockNodes = BlockWeights<Var>;
using ModelNodes = ModelWeights<Var>;

struct HintParams {
  ModelDims dims;
  ModelWeights<Tensor> weights;

  /// N(0, 0.02^2) for projections, position encodings and pool queries; zero
  /// biases; unit gamma, zero beta.
  static HintParams initialize(const ModelDims& dims, std::uint64_t seed);

  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  std::vector<std::pair<std::string, const Tensor*>> named_tensors() const;
  std::vector<std::pair<std::string, Tensor*>> named_tensors();
  bool all_finite() const;

  friend bool operator==(const HintParams& a, const HintParams& b);
};

/// Registers every parameter tensor as a trainable leaf of g.
ModelNodes bind(Graph& g, const HintParams& params);

/// Gradients of the last backward() w.r.t. each bound parameter, flattened in
/// the same order as HintParams::flatten().
std::vector<double> gather_gradients(const Graph& g, const ModelNodes& nodes);

struct EncoderOptions {
  bool vcm = true;  // false: skip visual context modelling
  bool ccm = true;  // false: fused sequence is the raw concatenation
  bool dce = true;  // false: pool concat(reference, text) directly
  bool target_pool = false;  // true: targets also pass through qformer_pool
};

/// Per-head attention weight matrices, appended in evaluation order.
struct AttentionTrace {
  std::vector<Tensor> weights;
};

constexpr double kLayerNormEps = 1e-5;

Var positional_encode(Var v, Var pos);

/// Multi-head scaled dot-product attention with output projection. Queries
/// come from `queries`, keys and values from `context`.
Var multi_head_attention(Var queries, Var context, const BlockNodes& w, std::size_t heads,
                         AttentionTrace* trace = nullptr);

Var feed_forward(Var x, const BlockNodes& w);

/// X' = LN(MSA(X) + X); out = LN(X' + FFN(X')).
Var transformer_block(Var x, const BlockNodes& w, std::size_t heads, AttentionTrace* trace = nullptr);

/// Same as transformer_block, but queries attend to a separate context and the
/// residual is taken from the queries.
Var cross_attention_block(Var queries, Var context, const BlockNodes& w, std::size_t heads,
                          AttentionTrace* trace = nullptr);

Var vcm(Var v, const ModelNodes& m, const ModelDims& dims, const EncoderOptions& opt,
        AttentionTrace* trace = nullptr);
Var ccm(Var v_hat, Var text, const ModelNodes& m, const ModelDims& dims, const EncoderOptions& opt,
        AttentionTrace* trace = nullptr);
Var qformer_pool(Var fused, const ModelNodes& m, const ModelDims& dims, AttentionTrace* trace = nullptr);

/// Reference (Q x D) + text (L x D) -> context-aware fused features (Q x D).
Var encode_query(Var reference, Var text, const ModelNodes& m, const ModelDims& dims, const EncoderOptions& opt,
                 AttentionTrace* trace = nullptr);

/// F for scoring: the stored target features, or their pooled form when
/// opt.target_pool is set.
Var encode_target(Var target, const ModelNodes& m, const ModelDims& dims, const EncoderOptions& opt,
                  AttentionTrace* trace = nullptr);

}  // namespace hint
