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

#include "hint/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hint/errors.hpp"
#include "hint/ops.hpp"

namespace hint {

void ModelDims::validate() const {
  if (queries == 0 || text_len == 0 || width == 0 || heads == 0 || ffn == 0) {
    throw ConfigError("model dims must all be positive");
  }
  if (width % heads != 0) {
    throw ConfigError("width " + std::to_string(width) + " is not divisible by " + std::to_string(heads) + " heads");
  }
}

namespace {

BlockParams init_block(const ModelDims& d, std::mt19937_64& rng) {
  const double sd = 0.02;
  BlockParams b;
  b.wq = Tensor::randn({d.width, d.width}, rng, sd);
  b.wk = Tensor::randn({d.width, d.width}, rng, sd);
  b.wv = Tensor::randn({d.width, d.width}, rng, sd);
  b.wo = Tensor::randn({d.width, d.width}, rng, sd);
  b.w1 = Tensor::randn({d.width, d.ffn}, rng, sd);
  b.b1 = Tensor::zeros({1, d.ffn});
  b.w2 = Tensor::randn({d.ffn, d.width}, rng, sd);
  b.b2 = Tensor::zeros({1, d.width});
  b.ln1_gamma = Tensor::full({1, d.width}, 1.0);
  b.ln1_beta = Tensor::zeros({1, d.width});
  b.ln2_gamma = Tensor::full({1, d.width}, 1.0);
  b.ln2_beta = Tensor::zeros({1, d.width});
  return b;
}

}  // namespace

HintParams HintParams::initialize(const ModelDims& dims, std::uint64_t seed) {
  dims.validate();
  std::mt19937_64 rng(seed);
  HintParams p;
  p.dims = dims;
  p.weights.pos_enc = Tensor::randn({dims.queries, dims.width}, rng, 0.02);
  p.weights.vcm = init_block(dims, rng);
  p.weights.ccm = init_block(dims, rng);
  p.weights.pool_queries = Tensor::randn({dims.queries, dims.width}, rng, 0.02);
  p.weights.pool = init_block(dims, rng);
  return p;
}

std::vector<std::pair<std::string, const Tensor*>> HintParams::named_tensors() const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for_each_field(weights, [&](const std::string& name, const Tensor& t) { out.emplace_back(name, &t); });
  return out;
}

std::vector<std::pair<std::string, Tensor*>> HintParams::named_tensors() {
  std::vector<std::pair<std::string, Tensor*>> out;
  for_each_field(weights, [&](const std::string& name, Tensor& t) { out.emplace_back(name, &t); });
  return out;
}

std::size_t HintParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named_tensors()) n += t->size();
  return n;
}

std::vector<double> HintParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& [name, t] : named_tensors()) flat.insert(flat.end(), t->data().begin(), t->data().end());
  return flat;
}

void HintParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw DimensionError("assign: expected " + std::to_string(parameter_count()) + " values, got " +
                         std::to_string(flat.size()));
  }
  std::size_t at = 0;
  for (auto& [name, t] : named_tensors()) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), t->size(), t->data().begin());
    at += t->size();
  }
}

bool HintParams::all_finite() const {
  const auto tensors = named_tensors();
  return std::all_of(tensors.begin(), tensors.end(), [](const auto& nt) { return nt.second->all_finite(); });
}

bool operator==(const HintParams& a, const HintParams& b) {
  if (!(a.dims == b.dims)) return false;
  const auto ta = a.named_tensors();
  const auto tb = b.named_tensors();
  for (std::size_t i = 0; i < ta.size(); ++i)
    if (!(*ta[i].second == *tb[i].second)) return false;
  return true;
}

ModelNodes bind(Graph& g, const HintParams& params) {
  ModelNodes nodes;
  // Both structs share the field layout, so a parallel walk pairs them up.
  std::vector<const Tensor*> sources;
  for_each_field(params.weights, [&](const std::string&, const Tensor& t) { sources.push_back(&t); });
  std::size_t i = 0;
  for_each_field(nodes, [&](const std::string&, Var& v) { v = g.parameter(*sources[i++]); });
  return nodes;
}

std::vector<double> gather_gradients(const Graph& g, const ModelNodes& nodes) {
  std::vector<double> flat;
  for_each_field(nodes, [&](const std::string&, const Var& v) {
    const Tensor grad = g.grad(v);
    flat.insert(flat.end(), grad.data().begin(), grad.data().end());
  });
  return flat;
}

Var positional_encode(Var v, Var pos) {
  if (v.shape() != pos.shape()) {
    throw DimensionError("positional_encode: features " + to_string(v.shape()) + " vs encodings " +
                         to_string(pos.shape()));
  }
  return add(v, pos);
}

Var multi_head_attention(Var queries, Var context, const BlockNodes& w, std::size_t heads, AttentionTrace* trace) {
  const std::size_t width = queries.cols();
  if (context.cols() != width) {
    throw DimensionError("attention: query width " + std::to_string(width) + " vs context width " +
                         std::to_string(context.cols()));
  }
  if (heads == 0 || width % heads != 0) throw DimensionError("attention: width not divisible by head count");
  if (queries.rows() == 0 || context.rows() == 0) throw ArgumentError("attention over an empty sequence");

  const std::size_t head_dim = width / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const Var q = matmul(queries, w.wq);
  const Var k = matmul(context, w.wk);
  const Var v = matmul(context, w.wv);
  std::vector<Var> outputs;
  outputs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t c0 = h * head_dim, c1 = c0 + head_dim;
    const Var logits = scale(matmul(slice_cols(q, c0, c1), transpose(slice_cols(k, c0, c1))), inv_sqrt);
    const Var attn = softmax(logits, Axis::rows);
    if (trace) trace->weights.push_back(attn.value());
    outputs.push_back(matmul(attn, slice_cols(v, c0, c1)));
  }
  const Var merged = heads == 1 ? outputs.front() : concat_cols(outputs);
  return matmul(merged, w.wo);
}

Var feed_forward(Var x, const BlockNodes& w) {
  const Var hidden = relu(add_row(matmul(x, w.w1), w.b1));
  return add_row(matmul(hidden, w.w2), w.b2);
}

Var cross_attention_block(Var queries, Var context, const BlockNodes& w, std::size_t heads, AttentionTrace* trace) {
  const Var attended = layer_norm(add(multi_head_attention(queries, context, w, heads, trace), queries),
                                  w.ln1_gamma, w.ln1_beta, kLayerNormEps);
  return layer_norm(add(attended, feed_forward(attended, w)), w.ln2_gamma, w.ln2_beta, kLayerNormEps);
}

Var transformer_block(Var x, const BlockNodes& w, std::size_t heads, AttentionTrace* trace) {
  if (x.rows() == 0) throw ArgumentError("transformer_block on an empty sequence");
  return cross_attention_block(x, x, w, heads, trace);
}

Var vcm(Var v, const ModelNodes& m, const ModelDims& dims, const EncoderOptions& opt, AttentionTrace* trace) {
  if (!opt.vcm) return v;
  return transformer_block(v, m.vcm, dims.heads, trace);
}

Var ccm(Var v_hat, Var text, const ModelNodes& m, const ModelDims& dims, const EncoderOptions& opt,
        AttentionTrace* trace) {
  if (v_hat.cols() != text.cols()) {
    throw DimensionError("ccm: visual width " + std::to_string(v_hat.cols()) + " vs text width " +
                         std::to_string(text.cols()));
  }
  const Var joint = concat_rows(v_hat, text);
  if (!opt.ccm) return joint;
  return transformer_block(joint, m.ccm, dims.heads, trace);
}

Var qformer_pool(Var fused, const ModelNodes& m, const ModelDims& dims, AttentionTrace* trace) {
  if (fused.rows() == 0) throw ArgumentError("qformer_pool on an empty sequence");
  return cross_attention_block(m.pool_queries, fused, m.pool, dims.heads, trace);
}

Var encode_query(Var reference, Var text, const ModelNodes& m, const ModelDims& dims, const EncoderOptions& opt,
                 AttentionTrace* trace) {
  if (!opt.dce) return qformer_pool(concat_rows(reference, text), m, dims, trace);
  const Var v = positional_encode(reference, m.pos_enc);
  const Var v_hat = vcm(v, m, dims, opt, trace);
  const Var fused = ccm(v_hat, text, m, dims, opt, trace);
  return qformer_pool(fused, m, dims, trace);
}

Var encode_target(Var target, const ModelNodes& m, const ModelDims& dims, const EncoderOptions& opt,
                  AttentionTrace* trace) {
  if (target.rows() != dims.queries || target.cols() != dims.width) {
    throw DimensionError("encode_target: expected " + std::to_string(dims.queries) + "x" +
                         std::to_string(dims.width) + ", got " + to_string(target.shape()));
  }
  return opt.target_pool ? qformer_pool(target, m, dims, trace) : target;
}

}  // namespace hint
