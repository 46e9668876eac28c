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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "hint/encoders.hpp"
#include "hint/errors.hpp"
#include "hint/finite_diff.hpp"
#include "hint/ops.hpp"

using namespace hint;

namespace {

using Mat = std::vector<std::vector<double>>;

Mat to_mat(const Tensor& t) {
  Mat m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t.at(i, j);
  return m;
}

Mat mm(const Mat& a, const Mat& b) {
  Mat c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b[0].size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

Mat ln(const Mat& x, const Tensor& gamma, const Tensor& beta) {
  Mat out = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(x[i].size());
    double mean = 0.0, var = 0.0;
    for (double v : x[i]) mean += v;
    mean /= n;
    for (double v : x[i]) var += (v - mean) * (v - mean);
    var /= n;
    for (std::size_t j = 0; j < x[i].size(); ++j)
      out[i][j] = (x[i][j] - mean) / std::sqrt(var + 1e-5) * gamma[j] + beta[j];
  }
  return out;
}

// Step-by-step post-norm block written without the autodiff ops.
Mat reference_block(const Mat& queries, const Mat& context, const BlockParams& w, std::size_t heads) {
  const std::size_t d = queries[0].size(), hd = d / heads;
  const Mat q = mm(queries, to_mat(w.wq)), k = mm(context, to_mat(w.wk)), v = mm(context, to_mat(w.wv));
  Mat merged(queries.size(), std::vector<double>(d, 0.0));
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < queries.size(); ++i) {
      std::vector<double> logits(context.size());
      for (std::size_t j = 0; j < context.size(); ++j) {
        double s = 0.0;
        for (std::size_t c = h * hd; c < (h + 1) * hd; ++c) s += q[i][c] * k[j][c];
        logits[j] = s / std::sqrt(static_cast<double>(hd));
      }
      const double mx = *std::max_element(logits.begin(), logits.end());
      double z = 0.0;
      for (double& l : logits) z += (l = std::exp(l - mx));
      for (std::size_t j = 0; j < context.size(); ++j)
        for (std::size_t c = h * hd; c < (h + 1) * hd; ++c) merged[i][c] += logits[j] / z * v[j][c];
    }
  }
  Mat attn = mm(merged, to_mat(w.wo));
  for (std::size_t i = 0; i < attn.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) attn[i][j] += queries[i][j];
  const Mat x1 = ln(attn, w.ln1_gamma, w.ln1_beta);
  Mat hidden = mm(x1, to_mat(w.w1));
  for (auto& row : hidden)
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = std::max(0.0, row[j] + w.b1[j]);
  Mat out = mm(hidden, to_mat(w.w2));
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) out[i][j] += w.b2[j] + x1[i][j];
  return ln(out, w.ln2_gamma, w.ln2_beta);
}

double max_diff(const Tensor& t, const Mat& m) {
  double out = 0.0;
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) out = std::max(out, std::fabs(t.at(i, j) - m[i][j]));
  return out;
}

// Initialisation draws tiny weights; these tests want every path to matter.
HintParams lively_params(const ModelDims& dims, std::uint64_t seed) {
  HintParams p = HintParams::initialize(dims, seed);
  std::mt19937_64 rng(seed + 99);
  for (auto& [name, t] : p.named_tensors()) *t = Tensor::randn(t->shape(), rng, 0.4);
  return p;
}

Tensor rnd(Shape s, std::uint64_t seed, double stddev = 1.0) {
  std::mt19937_64 rng(seed);
  return Tensor::randn(std::move(s), rng, stddev);
}

const ModelDims kTiny{4, 3, 8, 2, 16};

}  // namespace

TEST_CASE("model dims") {
  CHECK_NOTHROW(ModelDims{}.validate());
  CHECK_THROWS_AS((ModelDims{4, 3, 8, 3, 16}.validate()), ConfigError);
  CHECK_THROWS_AS((ModelDims{0, 3, 8, 2, 16}.validate()), ConfigError);
}

TEST_CASE("parameter layout is stable and round-trips") {
  const HintParams p = HintParams::initialize(kTiny, 3);
  const std::size_t d = 8, f = 16, q = 4;
  const std::size_t block = 4 * d * d + d * f + f + f * d + d + 4 * d;
  CHECK(p.parameter_count() == q * d + 3 * block + q * d);
  const auto names = p.named_tensors();
  CHECK(names.front().first == "pos_enc");
  CHECK(names[1].first == "vcm.wq");
  CHECK(names.back().first == "pool.ln2_beta");

  const std::vector<double> flat = p.flatten();
  HintParams copy = HintParams::initialize(kTiny, 4);
  CHECK_FALSE(copy == p);
  copy.assign(flat);
  CHECK(copy == p);
  CHECK_THROWS_AS(copy.assign(std::vector<double>(3)), DimensionError);
  CHECK(HintParams::initialize(kTiny, 3) == p);
}

TEST_CASE("initialisation statistics") {
  const HintParams p = HintParams::initialize(ModelDims{8, 6, 32, 4, 128}, 0);
  const BlockParams& b = p.weights.vcm;
  double s = 0.0, s2 = 0.0;
  for (double v : b.w1.data()) {
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(b.w1.size());
  CHECK(std::fabs(s / n) < 0.002);
  CHECK(std::sqrt(s2 / n) == doctest::Approx(0.02).epsilon(0.05));
  for (double v : b.b1.data()) CHECK(v == 0.0);
  for (double v : b.ln2_gamma.data()) CHECK(v == 1.0);
  for (double v : b.ln2_beta.data()) CHECK(v == 0.0);
  CHECK(p.all_finite());
}

TEST_CASE("positional_encode") {
  Graph g;
  const Tensor v = rnd({4, 8}, 1), p = rnd({4, 8}, 2);
  CHECK(positional_encode(g.constant(v), g.constant(Tensor::zeros({4, 8}))).value() == v);
  CHECK(positional_encode(g.constant(Tensor::zeros({4, 8})), g.constant(p)).value() == p);
  const Tensor sum = positional_encode(g.constant(v), g.constant(p)).value();
  for (std::size_t i = 0; i < sum.size(); ++i) CHECK(std::fabs(sum[i] - (v[i] + p[i])) <= 1e-15);
  CHECK_THROWS_AS(positional_encode(g.constant(v), g.constant(rnd({3, 8}, 3))), DimensionError);
}

TEST_CASE("transformer block matches the straight-line reference") {
  const HintParams p = lively_params(kTiny, 5);
  const Tensor x = rnd({3, 8}, 6);
  Graph g;
  const ModelNodes nodes = bind(g, p);
  const Tensor out = transformer_block(g.constant(x), nodes.vcm, 2).value();
  CHECK(out.shape() == x.shape());
  CHECK(max_diff(out, reference_block(to_mat(x), to_mat(x), p.weights.vcm, 2)) <= 1e-10);

  const Tensor ctx = rnd({5, 8}, 7);
  const Tensor pooled = cross_attention_block(g.constant(x), g.constant(ctx), nodes.pool, 2).value();
  CHECK(max_diff(pooled, reference_block(to_mat(x), to_mat(ctx), p.weights.pool, 2)) <= 1e-10);
}

TEST_CASE("single-row attention is exactly one") {
  const HintParams p = lively_params(kTiny, 8);
  Graph g;
  const ModelNodes nodes = bind(g, p);
  AttentionTrace trace;
  const Var out = transformer_block(g.constant(rnd({1, 8}, 9)), nodes.vcm, 2, &trace);
  CHECK(out.shape() == Shape{1, 8});
  REQUIRE(trace.weights.size() == 2);
  for (const Tensor& w : trace.weights) CHECK(w == Tensor::matrix({{1.0}}));
}

TEST_CASE("every attention row sums to one") {
  const HintParams p = lively_params(kTiny, 10);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g;
    const ModelNodes nodes = bind(g, p);
    AttentionTrace trace;
    encode_query(g.constant(rnd({4, 8}, seed)), g.constant(rnd({3, 8}, seed + 50)), nodes, kTiny, {}, &trace);
    CHECK(trace.weights.size() == 6);  // vcm, ccm, pool, two heads each
    for (const Tensor& w : trace.weights)
      for (std::size_t r = 0; r < w.rows(); ++r) {
        double s = 0.0;
        for (double v : w.row(r)) s += v;
        CHECK(std::fabs(s - 1.0) <= 1e-6);
      }
  }
}

TEST_CASE("transformer block is permutation equivariant, position encoding breaks it") {
  const HintParams p = lively_params(kTiny, 11);
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor x = rnd({4, 8}, 100 + trial);
    std::vector<std::size_t> perm(4);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    if (std::is_sorted(perm.begin(), perm.end())) std::swap(perm[0], perm[3]);
    const auto permute = [&](const Tensor& t) {
      Tensor out = t;
      for (std::size_t i = 0; i < perm.size(); ++i)
        std::copy(t.row(perm[i]).begin(), t.row(perm[i]).end(), out.row(i).begin());
      return out;
    };
    Graph g;
    const ModelNodes nodes = bind(g, p);
    const Tensor direct = permute(transformer_block(g.constant(x), nodes.vcm, 2).value());
    const Tensor swapped = transformer_block(g.constant(permute(x)), nodes.vcm, 2).value();
    CHECK(max_abs_diff(direct, swapped) <= 1e-9);

    const Tensor with_p = permute(transformer_block(positional_encode(g.constant(x), nodes.pos_enc), nodes.vcm, 2).value());
    const Tensor with_p_swapped =
        transformer_block(positional_encode(g.constant(permute(x)), nodes.pos_enc), nodes.vcm, 2).value();
    CHECK(max_abs_diff(with_p, with_p_swapped) >= 1e-6);
  }
}

TEST_CASE("ablation bypasses") {
  const HintParams p = lively_params(kTiny, 13);
  Graph g;
  const ModelNodes nodes = bind(g, p);
  const Var v = g.constant(rnd({4, 8}, 14));
  const Var t = g.constant(rnd({3, 8}, 15));

  EncoderOptions no_vcm;
  no_vcm.vcm = false;
  CHECK(vcm(v, nodes, kTiny, no_vcm).value() == v.value());
  CHECK(vcm(v, nodes, kTiny, {}).shape() == Shape{4, 8});

  EncoderOptions no_ccm;
  no_ccm.ccm = false;
  const Tensor joint = ccm(v, t, nodes, kTiny, no_ccm).value();
  CHECK(joint == concat_rows(v, t).value());
  CHECK(ccm(v, t, nodes, kTiny, {}).rows() == 7);
  CHECK_THROWS_AS(ccm(v, g.constant(rnd({3, 6}, 16)), nodes, kTiny, {}), DimensionError);

  EncoderOptions all_off{false, false, false};
  const Tensor reduced = encode_query(v, t, nodes, kTiny, all_off).value();
  CHECK(reduced == qformer_pool(concat_rows(v, t), nodes, kTiny).value());
}

TEST_CASE("qformer pooling yields Q rows regardless of context length") {
  const HintParams p = lively_params(kTiny, 17);
  Graph g;
  const ModelNodes nodes = bind(g, p);
  for (std::size_t n : {1u, 3u, 7u, 20u}) CHECK(qformer_pool(g.constant(rnd({n, 8}, n)), nodes, kTiny).shape() == Shape{4, 8});
}

TEST_CASE("encode_query equals the manual composition and is deterministic") {
  const HintParams p = lively_params(kTiny, 18);
  const Tensor ref = rnd({4, 8}, 19), text = rnd({3, 8}, 20);
  Graph g;
  const ModelNodes nodes = bind(g, p);
  const Var r = g.constant(ref), t = g.constant(text);
  const Tensor pipeline = encode_query(r, t, nodes, kTiny, {}).value();
  const Var v = add(r, nodes.pos_enc);
  const Var v_hat = transformer_block(v, nodes.vcm, 2);
  const Var fused = transformer_block(concat_rows(v_hat, t), nodes.ccm, 2);
  const Tensor manual = cross_attention_block(nodes.pool_queries, fused, nodes.pool, 2).value();
  CHECK(pipeline == manual);

  Graph h;
  CHECK(encode_query(h.constant(ref), h.constant(text), bind(h, p), kTiny, {}).value() == pipeline);
}

TEST_CASE("encode_target") {
  const HintParams p = lively_params(kTiny, 21);
  Graph g;
  const ModelNodes nodes = bind(g, p);
  const Var target = g.constant(rnd({4, 8}, 22));
  CHECK(encode_target(target, nodes, kTiny, {}).value() == target.value());
  EncoderOptions pooled;
  pooled.target_pool = true;
  CHECK(encode_target(target, nodes, kTiny, pooled).value() == qformer_pool(target, nodes, kTiny).value());
  CHECK_THROWS_AS(encode_target(g.constant(rnd({3, 8}, 1)), nodes, kTiny, {}), DimensionError);
}

TEST_CASE("encoder output stays finite for large inputs") {
  const HintParams p = lively_params(kTiny, 23);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Graph g;
    Tensor ref = rnd({4, 8}, seed), text = rnd({3, 8}, seed + 7);
    for (double& v : ref.data()) v = std::clamp(v * 60.0, -100.0, 100.0);
    for (double& v : text.data()) v = std::clamp(v * 60.0, -100.0, 100.0);
    CHECK(encode_query(g.constant(ref), g.constant(text), bind(g, p), kTiny, {}).value().all_finite());
  }
}

TEST_CASE("encode_query gradients match finite differences") {
  const HintParams p = lively_params(kTiny, 24);
  const Tensor ref = rnd({4, 8}, 25), text = rnd({3, 8}, 26), proj = rnd({4, 8}, 27);
  for (const EncoderOptions& opt : {EncoderOptions{}, EncoderOptions{true, true, false}}) {
    const auto loss = [&](Graph& g, const ModelNodes& nodes) {
      return sum(mul(encode_query(g.constant(ref), g.constant(text), nodes, kTiny, opt), g.constant(proj)));
    };
    Graph g;
    const ModelNodes nodes = bind(g, p);
    g.backward(loss(g, nodes));
    const std::vector<double> analytic = gather_gradients(g, nodes);
    HintParams probe = p;
    const std::vector<double> numeric = finite_diff(
        [&](std::span<const double> x) {
          probe.assign(x);
          Graph h;
          return loss(h, bind(h, probe)).value().item();
        },
        p.flatten());
    CHECK(compare_gradients(analytic, numeric, 1e-5).max_rel_error < 1e-4);
  }
}
