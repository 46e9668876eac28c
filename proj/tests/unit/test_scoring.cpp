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
#include <random>
#include <vector>

#include "hint/errors.hpp"
#include "hint/finite_diff.hpp"
#include "hint/ops.hpp"
#include "hint/scoring.hpp"

using namespace hint;

namespace {

Tensor rnd(Shape s, std::uint64_t seed, double stddev = 1.0) {
  std::mt19937_64 rng(seed);
  return Tensor::randn(std::move(s), rng, stddev);
}

// Naive loops: S_k = rowwise softmax of U[:k] F^T, Sb_k = mean of its rows,
// s_u = mean of Sb_1..Sb_Q.
std::vector<std::vector<double>> oracle_levels(const Tensor& u, const Tensor& f) {
  const std::size_t q = u.rows(), d = u.cols();
  std::vector<std::vector<double>> levels;
  for (std::size_t k = 1; k <= q; ++k) {
    std::vector<double> bar(q, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<double> row(q);
      for (std::size_t j = 0; j < q; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += u.at(i, c) * f.at(j, c);
        row[j] = s;
      }
      const double mx = *std::max_element(row.begin(), row.end());
      double z = 0.0;
      for (double& r : row) z += (r = std::exp(r - mx));
      for (std::size_t j = 0; j < q; ++j) bar[j] += row[j] / z / static_cast<double>(k);
    }
    levels.push_back(bar);
  }
  return levels;
}

std::vector<double> oracle_s_u(const Tensor& u, const Tensor& f) {
  const auto levels = oracle_levels(u, f);
  std::vector<double> s(u.rows(), 0.0);
  for (const auto& l : levels)
    for (std::size_t j = 0; j < s.size(); ++j) s[j] += l[j] / static_cast<double>(levels.size());
  return s;
}

double sum_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("incremental_similarity") {
  const Tensor u = rnd({4, 3}, 1), f = rnd({4, 3}, 2);
  Graph g;
  const Tensor s1 = incremental_similarity(g.constant(u), g.constant(f), 1).value();
  CHECK(s1.shape() == Shape{1, 4});
  const Tensor direct = softmax(matmul(slice_rows(g.constant(u), 0, 1), transpose(g.constant(f))), Axis::rows).value();
  CHECK(s1 == direct);

  for (std::size_t k = 1; k <= 4; ++k) {
    const Tensor s = incremental_similarity(g.constant(u), g.constant(f), k).value();
    CHECK(s.shape() == Shape{k, 4});
    for (std::size_t r = 0; r < k; ++r) CHECK(std::fabs(sum_of(s.row(r)) - 1.0) <= 1e-6);
  }
  CHECK_THROWS_AS(incremental_similarity(g.constant(u), g.constant(f), 0), ArgumentError);
  CHECK_THROWS_AS(incremental_similarity(g.constant(u), g.constant(f), 5), ArgumentError);
  CHECK_THROWS_AS(incremental_similarity(g.constant(u), g.constant(rnd({3, 3}, 3)), 1), DimensionError);
}

TEST_CASE("incremental_similarity on a fixed 2x2 instance") {
  const Tensor u = Tensor::matrix({{1.0, 0.5}, {-0.3, 2.0}});
  const Tensor f = Tensor::matrix({{0.2, -1.0}, {0.7, 0.4}});
  Graph g;
  const Tensor s = incremental_similarity(g.constant(u), g.constant(f), 2).value();
  for (std::size_t i = 0; i < 2; ++i) {
    double logits[2];
    for (std::size_t j = 0; j < 2; ++j) logits[j] = u.at(i, 0) * f.at(j, 0) + u.at(i, 1) * f.at(j, 1);
    const double z = std::exp(logits[0]) + std::exp(logits[1]);
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::fabs(s.at(i, j) - std::exp(logits[j]) / z) <= 1e-15);
  }
}

TEST_CASE("prefix weights") {
  const auto w = prefix_weights(3);
  CHECK(w[0] == doctest::Approx((1.0 + 0.5 + 1.0 / 3.0) / 3.0).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx((0.5 + 1.0 / 3.0) / 3.0).epsilon(1e-15));
  CHECK(w[2] == doctest::Approx((1.0 / 3.0) / 3.0).epsilon(1e-15));
  for (std::size_t q = 1; q <= 12; ++q) CHECK(std::fabs(sum_of(prefix_weights(q)) - 1.0) <= 1e-14);
}

TEST_CASE("relevance profile examples") {
  const RelevanceProfile one = relevance_profile(rnd({1, 4}, 1), rnd({1, 4}, 2));
  CHECK(one.s_u == Tensor::matrix({{1.0}}));

  const Tensor u = rnd({3, 4}, 3), f = rnd({3, 4}, 4);
  const RelevanceProfile prof = relevance_profile(u, f);
  CHECK(prof.per_level.size() == 3);
  CHECK(std::fabs(sum_of(prof.s_u.data()) - 1.0) <= 1e-6);
  const auto levels = oracle_levels(u, f);
  const auto s = oracle_s_u(u, f);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::fabs(sum_of(prof.per_level[k].data()) - 1.0) <= 1e-6);
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::fabs(prof.per_level[k][j] - levels[k][j]) <= 1e-12);
  }
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(prof.s_u[j] >= 0.0);
    CHECK(std::fabs(prof.s_u[j] - s[j]) <= 1e-12);
  }
}

TEST_CASE("without multi-channel only the last level is used") {
  ScoringOptions no_mc;
  no_mc.multi_channel = false;
  const Tensor u = rnd({4, 5}, 5), f = rnd({4, 5}, 6);
  const RelevanceProfile prof = relevance_profile(u, f, no_mc);
  const auto levels = oracle_levels(u, f);
  REQUIRE(prof.per_level.size() == 1);
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::fabs(prof.s_u[j] - levels[3][j]) <= 1e-12);

  const Tensor u1 = rnd({1, 5}, 7), f1 = rnd({1, 5}, 8);
  CHECK(relevance_profile(u1, f1, no_mc).s_u == relevance_profile(u1, f1).s_u);
}

TEST_CASE("fast relevance vector equals the level loop") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t q = 1 + seed % 6;
    const Tensor u = rnd({q, 5}, seed), f = rnd({q, 5}, seed + 1000);
    for (bool mc : {true, false}) {
      ScoringOptions opt;
      opt.multi_channel = mc;
      Graph g;
      const Tensor fast = relevance_vector(g.constant(u), g.constant(f), opt).value();
      CHECK(max_abs_diff(fast, relevance_profile(u, f, opt).s_u) <= 1e-12);
    }
  }
}

TEST_CASE("mean of s_u is exactly 1/Q") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t q = 1 + seed % 8;
    const RelevanceProfile prof = relevance_profile(rnd({q, 6}, seed, 2.0), rnd({q, 6}, seed + 500, 2.0));
    CHECK(std::fabs(sum_of(prof.s_u.data()) / static_cast<double>(q) - 1.0 / static_cast<double>(q)) <= 1e-12);
  }
}

TEST_CASE("profile is invariant to per-row logit shifts") {
  // The last column of F is all ones, so moving U[i, last] shifts row i's logits.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> shift(-20.0, 20.0);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor u = rnd({4, 5}, 100 + trial), f = rnd({4, 5}, 200 + trial);
    for (std::size_t j = 0; j < 4; ++j) f.at(j, 4) = 1.0;
    Tensor shifted = u;
    for (std::size_t i = 0; i < 4; ++i) shifted.at(i, 4) += shift(rng);
    const RelevanceProfile a = relevance_profile(u, f), b = relevance_profile(shifted, f);
    CHECK(max_abs_diff(a.s_u, b.s_u) <= 1e-12);
    for (std::size_t k = 0; k < 4; ++k) CHECK(max_abs_diff(a.per_level[k], b.per_level[k]) <= 1e-12);
  }
}

TEST_CASE("column-axis softmax makes every pair score the same") {
  ScoringOptions cols;
  cols.softmax_axis = Axis::cols;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RelevanceProfile prof = relevance_profile(rnd({4, 3}, seed), rnd({4, 3}, seed + 9), cols);
    for (std::size_t k = 0; k < 4; ++k)
      for (double v : prof.per_level[k].data()) CHECK(std::fabs(v - 1.0 / static_cast<double>(k + 1)) <= 1e-12);
    const double expected = (1.0 + 0.5 + 1.0 / 3.0 + 0.25) / 4.0;
    for (double v : prof.s_u.data()) CHECK(std::fabs(v - expected) <= 1e-12);
  }
}

TEST_CASE("pair_score") {
  CHECK(pair_score(rnd({1, 3}, 1), rnd({1, 3}, 2)) == 1.0);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t q = 1 + seed % 5;
    const Tensor u = rnd({q, 4}, seed), f = rnd({q, 4}, seed + 77);
    const double score = pair_score(u, f);
    const auto s = oracle_s_u(u, f);
    CHECK(std::fabs(score - *std::max_element(s.begin(), s.end())) <= 1e-12);
    CHECK(score >= 1.0 / static_cast<double>(q) - 1e-15);
    CHECK(score <= 1.0 + 1e-15);

    ScoringOptions lse;
    lse.reduction = Reduction::logsumexp;
    double z = 0.0;
    for (double v : s) z += std::exp(v);
    CHECK(std::fabs(pair_score(u, f, lse) - std::log(z)) <= 1e-12);
  }
}

TEST_CASE("without QCR the score is the cosine of mean-pooled features") {
  const Tensor u = rnd({3, 4}, 1), f = rnd({3, 4}, 2);
  std::vector<double> mu(4, 0.0), mf(4, 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < 4; ++c) {
      mu[c] += u.at(i, c) / 3.0;
      mf[c] += f.at(i, c) / 3.0;
    }
  double dot = 0, nu = 0, nf = 0;
  for (std::size_t c = 0; c < 4; ++c) {
    dot += mu[c] * mf[c];
    nu += mu[c] * mu[c];
    nf += mf[c] * mf[c];
  }
  const double cosine = dot / std::sqrt(nu * nf);
  ScoringOptions no_qcr;
  no_qcr.qcr = false;
  CHECK(std::fabs(pair_score(u, f, no_qcr) - cosine) <= 1e-12);
  CHECK(std::fabs(cosine_score(u, f) - cosine) <= 1e-12);
}

TEST_CASE("score_matrix") {
  std::vector<Tensor> qs, ts;
  for (std::uint64_t i = 0; i < 4; ++i) {
    qs.push_back(rnd({3, 4}, i));
    ts.push_back(rnd({3, 4}, i + 10));
  }
  const Tensor s = score_matrix(qs, ts);
  CHECK(s.shape() == Shape{4, 4});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(s.at(i, j) == pair_score(qs[i], ts[j]));
      CHECK(s.at(i, j) >= 1.0 / 3.0 - 1e-15);
      CHECK(s.at(i, j) <= 1.0);
    }
  const std::vector<Tensor> one_q{qs[0]}, one_t{ts[0]};
  CHECK(score_matrix(one_q, one_t).shape() == Shape{1, 1});
  const std::vector<Tensor> two_t{ts[0], ts[1]};
  CHECK_THROWS_AS(score_matrix(one_q, two_t), DimensionError);
}

TEST_CASE("pair_score gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    for (Reduction red : {Reduction::max, Reduction::logsumexp}) {
      ScoringOptions opt;
      opt.reduction = red;
      const Tensor u = rnd({4, 3}, seed), f = rnd({4, 3}, seed + 40);
      Graph g;
      const Var uv = g.parameter(u), fv = g.parameter(f);
      g.backward(pair_score(uv, fv, opt));
      const Tensor gu = g.grad(uv), gf = g.grad(fv);
      std::vector<double> analytic(gu.data().begin(), gu.data().end());
      analytic.insert(analytic.end(), gf.data().begin(), gf.data().end());
      std::vector<double> x(u.data().begin(), u.data().end());
      x.insert(x.end(), f.data().begin(), f.data().end());
      const auto numeric = finite_diff(
          [&](std::span<const double> p) {
            const Tensor a({4, 3}, {p.begin(), p.begin() + 12});
            const Tensor b({4, 3}, {p.begin() + 12, p.end()});
            return pair_score(a, b, opt);
          },
          x);
      CHECK(compare_gradients(analytic, numeric).max_rel_error < 1e-4);
    }
  }
}
