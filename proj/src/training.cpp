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

#include "hint/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "hint/errors.hpp"
#include "hint/ops.hpp"
#include "hint/scoring.hpp"

namespace hint {
namespace {

// Separate streams for initialisation, batch order and evaluation subsets.
constexpr std::uint64_t kSamplerStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kSubsetStream = 0xc2b2ae3d27d4eb4fULL;

void check_store(const FeatureStore& store, const ModelDims& dims) {
  if (store.queries() != dims.queries || store.text_len() != dims.text_len || store.width() != dims.width) {
    throw DataError("feature store dims Q=" + std::to_string(store.queries()) + " L=" +
                    std::to_string(store.text_len()) + " D=" + std::to_string(store.width()) +
                    " do not match model dims Q=" + std::to_string(dims.queries) + " L=" +
                    std::to_string(dims.text_len) + " D=" + std::to_string(dims.width));
  }
}

}  // namespace

LossBreakdown BatchGraph::breakdown(double lambda) const {
  LossBreakdown out = total_loss(l_rank ? l_rank->value().item() : 0.0,
                                 l_context ? l_context->value().item() : 0.0, lambda);
  out.total = total.value().item();
  return out;
}

RunConfig adopt_store_dims(RunConfig config, const FeatureStore& store) {
  config.q = store.queries();
  config.l = store.text_len();
  config.d = store.width();
  return config;
}

BatchGraph batch_loss(Graph& g, const ModelNodes& nodes, const FeatureStore& store,
                      std::span<const std::size_t> items, const RunConfig& config) {
  if (items.empty()) throw ArgumentError("batch_loss on an empty batch");
  const ModelDims dims = config.dims();
  const EncoderOptions enc = config.encoder();
  BatchGraph out;
  for (std::size_t i : items) {
    const Var ref = g.constant(store.reference(i));
    const Var text = g.constant(store.text(i));
    out.fused.push_back(encode_query(ref, text, nodes, dims, enc));
    out.targets.push_back(encode_target(g.constant(store.target(i)), nodes, dims, enc));
  }
  if (config.flags.rank_loss) {
    std::vector<Var> u, f;
    for (std::size_t b = 0; b < items.size(); ++b) {
      u.push_back(mean_pool(out.fused[b]));
      f.push_back(mean_pool(out.targets[b]));
    }
    out.l_rank = rank_loss(concat_rows(u), concat_rows(f), config.rank_tau());
  }
  if (config.flags.context_loss) {
    out.l_context = context_loss(score_matrix(out.fused, out.targets, config.scoring()), config.tau);
  }
  if (out.l_rank && out.l_context) {
    out.total = add(*out.l_rank, scale(*out.l_context, config.lambda));
  } else if (out.l_rank) {
    out.total = *out.l_rank;
  } else if (out.l_context) {
    out.total = scale(*out.l_context, config.lambda);
  } else {
    throw ConfigError("rank_loss and context_loss cannot both be off");
  }
  return out;
}

double objective_value(const HintParams& params, const FeatureStore& store, std::span<const std::size_t> items,
                       const RunConfig& config) {
  Graph g;
  const ModelNodes nodes = bind(g, params);
  return batch_loss(g, nodes, store, items, config).total.value().item();
}

LossBreakdown objective_gradient(const HintParams& params, const FeatureStore& store,
                                 std::span<const std::size_t> items, const RunConfig& config,
                                 std::vector<double>& grad) {
  Graph g;
  const ModelNodes nodes = bind(g, params);
  const BatchGraph batch = batch_loss(g, nodes, store, items, config);
  g.backward(batch.total);
  grad = gather_gradients(g, nodes);
  return batch.breakdown(config.lambda);
}

BatchSampler::BatchSampler(std::size_t n, std::size_t batch, std::uint64_t seed)
    : n_(n), batch_(batch), rng_(seed), perm_(n), cursor_(n) {
  if (batch == 0 || batch > n) {
    throw ArgumentError("batch size " + std::to_string(batch) + " must be in [1, " + std::to_string(n) + "]");
  }
}

std::vector<std::size_t> BatchSampler::next() {
  if (cursor_ + batch_ > n_) {
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    std::shuffle(perm_.begin(), perm_.end(), rng_);
    cursor_ = 0;
  }
  std::vector<std::size_t> out(perm_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                               perm_.begin() + static_cast<std::ptrdiff_t>(cursor_ + batch_));
  cursor_ += batch_;
  return out;
}

TrainResult train(const FeatureStore& store, const RunConfig& config, const StepCallback& on_step) {
  const RunConfig cfg = adopt_store_dims(config, store);
  return train(store, cfg, HintParams::initialize(cfg.dims(), cfg.seed), on_step);
}

TrainResult train(const FeatureStore& store, const RunConfig& config, HintParams init, const StepCallback& on_step) {
  config.validate();
  check_store(store, init.dims);
  if (!(init.dims == config.dims())) throw ConfigError("initial params do not match the configured dims");

  TrainResult result{std::move(init), {}};
  OptimState state = OptimState::create(result.params.parameter_count(), config.adamw());
  BatchSampler sampler(store.size(), config.batch, config.seed ^ kSamplerStream);
  std::vector<double> grad;
  std::vector<double> flat;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    const std::vector<std::size_t> items = sampler.next();
    const LossBreakdown loss = objective_gradient(result.params, store, items, config, grad);
    if (!std::isfinite(loss.total)) throw NumericError("non-finite loss at step " + std::to_string(step));
    flat = result.params.flatten();
    adamw_step(flat, grad, state);
    result.params.assign(flat);
    result.trace.push_back(loss);
    if (on_step && !on_step(step, result.params)) break;
  }
  return result;
}

EncodedGallery encode_gallery(const FeatureStore& store, const HintParams& params, const RunConfig& config) {
  check_store(store, params.dims);
  Graph g;
  const ModelNodes nodes = bind(g, params);
  const EncoderOptions enc = config.encoder();
  EncodedGallery out;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Var fused = encode_query(g.constant(store.reference(i)), g.constant(store.text(i)), nodes, params.dims, enc);
    out.fused.push_back(fused.value());
    out.targets.push_back(encode_target(g.constant(store.target(i)), nodes, params.dims, enc).value());
  }
  return out;
}

std::vector<std::vector<double>> gallery_scores(const FeatureStore& store, const HintParams& params,
                                                const RunConfig& config) {
  const EncodedGallery enc = encode_gallery(store, params, config);
  const ScoringOptions opt = config.scoring();
  std::vector<std::vector<double>> scores(store.size(), std::vector<double>(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i)
    for (std::size_t j = 0; j < store.size(); ++j) scores[i][j] = pair_score(enc.fused[i], enc.targets[j], opt);
  return scores;
}

EvalReport evaluate(const FeatureStore& store, const HintParams& params, const RunConfig& config) {
  if (config.subset_size < 1) throw ConfigError("subset_size must be >= 1");
  const auto scores = gallery_scores(store, params, config);
  std::mt19937_64 rng(config.seed ^ kSubsetStream);
  std::vector<RankedList> full, subset;
  for (std::size_t i = 0; i < store.size(); ++i) {
    full.push_back(rank_gallery(scores[i], i, i));
    const auto candidates = sample_subset(store.size(), i, config.subset_size, rng);
    subset.push_back(rank_subset(scores[i], candidates, i, i));
  }
  std::map<std::size_t, double> recalls, subset_recalls;
  for (std::size_t k : {1, 5, 10, 50}) recalls[k] = recall_at_k(full, k);
  for (std::size_t k : {1, 2, 3}) subset_recalls[k] = subset_recall_at_k(subset, k);
  return aggregate_report(std::move(recalls), std::move(subset_recalls), config.dataset);
}

std::vector<GradcheckResult> run_gradcheck(const RunConfig& config, double h) {
  config.validate();
  const ModelDims dims = config.dims();
  SyntheticOptions syn;
  syn.n = config.batch;
  syn.queries = dims.queries;
  syn.text_len = dims.text_len;
  syn.width = dims.width;
  syn.seed = config.seed;
  const FeatureStore store = generate_synthetic(syn);
  std::vector<std::size_t> items(store.size());
  std::iota(items.begin(), items.end(), std::size_t{0});

  HintParams params = HintParams::initialize(dims, config.seed);
  const std::vector<double> theta = params.flatten();

  const auto check = [&](const std::string& name, const RunConfig& cfg) {
    std::vector<double> analytic;
    objective_gradient(params, store, items, cfg, analytic);
    HintParams probe = params;
    const auto f = [&](std::span<const double> x) {
      probe.assign(x);
      return objective_value(probe, store, items, cfg);
    };
    const std::vector<double> numeric = finite_diff(f, theta, h);
    return GradcheckResult{name, theta.size(), compare_gradients(analytic, numeric, kGradcheckFloor)};
  };

  std::vector<GradcheckResult> out;
  out.push_back(check("total objective", config));
  if (config.flags.rank_loss && config.flags.context_loss) {
    RunConfig rank_only = config;
    rank_only.flags.context_loss = false;
    out.push_back(check("rank loss", rank_only));
    RunConfig context_only = config;
    context_only.flags.rank_loss = false;
    context_only.lambda = 1.0;
    out.push_back(check("context loss", context_only));
  }

  // Encoder output under a fixed random projection.
  std::mt19937_64 rng(config.seed + 1);
  const Tensor projection = Tensor::randn({dims.queries, dims.width}, rng);
  const EncoderOptions enc = config.encoder();
  const auto encoder_loss = [&](Graph& g, const ModelNodes& nodes) {
    const Var u = encode_query(g.constant(store.reference(0)), g.constant(store.text(0)), nodes, dims, enc);
    return sum(mul(u, g.constant(projection)));
  };
  std::vector<double> analytic;
  {
    Graph g;
    const ModelNodes nodes = bind(g, params);
    g.backward(encoder_loss(g, nodes));
    analytic = gather_gradients(g, nodes);
  }
  HintParams probe = params;
  const std::vector<double> numeric = finite_diff(
      [&](std::span<const double> x) {
        probe.assign(x);
        Graph g;
        return encoder_loss(g, bind(g, probe)).value().item();
      },
      theta, h);
  out.push_back(GradcheckResult{"encoder output", theta.size(), compare_gradients(analytic, numeric, kGradcheckFloor)});
  return out;
}

void write_trace(const std::filesystem::path& path, std::span<const LossBreakdown> trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "step,l_rank,l_context,total\n";
  char line[160];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", i + 1, trace[i].l_rank, trace[i].l_context,
                  trace[i].total);
    out << line;
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace hint
