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

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hint/config.hpp"
#include "hint/encoders.hpp"
#include "hint/features.hpp"
#include "hint/finite_diff.hpp"
#include "hint/graph.hpp"
#include "hint/objective.hpp"
#include "hint/retrieval.hpp"

namespace hint {

struct BatchGraph {
  std::vector<Var> fused;    // encode_query per item
  std::vector<Var> targets;  // encode_target per item
  std::optional<Var> l_rank;
  std::optional<Var> l_context;
  Var total;

  LossBreakdown breakdown(double lambda) const;
};

/// Copy of config with q, l and d taken from the store.
RunConfig adopt_store_dims(RunConfig config, const FeatureStore& store);

/// Forward pass of the full objective over the listed store items.
BatchGraph batch_loss(Graph& g, const ModelNodes& nodes, const FeatureStore& store,
                      std::span<const std::size_t> items, const RunConfig& config);

/// Value of the objective at the given parameters (no gradients).
double objective_value(const HintParams& params, const FeatureStore& store, std::span<const std::size_t> items,
                       const RunConfig& config);

/// Objective value and its gradient, flattened like HintParams::flatten().
LossBreakdown objective_gradient(const HintParams& params, const FeatureStore& store,
                                 std::span<const std::size_t> items, const RunConfig& config,
                                 std::vector<double>& grad);

/// Seeded epoch sampler: shuffles 0..N-1 each epoch and hands out B-sized
/// batches without replacement; a trailing partial batch is dropped.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch, std::uint64_t seed);
  std::vector<std::size_t> next();

 private:
  std::size_t n_;
  std::size_t batch_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> perm_;
  std::size_t cursor_;
};

/// Return false to stop training early. Called after each optimizer step
/// with the 1-based step count.
using StepCallback = std::function<bool(std::size_t step, const HintParams& params)>;

struct TrainResult {
  HintParams params;
  std::vector<LossBreakdown> trace;
};

/// Deterministic per config.seed. Throws NumericError naming the step if the
/// loss stops being finite.
TrainResult train(const FeatureStore& store, const RunConfig& config, const StepCallback& on_step = {});
TrainResult train(const FeatureStore& store, const RunConfig& config, HintParams init,
                  const StepCallback& on_step = {});

/// Fused query features and target features for every item.
struct EncodedGallery {
  std::vector<Tensor> fused;
  std::vector<Tensor> targets;
};
EncodedGallery encode_gallery(const FeatureStore& store, const HintParams& params, const RunConfig& config);

/// scores[i][j]: query i against gallery target j, with the configured scorer.
std::vector<std::vector<double>> gallery_scores(const FeatureStore& store, const HintParams& params,
                                                const RunConfig& config);

/// R@{1,5,10,50} over the full gallery, R_subset@{1,2,3} over seeded random
/// subsets of config.subset_size containing the target.
EvalReport evaluate(const FeatureStore& store, const HintParams& params, const RunConfig& config);

/// Denominator floor for model-level gradient checks. Gradients below it are
/// compared in absolute terms, since central differences cannot resolve them
/// to 1e-4 relative precision.
inline constexpr double kGradcheckFloor = 1e-5;

struct GradcheckResult {
  std::string name;
  std::size_t coordinates = 0;
  GradientComparison comparison;
};

/// Central-difference checks of every parameter gradient on a synthetic batch
/// of config.batch items: total objective, each loss on its own, and a random
/// projection of the encoder output.
std::vector<GradcheckResult> run_gradcheck(const RunConfig& config, double h = 1e-5);

void write_trace(const std::filesystem::path& path, std::span<const LossBreakdown> trace);

/// HPR1: "HPR1", u32 Q L D H F, u32 tensor count, then per tensor u32 name
/// length, name, u32 rows, u32 cols, f64 values; all little-endian.
std::string encode_params(const HintParams& params);
HintParams decode_params(std::string_view bytes);
void write_params(const std::filesystem::path& path, const HintParams& params);
HintParams read_params(const std::filesystem::path& path);

}  // namespace hint
