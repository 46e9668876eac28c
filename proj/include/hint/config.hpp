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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hint/encoders.hpp"
#include "hint/objective.hpp"
#include "hint/retrieval.hpp"
#include "hint/scoring.hpp"

namespace hint {

/// Component switches; true means the component is active.
struct AblationFlags {
  bool vcm = true;
  bool ccm = true;
  bool dce = true;
  bool mc = true;
  bool qcr = true;
  bool rank_loss = true;
  bool context_loss = true;
  bool target_pool = false;  // not an ablation: pools targets like queries
};

struct RunConfig {
  std::size_t q = 8;
  std::size_t l = 6;
  std::size_t d = 32;
  std::size_t heads = 4;
  std::size_t d_ff = 0;  // 0: 4 * d

  double lr = 2e-5;
  double lambda = 0.2;
  double tau = 0.07;
  std::optional<double> tau_rank;  // unset: shares tau
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  std::size_t batch = 8;
  std::size_t steps = 200;
  std::uint64_t seed = 0;

  AblationFlags flags;
  std::size_t subset_size = 6;
  Axis softmax_axis = Axis::rows;
  Reduction reduction = Reduction::max;
  DatasetKind dataset = DatasetKind::cirr;

  ModelDims dims() const;
  EncoderOptions encoder() const;
  ScoringOptions scoring() const;
  AdamWOptions adamw() const;
  double rank_tau() const { return tau_rank.value_or(tau); }

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  /// Sets one key from its textual value; ConfigError on unknown key or bad value.
  void set(std::string_view key, std::string_view value);

  /// Every recognised key, in documentation order.
  static const std::vector<std::string>& keys();

  /// `key = value` lines, `#` comments, blank lines ignored.
  static RunConfig parse(std::string_view text, RunConfig base);
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path, RunConfig base);
  static RunConfig load(const std::filesystem::path& path);

  /// Current values as a parseable config file.
  std::string dump() const;
};

}  // namespace hint
