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
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace hint {

/// Candidates sorted by descending score, ties by ascending index. `order`
/// is a permutation of 0..G-1 and `target` indexes into the same range.
struct RankedList {
  std::size_t query_id = 0;
  std::vector<std::size_t> order;
  std::size_t target = 0;

  std::size_t gallery_size() const noexcept { return order.size(); }
  /// 0-based position of the target in `order`.
  std::size_t target_rank() const;
};

/// Throws ArgumentError on an empty or non-finite score vector.
std::vector<std::size_t> rank_order(std::span<const double> scores);

RankedList rank_gallery(std::span<const double> scores, std::size_t target, std::size_t query_id = 0);

/// Ranks only the listed gallery entries. Indices of the result are positions
/// within `subset`; the target must be one of its members.
RankedList rank_subset(std::span<const double> scores, std::span<const std::size_t> subset, std::size_t target,
                       std::size_t query_id = 0);

/// Sorted random subset of 0..G-1 of size min(size, G) that contains target.
std::vector<std::size_t> sample_subset(std::size_t gallery_size, std::size_t target, std::size_t size,
                                       std::mt19937_64& rng);

/// Fraction of lists whose target sits in the top k. k > G counts as G.
double recall_at_k(std::span<const RankedList> ranked, std::size_t k);

/// recall_at_k over lists produced by rank_subset.
double subset_recall_at_k(std::span<const RankedList> subset_ranked, std::size_t k);

enum class DatasetKind { cirr, fashioniq };

struct EvalReport {
  std::map<std::size_t, double> recall_at;
  std::map<std::size_t, double> subset_recall_at;
  std::optional<double> fashioniq_avg;  // (R@10 + R@50) / 2
  std::optional<double> cirr_avg;       // (R@5 + Rs@1) / 2
};

/// Unit agnostic: fractions in, fractions out; percentages in, percentages out.
/// Throws ArgumentError if a k the average needs is missing.
EvalReport aggregate_report(std::map<std::size_t, double> recalls, std::map<std::size_t, double> subset_recalls,
                            DatasetKind kind);

/// Per-k arithmetic mean across category reports (e.g. the three FashionIQ
/// categories); the averages are recomputed from the mean recalls.
EvalReport average_categories(std::span<const EvalReport> categories, DatasetKind kind);

/// `R@k=..`, `Rs@k=..`, `Avg=..`, one per line, percentages with 2 decimals.
std::string format_report(const EvalReport& report);

/// Inverse of format_report (values come back as fractions).
EvalReport parse_report(const std::string& text);

}  // namespace hint
