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

#include "hint/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "hint/errors.hpp"

namespace hint {

std::size_t RankedList::target_rank() const {
  const auto it = std::find(order.begin(), order.end(), target);
  if (it == order.end()) throw ArgumentError("ranked list does not contain its target");
  return static_cast<std::size_t>(it - order.begin());
}

std::vector<std::size_t> rank_order(std::span<const double> scores) {
  if (scores.empty()) throw ArgumentError("cannot rank an empty gallery");
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (!std::isfinite(scores[i])) throw ArgumentError("score " + std::to_string(i) + " is not finite");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

RankedList rank_gallery(std::span<const double> scores, std::size_t target, std::size_t query_id) {
  if (target >= scores.size()) {
    throw ArgumentError("target " + std::to_string(target) + " outside gallery of " + std::to_string(scores.size()));
  }
  return RankedList{query_id, rank_order(scores), target};
}

RankedList rank_subset(std::span<const double> scores, std::span<const std::size_t> subset, std::size_t target,
                       std::size_t query_id) {
  std::vector<double> restricted;
  restricted.reserve(subset.size());
  std::optional<std::size_t> local_target;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] >= scores.size()) throw ArgumentError("subset index outside gallery");
    if (subset[i] == target) local_target = i;
    restricted.push_back(scores[subset[i]]);
  }
  if (!local_target) throw ArgumentError("target " + std::to_string(target) + " is not in the candidate subset");
  return RankedList{query_id, rank_order(restricted), *local_target};
}

std::vector<std::size_t> sample_subset(std::size_t gallery_size, std::size_t target, std::size_t size,
                                       std::mt19937_64& rng) {
  if (target >= gallery_size) throw ArgumentError("target outside gallery");
  if (size == 0) throw ArgumentError("subset size must be positive");
  std::vector<std::size_t> others;
  others.reserve(gallery_size - 1);
  for (std::size_t i = 0; i < gallery_size; ++i)
    if (i != target) others.push_back(i);
  std::shuffle(others.begin(), others.end(), rng);
  others.resize(std::min(size, gallery_size) - 1);
  others.push_back(target);
  std::sort(others.begin(), others.end());
  return others;
}

double recall_at_k(std::span<const RankedList> ranked, std::size_t k) {
  if (k < 1) throw ArgumentError("recall_at_k needs k >= 1");
  if (ranked.empty()) return 0.0;
  std::size_t hits = 0;
  for (const RankedList& list : ranked)
    if (list.target_rank() < k) ++hits;
  return static_cast<double>(hits) / static_cast<double>(ranked.size());
}

double subset_recall_at_k(std::span<const RankedList> subset_ranked, std::size_t k) {
  return recall_at_k(subset_ranked, k);
}

namespace {

double require(const std::map<std::size_t, double>& m, std::size_t k, const char* label) {
  const auto it = m.find(k);
  if (it == m.end()) throw ArgumentError(std::string("report is missing ") + label + std::to_string(k));
  return it->second;
}

}  // namespace

EvalReport aggregate_report(std::map<std::size_t, double> recalls, std::map<std::size_t, double> subset_recalls,
                            DatasetKind kind) {
  EvalReport r{std::move(recalls), std::move(subset_recalls), std::nullopt, std::nullopt};
  if (kind == DatasetKind::cirr) {
    r.cirr_avg = (require(r.recall_at, 5, "R@") + require(r.subset_recall_at, 1, "Rs@")) / 2.0;
  } else {
    r.fashioniq_avg = (require(r.recall_at, 10, "R@") + require(r.recall_at, 50, "R@")) / 2.0;
  }
  return r;
}

EvalReport average_categories(std::span<const EvalReport> categories, DatasetKind kind) {
  if (categories.empty()) throw ArgumentError("average_categories of nothing");
  std::map<std::size_t, double> recalls, subset;
  for (const auto& [k, v] : categories.front().recall_at) {
    double total = 0.0;
    for (const EvalReport& c : categories) total += require(c.recall_at, k, "R@");
    recalls[k] = total / static_cast<double>(categories.size());
  }
  for (const auto& [k, v] : categories.front().subset_recall_at) {
    double total = 0.0;
    for (const EvalReport& c : categories) total += require(c.subset_recall_at, k, "Rs@");
    subset[k] = total / static_cast<double>(categories.size());
  }
  return aggregate_report(std::move(recalls), std::move(subset), kind);
}

std::string format_report(const EvalReport& report) {
  std::string out;
  char line[64];
  for (const auto& [k, v] : report.recall_at) {
    std::snprintf(line, sizeof line, "R@%zu=%.2f\n", k, 100.0 * v);
    out += line;
  }
  for (const auto& [k, v] : report.subset_recall_at) {
    std::snprintf(line, sizeof line, "Rs@%zu=%.2f\n", k, 100.0 * v);
    out += line;
  }
  const std::optional<double> avg = report.cirr_avg ? report.cirr_avg : report.fashioniq_avg;
  if (avg) {
    std::snprintf(line, sizeof line, "Avg=%.2f\n", 100.0 * *avg);
    out += line;
  }
  return out;
}

EvalReport parse_report(const std::string& text) {
  EvalReport r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("report line without '=': " + line);
    const std::string key = line.substr(0, eq);
    double value = 0.0;
    try {
      value = std::stod(line.substr(eq + 1)) / 100.0;
    } catch (const std::exception&) {
      throw DataError("bad report value: " + line);
    }
    if (key.rfind("Rs@", 0) == 0) {
      r.subset_recall_at[std::stoul(key.substr(3))] = value;
    } else if (key.rfind("R@", 0) == 0) {
      r.recall_at[std::stoul(key.substr(2))] = value;
    } else if (key == "Avg") {
      r.cirr_avg = value;
    } else {
      throw DataError("unknown report key: " + key);
    }
  }
  return r;
}

}  // namespace hint
