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

// Precomputed triplet features and the HFT1 file format:
//
//   "HFT1"  u32 N  u32 Q  u32 L  u32 D            (little-endian)
//   N x { Q*D f32 reference | L*D f32 text | Q*D f32 target }   row-major
//
// Values are held at f32 precision in memory too, so write/read is exact.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hint/tensor.hpp"

namespace hint {

class FeatureStore {
 public:
  FeatureStore(std::size_t queries, std::size_t text_len, std::size_t width);

  /// Shapes must be Q x D, L x D, Q x D and all values finite. Values are
  /// rounded to f32.
  void add(Tensor reference, Tensor text, Tensor target);

  std::size_t size() const noexcept { return items_.size(); }
  std::size_t queries() const noexcept { return queries_; }
  std::size_t text_len() const noexcept { return text_len_; }
  std::size_t width() const noexcept { return width_; }

  const Tensor& reference(std::size_t i) const { return items_.at(i).reference; }
  const Tensor& text(std::size_t i) const { return items_.at(i).text; }
  const Tensor& target(std::size_t i) const { return items_.at(i).target; }

  friend bool operator==(const FeatureStore&, const FeatureStore&) = default;

 private:
  struct Item {
    Tensor reference;
    Tensor text;
    Tensor target;
    friend bool operator==(const Item&, const Item&) = default;
  };

  std::size_t queries_;
  std::size_t text_len_;
  std::size_t width_;
  std::vector<Item> items_;
};

/// Byte length of an HFT1 file with the given dims; DimensionOverflowError if
/// it does not fit in 64 bits or any extent is zero.
std::uint64_t hft1_size(std::uint64_t n, std::uint64_t q, std::uint64_t l, std::uint64_t d);

std::string encode_features(const FeatureStore& store);
/// BadMagicError, TruncatedFileError, DimensionOverflowError or DataError.
FeatureStore decode_features(std::string_view bytes);

void write_features(const std::filesystem::path& path, const FeatureStore& store);
FeatureStore read_features(const std::filesystem::path& path);

struct SyntheticOptions {
  std::size_t n = 64;
  std::size_t queries = 8;
  std::size_t text_len = 6;
  std::size_t width = 32;
  double noise_sigma = 0.05;
  double edit_scale = 1.0;  // 0 makes every edit direction zero
  std::uint64_t seed = 0;
};

/// Per item: unit latent z, reference rows z + N(0, 0.1^2), text rows equal
/// to an edit direction e (unit, times edit_scale), target rows
/// normalize(z + e) + N(0, sigma^2).
FeatureStore generate_synthetic(const SyntheticOptions& options);

}  // namespace hint
