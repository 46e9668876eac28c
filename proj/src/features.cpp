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

#include "hint/features.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

#include "hint/errors.hpp"

namespace hint {
namespace {

constexpr std::string_view kMagic = "HFT1";
constexpr std::uint64_t kHeaderBytes = 4 + 4 * 4;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

void put_tensor(std::string& out, const Tensor& t) {
  for (double v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

Tensor get_tensor(std::string_view in, std::size_t& at, std::size_t rows, std::size_t cols) {
  std::vector<double> data(rows * cols);
  for (double& v : data) {
    const float f = std::bit_cast<float>(get_u32(in, at));
    if (!std::isfinite(f)) throw DataError("non-finite value at byte offset " + std::to_string(at));
    v = f;
    at += 4;
  }
  return Tensor({rows, cols}, std::move(data));
}

bool mul_overflows(std::uint64_t a, std::uint64_t b, std::uint64_t& out) { return __builtin_mul_overflow(a, b, &out); }
bool add_overflows(std::uint64_t a, std::uint64_t b, std::uint64_t& out) { return __builtin_add_overflow(a, b, &out); }

void round_to_f32(Tensor& t) {
  for (double& v : t.data()) v = static_cast<float>(v);
}

void normalize(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0.0)
    for (double& x : v) x /= n;
}

}  // namespace

FeatureStore::FeatureStore(std::size_t queries, std::size_t text_len, std::size_t width)
    : queries_(queries), text_len_(text_len), width_(width) {
  if (queries == 0 || text_len == 0 || width == 0) throw DimensionError("feature store dims must be positive");
}

void FeatureStore::add(Tensor reference, Tensor text, Tensor target) {
  const auto expect = [this](const Tensor& t, std::size_t rows, const char* what) {
    if (t.rows() != rows || t.cols() != width_ || t.size() != rows * width_) {
      throw DimensionError(std::string(what) + " features have shape " + to_string(t.shape()) + ", expected [" +
                           std::to_string(rows) + "x" + std::to_string(width_) + "]");
    }
    if (!t.all_finite()) throw DataError(std::string(what) + " features contain non-finite values");
  };
  expect(reference, queries_, "reference");
  expect(text, text_len_, "text");
  expect(target, queries_, "target");
  round_to_f32(reference);
  round_to_f32(text);
  round_to_f32(target);
  items_.push_back(Item{std::move(reference), std::move(text), std::move(target)});
}

std::uint64_t hft1_size(std::uint64_t n, std::uint64_t q, std::uint64_t l, std::uint64_t d) {
  if (n == 0 || q == 0 || l == 0 || d == 0) throw DimensionOverflowError("HFT1 dims must all be positive");
  std::uint64_t qd = 0, ld = 0, per_item = 0, body = 0, bytes = 0, total = 0;
  if (mul_overflows(q, d, qd) || mul_overflows(l, d, ld) || mul_overflows(qd, 2, per_item) ||
      add_overflows(per_item, ld, per_item) || mul_overflows(per_item, n, body) || mul_overflows(body, 4, bytes) ||
      add_overflows(bytes, kHeaderBytes, total)) {
    throw DimensionOverflowError("HFT1 dims N=" + std::to_string(n) + " Q=" + std::to_string(q) + " L=" +
                                 std::to_string(l) + " D=" + std::to_string(d) + " overflow the file size");
  }
  return total;
}

std::string encode_features(const FeatureStore& store) {
  const auto checked = [](std::size_t v) {
    if (v > std::numeric_limits<std::uint32_t>::max()) throw DimensionOverflowError("dim does not fit in u32");
    return static_cast<std::uint32_t>(v);
  };
  const std::uint64_t total = hft1_size(store.size(), store.queries(), store.text_len(), store.width());
  std::string out;
  out.reserve(total);
  out.append(kMagic);
  put_u32(out, checked(store.size()));
  put_u32(out, checked(store.queries()));
  put_u32(out, checked(store.text_len()));
  put_u32(out, checked(store.width()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    put_tensor(out, store.reference(i));
    put_tensor(out, store.text(i));
    put_tensor(out, store.target(i));
  }
  return out;
}

FeatureStore decode_features(std::string_view bytes) {
  if (bytes.size() >= kMagic.size() && bytes.substr(0, kMagic.size()) != kMagic) {
    throw BadMagicError("not an HFT1 feature file (bad magic)");
  }
  if (bytes.size() < kHeaderBytes) {
    throw TruncatedFileError("HFT1 header truncated: " + std::to_string(bytes.size()) + " bytes");
  }
  const std::uint32_t n = get_u32(bytes, 4), q = get_u32(bytes, 8), l = get_u32(bytes, 12), d = get_u32(bytes, 16);
  const std::uint64_t expected = hft1_size(n, q, l, d);
  if (bytes.size() < expected) {
    throw TruncatedFileError("HFT1 file truncated: " + std::to_string(bytes.size()) + " of " +
                             std::to_string(expected) + " bytes");
  }
  if (bytes.size() > expected) {
    throw DataError("HFT1 file has " + std::to_string(bytes.size() - expected) + " trailing bytes");
  }
  FeatureStore store(q, l, d);
  std::size_t at = kHeaderBytes;
  for (std::uint32_t i = 0; i < n; ++i) {
    Tensor reference = get_tensor(bytes, at, q, d);
    Tensor text = get_tensor(bytes, at, l, d);
    Tensor target = get_tensor(bytes, at, q, d);
    store.add(std::move(reference), std::move(text), std::move(target));
  }
  return store;
}

void write_features(const std::filesystem::path& path, const FeatureStore& store) {
  const std::string bytes = encode_features(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

FeatureStore read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature file " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_features(bytes);
}

FeatureStore generate_synthetic(const SyntheticOptions& o) {
  if (o.n == 0) throw ArgumentError("generate_synthetic: n must be >= 1");
  if (!(o.noise_sigma >= 0.0)) throw ArgumentError("generate_synthetic: noise_sigma must be >= 0");
  FeatureStore store(o.queries, o.text_len, o.width);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const std::size_t d = o.width;
  for (std::size_t item = 0; item < o.n; ++item) {
    std::vector<double> z(d), e(d);
    for (double& v : z) v = unit(rng);
    for (double& v : e) v = unit(rng);
    normalize(z);
    normalize(e);
    for (double& v : e) v *= o.edit_scale;
    std::vector<double> goal(d);
    for (std::size_t c = 0; c < d; ++c) goal[c] = z[c] + e[c];
    normalize(goal);

    Tensor reference({o.queries, d}), text({o.text_len, d}), target({o.queries, d});
    for (std::size_t r = 0; r < o.queries; ++r)
      for (std::size_t c = 0; c < d; ++c) reference.at(r, c) = z[c] + 0.1 * unit(rng);
    for (std::size_t r = 0; r < o.text_len; ++r)
      for (std::size_t c = 0; c < d; ++c) text.at(r, c) = e[c];
    for (std::size_t r = 0; r < o.queries; ++r)
      for (std::size_t c = 0; c < d; ++c) target.at(r, c) = goal[c] + o.noise_sigma * unit(rng);
    store.add(std::move(reference), std::move(text), std::move(target));
  }
  return store;
}

}  // namespace hint
