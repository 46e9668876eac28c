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

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "hint/errors.hpp"
#include "hint/features.hpp"

using namespace hint;

namespace {

std::string header(std::uint32_t n, std::uint32_t q, std::uint32_t l, std::uint32_t d) {
  std::string b = "HFT1";
  for (std::uint32_t v : {n, q, l, d}) {
    char le[4];
    for (int i = 0; i < 4; ++i) le[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    b.append(le, 4);
  }
  return b;
}

void put_f32(std::string& b, float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

double row_norm(const Tensor& t, std::size_t r) {
  double s = 0.0;
  for (std::size_t c = 0; c < t.cols(); ++c) s += t.at(r, c) * t.at(r, c);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("smallest HFT1 file is 32 bytes and decodes by hand") {
  CHECK(hft1_size(1, 1, 1, 1) == 32);
  std::string b = header(1, 1, 1, 1);
  put_f32(b, 0.5f);
  put_f32(b, -2.0f);
  put_f32(b, 3.25f);
  REQUIRE(b.size() == 32);
  const FeatureStore s = decode_features(b);
  CHECK(s.size() == 1);
  CHECK(s.reference(0).at(0, 0) == 0.5);
  CHECK(s.text(0).at(0, 0) == -2.0);
  CHECK(s.target(0).at(0, 0) == 3.25);
  CHECK(encode_features(s) == b);
}

TEST_CASE("hft1_size formula and overflow") {
  CHECK(hft1_size(3, 2, 5, 4) == 20 + 3ull * 4 * (2 * 4 + 5 * 4 + 2 * 4));
  CHECK_THROWS_AS(hft1_size(0, 1, 1, 1), DimensionOverflowError);
  const std::uint64_t big = std::numeric_limits<std::uint32_t>::max();
  CHECK_THROWS_AS(hft1_size(big, big, big, big), DimensionOverflowError);
}

TEST_CASE("round trip through bytes and files") {
  SyntheticOptions o;
  o.n = 5;
  o.queries = 3;
  o.text_len = 2;
  o.width = 4;
  o.seed = 9;
  const FeatureStore s = generate_synthetic(o);
  const std::string bytes = encode_features(s);
  CHECK(bytes.size() == hft1_size(5, 3, 2, 4));
  CHECK(decode_features(bytes) == s);

  const auto path = std::filesystem::temp_directory_path() / "hint_test_features.hft1";
  write_features(path, s);
  CHECK(std::filesystem::file_size(path) == bytes.size());
  CHECK(read_features(path) == s);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_features(path), DataError);
}

TEST_CASE("malformed files") {
  std::string good = header(1, 1, 1, 1);
  for (float f : {1.0f, 2.0f, 3.0f}) put_f32(good, f);

  std::string bad = good;
  bad[3] = '2';
  CHECK_THROWS_AS(decode_features(bad), BadMagicError);
  CHECK_THROWS_AS(decode_features("HF"), TruncatedFileError);
  CHECK_THROWS_AS(decode_features("XXXX"), BadMagicError);
  CHECK_THROWS_AS(decode_features(good.substr(0, 12)), TruncatedFileError);
  CHECK_THROWS_AS(decode_features(good.substr(0, 31)), TruncatedFileError);
  CHECK_THROWS_AS(decode_features(good + "x"), DataError);
  CHECK_THROWS_AS(decode_features(header(0, 1, 1, 1)), DimensionOverflowError);
  CHECK_THROWS_AS(decode_features(header(0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu)),
                  DimensionOverflowError);

  std::string nan = header(1, 1, 1, 1);
  put_f32(nan, 1.0f);
  put_f32(nan, std::numeric_limits<float>::quiet_NaN());
  put_f32(nan, 1.0f);
  CHECK_THROWS_AS(decode_features(nan), DataError);
}

TEST_CASE("store add validates shapes and values") {
  FeatureStore s(2, 1, 3);
  CHECK_THROWS_AS(s.add(Tensor({2, 3}), Tensor({2, 3}), Tensor({2, 3})), DimensionError);
  Tensor inf({2, 3});
  inf.at(1, 2) = INFINITY;
  CHECK_THROWS_AS(s.add(inf, Tensor({1, 3}), Tensor({2, 3})), DataError);
  Tensor fine({2, 3});
  fine.at(0, 0) = 0.1;  // not representable in f32
  s.add(fine, Tensor({1, 3}), Tensor({2, 3}));
  CHECK(s.reference(0).at(0, 0) == static_cast<double>(0.1f));
  CHECK_THROWS_AS(FeatureStore(0, 1, 1), DimensionError);
}

TEST_CASE("synthetic data is deterministic in the seed") {
  SyntheticOptions o;
  o.n = 6;
  o.seed = 3;
  CHECK(generate_synthetic(o) == generate_synthetic(o));
  SyntheticOptions other = o;
  other.seed = 4;
  CHECK(!(generate_synthetic(o) == generate_synthetic(other)));
  o.n = 0;
  CHECK_THROWS_AS(generate_synthetic(o), ArgumentError);
  o.n = 1;
  o.noise_sigma = -1.0;
  CHECK_THROWS_AS(generate_synthetic(o), ArgumentError);
}

TEST_CASE("synthetic structure") {
  SyntheticOptions o;
  o.n = 10;
  o.seed = 21;
  const FeatureStore s = generate_synthetic(o);
  CHECK(s.queries() == 8);
  CHECK(s.text_len() == 6);
  CHECK(s.width() == 32);
  for (std::size_t i = 0; i < s.size(); ++i) {
    // text rows are one unit edit direction repeated
    for (std::size_t r = 0; r < s.text_len(); ++r) {
      CHECK(row_norm(s.text(i), r) == doctest::Approx(1.0).epsilon(1e-6));
      for (std::size_t c = 0; c < s.width(); ++c) CHECK(s.text(i).at(r, c) == s.text(i).at(0, c));
    }
  }

  // without edit or noise, targets are the normalized latent, and the
  // reference rows scatter around that latent
  o.edit_scale = 0.0;
  o.noise_sigma = 0.0;
  const FeatureStore plain = generate_synthetic(o);
  for (std::size_t i = 0; i < plain.size(); ++i) {
    const Tensor& t = plain.target(i);
    const Tensor& ref = plain.reference(i);
    for (std::size_t c = 0; c < plain.width(); ++c) CHECK(plain.text(i).at(0, c) == 0.0);
    double dot = 0.0, refn = 0.0;
    for (std::size_t c = 0; c < plain.width(); ++c) {
      double mean = 0.0;
      for (std::size_t r = 0; r < plain.queries(); ++r) mean += ref.at(r, c) / plain.queries();
      dot += mean * t.at(0, c);
      refn += mean * mean;
    }
    CHECK(dot / std::sqrt(refn) > 0.9);
    for (std::size_t r = 0; r < plain.queries(); ++r) {
      CHECK(row_norm(t, r) == doctest::Approx(1.0).epsilon(1e-6));
      for (std::size_t c = 0; c < plain.width(); ++c) CHECK(t.at(r, c) == t.at(0, c));
    }
  }
}
