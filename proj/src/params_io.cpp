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

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "hint/errors.hpp"
#include "hint/training.hpp"

namespace hint {
namespace {

constexpr std::string_view kMagic = "HPR1";

void put_u32(std::string& out, std::uint64_t v) {
  if (v > std::numeric_limits<std::uint32_t>::max()) throw DimensionOverflowError("value does not fit in u32");
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - at_ < n) throw TruncatedFileError("params file truncated at byte " + std::to_string(at_));
    const std::string_view out = bytes_.substr(at_, n);
    at_ += n;
    return out;
  }

  std::uint32_t u32() {
    const std::string_view b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }

  double f64() {
    const std::string_view b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return std::bit_cast<double>(v);
  }

  bool done() const noexcept { return at_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t at_ = 0;
};

}  // namespace

std::string encode_params(const HintParams& params) {
  std::string out(kMagic);
  const ModelDims& d = params.dims;
  for (std::size_t v : {d.queries, d.text_len, d.width, d.heads, d.ffn}) put_u32(out, v);
  const auto tensors = params.named_tensors();
  put_u32(out, tensors.size());
  for (const auto& [name, t] : tensors) {
    put_u32(out, name.size());
    out += name;
    put_u32(out, t->rows());
    put_u32(out, t->cols());
    for (double v : t->data()) put_f64(out, v);
  }
  return out;
}

HintParams decode_params(std::string_view bytes) {
  Reader in(bytes);
  if (bytes.size() >= kMagic.size() && bytes.substr(0, kMagic.size()) != kMagic) {
    throw BadMagicError("not a params file (bad magic)");
  }
  in.take(kMagic.size());
  ModelDims dims;
  dims.queries = in.u32();
  dims.text_len = in.u32();
  dims.width = in.u32();
  dims.heads = in.u32();
  dims.ffn = in.u32();
  try {
    dims.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("params file: ") + e.what());
  }
  // Shapes and names are checked against a freshly built layout.
  HintParams params = HintParams::initialize(dims, 0);
  auto tensors = params.named_tensors();
  if (in.u32() != tensors.size()) throw DataError("params file: unexpected tensor count");
  for (auto& [name, t] : tensors) {
    const std::uint32_t len = in.u32();
    if (in.take(len) != name) throw DataError("params file: expected tensor '" + name + "'");
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    if (rows != t->rows() || cols != t->cols()) throw DataError("params file: bad shape for '" + name + "'");
    for (double& v : t->data()) {
      v = in.f64();
      if (!std::isfinite(v)) throw DataError("params file: non-finite value in '" + name + "'");
    }
  }
  if (!in.done()) throw DataError("params file has trailing bytes");
  return params;
}

void write_params(const std::filesystem::path& path, const HintParams& params) {
  const std::string bytes = encode_params(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

HintParams read_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open params file " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_params(bytes);
}

}  // namespace hint
