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

#include "hint/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hint/errors.hpp"

namespace hint {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("bad value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

std::uint64_t parse_uint(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  const std::string copy(value);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(copy, &used);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (used != copy.size()) bad_value(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  bad_value(key, value);
}

const char* on_off(bool v) { return v ? "true" : "false"; }

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ModelDims RunConfig::dims() const { return ModelDims{q, l, d, heads, d_ff ? d_ff : 4 * d}; }

EncoderOptions RunConfig::encoder() const { return EncoderOptions{flags.vcm, flags.ccm, flags.dce, flags.target_pool}; }

ScoringOptions RunConfig::scoring() const { return ScoringOptions{softmax_axis, reduction, flags.mc, flags.qcr}; }

AdamWOptions RunConfig::adamw() const { return AdamWOptions{lr, beta1, beta2, adam_eps, weight_decay}; }

void RunConfig::validate() const {
  dims().validate();
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(tau > 0.0) || !(rank_tau() > 0.0)) throw ConfigError("tau must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("betas must lie in [0, 1)");
  if (!(adam_eps > 0.0) || !(weight_decay >= 0.0)) throw ConfigError("adam_eps must be > 0 and weight_decay >= 0");
  if (subset_size < 1) throw ConfigError("subset_size must be >= 1");
  if (!flags.rank_loss && !flags.context_loss) throw ConfigError("rank_loss and context_loss cannot both be off");
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "q",     "l",          "d",       "heads",     "d_ff",   "lr",           "lambda",   "tau",
      "tau_rank", "weight_decay", "beta1", "beta2",  "adam_eps", "batch",      "steps",    "seed",
      "vcm",   "ccm",        "dce",     "mc",        "qcr",    "rank_loss",    "context_loss", "target_pool",
      "subset_size", "softmax_axis", "reduction", "dataset"};
  return k;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "q") q = parse_uint(key, value);
  else if (key == "l") l = parse_uint(key, value);
  else if (key == "d") d = parse_uint(key, value);
  else if (key == "heads") heads = parse_uint(key, value);
  else if (key == "d_ff") d_ff = parse_uint(key, value);
  else if (key == "lr") lr = parse_real(key, value);
  else if (key == "lambda") lambda = parse_real(key, value);
  else if (key == "tau") tau = parse_real(key, value);
  else if (key == "tau_rank") tau_rank = parse_real(key, value);
  else if (key == "weight_decay") weight_decay = parse_real(key, value);
  else if (key == "beta1") beta1 = parse_real(key, value);
  else if (key == "beta2") beta2 = parse_real(key, value);
  else if (key == "adam_eps") adam_eps = parse_real(key, value);
  else if (key == "batch") batch = parse_uint(key, value);
  else if (key == "steps") steps = parse_uint(key, value);
  else if (key == "seed") seed = parse_uint(key, value);
  else if (key == "vcm") flags.vcm = parse_bool(key, value);
  else if (key == "ccm") flags.ccm = parse_bool(key, value);
  else if (key == "dce") flags.dce = parse_bool(key, value);
  else if (key == "mc") flags.mc = parse_bool(key, value);
  else if (key == "qcr") flags.qcr = parse_bool(key, value);
  else if (key == "rank_loss") flags.rank_loss = parse_bool(key, value);
  else if (key == "context_loss") flags.context_loss = parse_bool(key, value);
  else if (key == "target_pool") flags.target_pool = parse_bool(key, value);
  else if (key == "subset_size") subset_size = parse_uint(key, value);
  else if (key == "softmax_axis") {
    if (value == "rows") softmax_axis = Axis::rows;
    else if (value == "cols") softmax_axis = Axis::cols;
    else bad_value(key, value);
  } else if (key == "reduction") {
    if (value == "max") reduction = Reduction::max;
    else if (value == "logsumexp") reduction = Reduction::logsumexp;
    else bad_value(key, value);
  } else if (key == "dataset") {
    if (value == "cirr") dataset = DatasetKind::cirr;
    else if (value == "fashioniq") dataset = DatasetKind::fashioniq;
    else bad_value(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

RunConfig RunConfig::parse(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

RunConfig RunConfig::load(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), std::move(base));
}

RunConfig RunConfig::parse(std::string_view text) { return parse(text, RunConfig{}); }

RunConfig RunConfig::load(const std::filesystem::path& path) { return load(path, RunConfig{}); }

std::string RunConfig::dump() const {
  std::ostringstream out;
  out << "q = " << q << "\nl = " << l << "\nd = " << d << "\nheads = " << heads << "\nd_ff = " << dims().ffn
      << "\nlr = " << real(lr) << "\nlambda = " << real(lambda) << "\ntau = " << real(tau);
  if (tau_rank) out << "\ntau_rank = " << real(*tau_rank);
  out << "\nweight_decay = " << real(weight_decay) << "\nbeta1 = " << real(beta1) << "\nbeta2 = " << real(beta2)
      << "\nadam_eps = " << real(adam_eps) << "\nbatch = " << batch << "\nsteps = " << steps << "\nseed = " << seed
      << "\nvcm = " << on_off(flags.vcm) << "\nccm = " << on_off(flags.ccm) << "\ndce = " << on_off(flags.dce)
      << "\nmc = " << on_off(flags.mc) << "\nqcr = " << on_off(flags.qcr)
      << "\nrank_loss = " << on_off(flags.rank_loss) << "\ncontext_loss = " << on_off(flags.context_loss)
      << "\ntarget_pool = " << on_off(flags.target_pool)
      << "\nsubset_size = " << subset_size << "\nsoftmax_axis = " << (softmax_axis == Axis::rows ? "rows" : "cols")
      << "\nreduction = " << (reduction == Reduction::max ? "max" : "logsumexp")
      << "\ndataset = " << (dataset == DatasetKind::cirr ? "cirr" : "fashioniq") << "\n";
  return out.str();
}

}  // namespace hint
