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

#include "hint/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "hint/config.hpp"
#include "hint/errors.hpp"
#include "hint/features.hpp"
#include "hint/kernels.hpp"
#include "hint/scoring.hpp"
#include "hint/training.hpp"

namespace hint::cli {
namespace {

// Every config key doubles as a --key flag on the subcommands that take a
// config; flags win over the file.
struct ConfigSource {
  std::string path;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App& sub) {
    sub.add_option("--config", path, "key = value config file");
    for (const std::string& key : RunConfig::keys()) {
      sub.add_option("--" + key, overrides[key], "override config key '" + key + "'");
    }
  }

  RunConfig resolve(const CLI::App& sub, RunConfig base = RunConfig{}) const {
    RunConfig cfg = path.empty() ? base : RunConfig::load(path, base);
    for (const auto& [key, value] : overrides)
      if (sub.count("--" + key) > 0) cfg.set(key, value);
    return cfg;
  }

  bool sets(const CLI::App& sub, const std::string& key) const { return sub.count("--" + key) > 0; }
};

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw DataError("failed writing " + path);
}

// Store dims win over config dims, but an explicit mismatch is a data error.
RunConfig fit_to_store(const RunConfig& cfg, const FeatureStore& store, const ConfigSource& src,
                       const CLI::App& sub, bool from_file_or_flag) {
  if (from_file_or_flag) {
    if ((src.sets(sub, "q") && cfg.q != store.queries()) || (src.sets(sub, "l") && cfg.l != store.text_len()) ||
        (src.sets(sub, "d") && cfg.d != store.width())) {
      throw DataError("configured dims do not match the feature file");
    }
  }
  return adopt_store_dims(cfg, store);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Composed image retrieval on precomputed features: generate data, train, evaluate, check gradients",
               "hint"};
  app.require_subcommand(1);

  // gen
  CLI::App* gen = app.add_subcommand("gen", "write a synthetic HFT1 feature file");
  SyntheticOptions syn;
  std::string gen_out;
  gen->add_option("--n", syn.n, "number of triplets")->capture_default_str();
  gen->add_option("--q", syn.queries, "query rows Q")->capture_default_str();
  gen->add_option("--l", syn.text_len, "text rows L")->capture_default_str();
  gen->add_option("--d", syn.width, "feature width D")->capture_default_str();
  gen->add_option("--noise", syn.noise_sigma, "target noise sigma")->capture_default_str();
  gen->add_option("--seed", syn.seed, "random seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output path")->required();

  // train
  CLI::App* train_cmd = app.add_subcommand("train", "train on a feature file");
  std::string train_data, train_params, train_trace;
  ConfigSource train_cfg;
  train_cmd->add_option("--data", train_data, "HFT1 feature file")->required();
  train_cmd->add_option("--out-params", train_params, "where to write trained params")->required();
  train_cmd->add_option("--trace", train_trace, "per-step loss CSV");
  train_cfg.attach(*train_cmd);

  // eval
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate params on a feature file");
  std::string eval_data, eval_params, eval_report;
  ConfigSource eval_cfg;
  eval_cmd->add_option("--data", eval_data, "HFT1 feature file")->required();
  eval_cmd->add_option("--params", eval_params, "params file from train")->required();
  eval_cmd->add_option("--report", eval_report, "write the key=value report here");
  eval_cfg.attach(*eval_cmd);

  // gradcheck
  CLI::App* grad_cmd = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  double grad_h = 1e-5;
  double grad_tol = 1e-4;
  ConfigSource grad_cfg;
  grad_cmd->set_help_flag("--help", "Print this help message and exit");
  grad_cmd->add_option("--h", grad_h, "finite-difference step")->capture_default_str();
  grad_cmd->add_option("--tol", grad_tol, "maximum accepted relative error")->capture_default_str();
  grad_cfg.attach(*grad_cmd);

  // score
  CLI::App* score_cmd = app.add_subcommand("score", "print the pair score and cosine of one query/target pair");
  std::string score_data, score_params;
  std::size_t score_i = 0, score_j = 0;
  ConfigSource score_cfg;
  score_cmd->add_option("--data", score_data, "HFT1 feature file")->required();
  score_cmd->add_option("--params", score_params, "params file")->required();
  score_cmd->add_option("--i", score_i, "query item")->required();
  score_cmd->add_option("--j", score_j, "target item")->required();
  score_cfg.attach(*score_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  try {
    if (gen->parsed()) {
      write_features(gen_out, generate_synthetic(syn));
      out << "wrote " << syn.n << " triplets to " << gen_out << "\n";
      return kOk;
    }

    if (train_cmd->parsed()) {
      const FeatureStore store = read_features(train_data);
      const RunConfig cfg = fit_to_store(train_cfg.resolve(*train_cmd), store, train_cfg, *train_cmd, true);
      cfg.validate();
      const auto t0 = std::chrono::steady_clock::now();
      const TrainResult result = train(store, cfg);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_params(train_params, result.params);
      if (!train_trace.empty()) write_trace(train_trace, result.trace);
      if (!result.trace.empty()) {
        out << "steps=" << result.trace.size() << " initial_total=" << real(result.trace.front().total)
            << " final_total=" << real(result.trace.back().total) << " seconds=" << real(secs) << "\n";
      }
      return kOk;
    }

    if (eval_cmd->parsed()) {
      const FeatureStore store = read_features(eval_data);
      const HintParams params = read_params(eval_params);
      RunConfig cfg = fit_to_store(eval_cfg.resolve(*eval_cmd), store, eval_cfg, *eval_cmd, true);
      cfg.heads = params.dims.heads;
      cfg.d_ff = params.dims.ffn;
      cfg.validate();
      const std::string text = format_report(evaluate(store, params, cfg));
      if (!eval_report.empty()) write_text(eval_report, text);
      out << text;
      return kOk;
    }

    if (grad_cmd->parsed()) {
      RunConfig tiny;
      tiny.q = 4;
      tiny.l = 3;
      tiny.d = 8;
      tiny.heads = 2;
      tiny.batch = 3;
      const RunConfig cfg = grad_cfg.resolve(*grad_cmd, tiny);
      cfg.validate();
      const auto t0 = std::chrono::steady_clock::now();
      double worst = 0.0;
      for (const GradcheckResult& r : run_gradcheck(cfg, grad_h)) {
        out << r.name << ": coords=" << r.coordinates << " max_rel_err=" << real(r.comparison.max_rel_error) << " worst_index=" << r.comparison.worst_index << " analytic=" << real(r.comparison.worst_analytic) << " numeric=" << real(r.comparison.worst_numeric)
            << "\n";
        worst = std::max(worst, r.comparison.max_rel_error);
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out << "max relative error: " << real(worst) << " (tolerance " << real(grad_tol) << ", " << real(secs)
          << " s, kernels=" << kernels::name(kernels::active().backend) << ")\n";
      return worst < grad_tol ? kOk : kGradcheckFailed;
    }

    if (score_cmd->parsed()) {
      const FeatureStore store = read_features(score_data);
      const HintParams params = read_params(score_params);
      if (score_i >= store.size() || score_j >= store.size()) {
        throw ArgumentError("--i/--j must be below " + std::to_string(store.size()));
      }
      RunConfig cfg = fit_to_store(score_cfg.resolve(*score_cmd), store, score_cfg, *score_cmd, true);
      const EncodedGallery enc = encode_gallery(store, params, cfg);
      ScoringOptions qcr = cfg.scoring();
      qcr.qcr = true;
      out << "pair_score=" << real(pair_score(enc.fused[score_i], enc.targets[score_j], qcr))
          << " cosine=" << real(cosine_score(enc.fused[score_i], enc.targets[score_j])) << "\n";
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace hint::cli
