// Copyright 2026 The TLE Authors.
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

// tle: data generation, training, evaluation, bound verification and
// target inspection for task-loss-estimation models.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tle/checkpoint.h"
#include "tle/encoder_decoder.h"
#include "tle/experiment.h"
#include "tle/io.h"
#include "tle/scoring.h"
#include "tle/seq.h"
#include "tle/surrogate.h"
#include "tle/task_loss.h"
#include "tle/training.h"
#include "tle/verify.h"

namespace {

enum Exit {
  kOk = 0,
  kIo = 1,
  kConfig = 2,
  kViolation = 3,
  kDivergence = 4,
  kBudget = 5,
};

tle::RunConfig load_config(const std::string& path,
                           const std::vector<std::string>& overrides) {
  tle::RunConfig cfg = path.empty() ? tle::RunConfig{} : tle::RunConfig::load(path);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw tle::ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

tle::Splits splits_for(const tle::RunConfig& cfg, const std::string& data_dir) {
  if (data_dir.empty()) return tle::generate_data(cfg);
  return tle::read_splits(data_dir, tle::task_alphabet(cfg));
}

nlohmann::json metrics_json(const tle::MetricsReport& m) {
  return {{"split", m.split},       {"beam", m.beam},
          {"TER", m.ter},           {"SER", m.ser},
          {"mean_task_loss", m.mean_task_loss},
          {"loss_ce", m.loss_ce},   {"loss_greedy2", m.loss_greedy2},
          {"loss_ed_greedy", m.loss_ed_greedy}};
}

// Alphabet of the letters used by the arguments, unless given explicitly.
tle::Alphabet decompose_alphabet(const std::string& gt, const std::string& prefix,
                                 const std::string& explicit_symbols) {
  std::vector<std::string> symbols;
  if (!explicit_symbols.empty()) {
    for (const char ch : explicit_symbols)
      if (ch != ',' && ch != ' ') symbols.emplace_back(1, ch);
  } else {
    std::set<char> seen(gt.begin(), gt.end());
    seen.insert(prefix.begin(), prefix.end());
    for (const char ch : seen) symbols.emplace_back(1, ch);
  }
  return tle::Alphabet(symbols);
}

// Accepts both "abc" and "a b c".
tle::TokenSeq parse_letters(const std::string& text, const tle::Alphabet& alphabet) {
  if (text.find(' ') != std::string::npos) return tle::parse_tokens(text, alphabet);
  tle::TokenSeq out;
  for (const char ch : text) {
    const std::string s(1, ch);
    if (!alphabet.contains(s)) throw tle::ConfigError("symbol '" + s + "' not in the alphabet");
    out.push_back(alphabet.index(s));
  }
  return out;
}

int run_decompose(const std::vector<std::string>& positional, std::string gt,
                  std::string prefix, const std::string& alphabet_arg) {
  for (const std::string& arg : positional) {
    if (arg.rfind("gt=", 0) == 0) gt = arg.substr(3);
    else if (arg.rfind("prefix=", 0) == 0) prefix = arg.substr(7);
    else throw tle::ConfigError("unexpected argument '" + arg + "'");
  }
  const tle::Alphabet alphabet = decompose_alphabet(gt, prefix, alphabet_arg);
  const tle::TokenSeq gt_tokens = parse_letters(gt, alphabet);
  const tle::TokenSeq prefix_tokens = parse_letters(prefix, alphabet);

  std::printf("%-12s", "prefix");
  for (int c = 0; c < alphabet.extended_size(); ++c)
    std::printf(" %6s", alphabet.symbol(c).c_str());
  std::printf("\n");
  tle::OptimisticRow row(gt_tokens, alphabet.end());
  for (std::size_t j = 0; j <= prefix_tokens.size(); ++j) {
    if (j > 0) row = row.extend(prefix_tokens[j - 1]);
    const auto targets = tle::delta_targets(row, alphabet.size());
    std::string shown = "\"";
    for (std::size_t i = 0; i < j; ++i) shown += alphabet.symbol(prefix_tokens[i]);
    shown += "\"";
    std::printf("%-12s", shown.c_str());
    for (double v : targets) std::printf(" %6g", v);
    std::printf("\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task loss estimation for sequence prediction"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir;
  std::vector<std::string> overrides;

  auto* gen = app.add_subcommand("gen-data", "write train/valid/test splits");
  gen->add_option("--config", config_path, "run config (key=value)");
  gen->add_option("--set", overrides, "override a config key (key=value)");
  gen->add_option("--out", out_dir, "output directory")->required();

  std::string loss_arg;
  auto* tr = app.add_subcommand("train", "train one model");
  tr->add_option("--config", config_path, "run config (key=value)");
  tr->add_option("--set", overrides, "override a config key (key=value)");
  tr->add_option("--data", data_dir, "directory with train/valid/test.tsv; generated when absent");
  tr->add_option("--out", out_dir, "output directory")->required();
  tr->add_option("--loss", loss_arg, "tle or ce (overrides config)")
      ->check(CLI::IsMember({"tle", "ce"}));

  std::string checkpoint, eval_data;
  bool oracle = false;
  int alphabet_size = 8, threads = 1;
  double clip_value = 5.0;
  std::vector<int> beams = {1, 10};
  auto* ev = app.add_subcommand("eval", "decode a dataset and report metrics");
  auto* ck_opt = ev->add_option("--checkpoint", checkpoint, "trained model");
  ev->add_flag("--oracle", oracle, "score with exact optimistic-loss targets")->excludes(ck_opt);
  ev->add_option("--data", eval_data, "dataset file")->required();
  ev->add_option("--alphabet-size", alphabet_size, "letters a.. used by --oracle data")
      ->check(CLI::Range(1, 26));
  ev->add_option("--beams", beams, "beam sizes")->delimiter(',');
  ev->add_option("--threads", threads, "evaluation threads")->check(CLI::PositiveNumber);
  ev->add_option("--clip", clip_value, "terminal target clip for greedy2");
  std::string score_arg;
  ev->add_option("--score", score_arg, "decode by sum or normalized score (default: from checkpoint)")
      ->check(CLI::IsMember({"sum", "normalized"}));

  long trials = 1000;
  std::uint64_t seed = tle::GeneratorConfig{}.seed;
  std::string json_path, suite = "all";
  auto* vf = app.add_subcommand("verify", "check the surrogate bounds on random instances");
  vf->add_option("--trials", trials, "trials per verifier")->check(CLI::PositiveNumber);
  vf->add_option("--seed", seed, "generator seed");
  vf->add_option("--json", json_path, "also write the reports as JSON to this file");
  vf->add_option("--suite", suite, "all, theorem1, theorem2, orderings or oracle")
      ->check(CLI::IsMember({"all", "theorem1", "theorem2", "orderings", "oracle"}));

  std::vector<std::string> positional;
  std::string gt_arg, prefix_arg, alphabet_arg;
  auto* dc = app.add_subcommand("decompose", "print per-position optimistic-loss targets");
  dc->add_option("args", positional, "gt=... prefix=...");
  dc->add_option("--gt", gt_arg, "ground truth letters");
  dc->add_option("--prefix", prefix_arg, "prefix letters");
  dc->add_option("--alphabet", alphabet_arg, "symbols, e.g. abcx (default: letters used)");

  auto* cmp = app.add_subcommand("compare", "train CE and TLE on the same data and tabulate");
  cmp->add_option("--config", config_path, "run config (key=value)");
  cmp->add_option("--set", overrides, "override a config key (key=value)");
  cmp->add_option("--data", data_dir, "directory with train/valid/test.tsv");
  cmp->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) {
      const auto cfg = load_config(config_path, overrides);
      const auto splits = tle::generate_data(cfg);
      const auto alphabet = tle::task_alphabet(cfg);
      tle::write_splits(out_dir, splits, alphabet);
      std::printf("train %s\nvalid %s\ntest  %s\n",
                  tle::dataset_digest(splits.train, alphabet).c_str(),
                  tle::dataset_digest(splits.valid, alphabet).c_str(),
                  tle::dataset_digest(splits.test, alphabet).c_str());
      return kOk;
    }
    if (*tr) {
      auto cfg = load_config(config_path, overrides);
      if (!loss_arg.empty()) cfg.set("loss", loss_arg);
      const auto splits = splits_for(cfg, data_dir);
      const auto result = tle::run_training(cfg, splits, cfg.loss, out_dir);
      std::fputs(result.metrics_csv.c_str(), stdout);
      return kOk;
    }
    if (*ev) {
      if (!oracle && checkpoint.empty())
        throw tle::ConfigError("eval needs --checkpoint or --oracle");
      int input_size = alphabet_size;
      tle::Checkpoint ck;
      if (!oracle) {
        ck = tle::load_checkpoint(checkpoint);
        input_size = tle::ModelConfig::from_manifest(ck.manifest).input_size;
      }
      const auto alphabet = tle::Alphabet::letters(input_size);
      const auto data = tle::load_dataset(eval_data, alphabet, alphabet);
      std::unique_ptr<tle::Scorer> scorer;
      if (oracle) {
        scorer = std::make_unique<tle::TargetScorer>(alphabet.size(), data);
      } else {
        const auto mc = tle::ModelConfig::from_manifest(ck.manifest);
        if (mc.output_size != alphabet.extended_size())
          throw tle::ConfigError("checkpoint output size does not match its input alphabet");
        scorer = std::make_unique<tle::NeuralScorer>(mc, ck.params);
      }
      tle::ScoreMode mode = tle::ScoreMode::kSum;
      if (!oracle && ck.manifest.count("run.loss") && ck.manifest.at("run.loss") == "ce")
        mode = tle::ScoreMode::kNormalized;
      if (!score_arg.empty())
        mode = score_arg == "sum" ? tle::ScoreMode::kSum : tle::ScoreMode::kNormalized;
      const auto reports = tle::evaluate(*scorer, data, beams, {clip_value, threads, mode});
      const tle::NormalizedScorer normalized(*scorer);
      const tle::Scorer& decoder = mode == tle::ScoreMode::kNormalized
                                       ? static_cast<const tle::Scorer&>(normalized)
                                       : *scorer;
      for (std::size_t i = 0; i < reports.size(); ++i) {
        auto j = metrics_json(reports[i]);
        j["split"] = eval_data;
        const auto risk = tle::min_min_risk(
            decoder, data, beams[i] == 1 ? tle::DecoderSpec::greedy() : tle::DecoderSpec::beam_of(beams[i]));
        j["empirical_risk"] = risk.empirical_risk;
        j["surrogate_risk"] = risk.surrogate_risk;
        j["margin_term"] = risk.margin_term;
        std::cout << j.dump() << "\n";
      }
      return kOk;
    }
    if (*vf) {
      tle::GeneratorConfig gc;
      gc.seed = seed;
      const tle::InstanceGenerator gen_(gc);
      std::vector<tle::ViolationReport> reports;
      if (suite == "all" || suite == "theorem1") reports.push_back(tle::verify_theorem1(gen_, trials));
      if (suite == "all" || suite == "theorem2") reports.push_back(tle::verify_theorem2(gen_, trials));
      if (suite == "all" || suite == "orderings") reports.push_back(tle::verify_orderings(gen_, trials));
      if (suite == "all" || suite == "oracle") reports.push_back(tle::verify_delta_oracle(gen_, trials));
      std::fputs(tle::format_report_table(reports).c_str(), stdout);
      nlohmann::json all = nlohmann::json::array();
      for (const auto& r : reports) all.push_back(tle::to_json(r));
      if (!json_path.empty()) tle::write_file(json_path, all.dump(2) + "\n");
      else std::cout << all.dump() << "\n";
      const bool ok = std::all_of(reports.begin(), reports.end(),
                                  [](const auto& r) { return r.passed(); });
      return ok ? kOk : kViolation;
    }
    if (*dc) return run_decompose(positional, gt_arg, prefix_arg, alphabet_arg);
    if (*cmp) {
      const auto cfg = load_config(config_path, overrides);
      const auto splits = splits_for(cfg, data_dir);
      const auto ce = tle::run_training(cfg, splits, tle::LossKind::kCe, out_dir + "/ce");
      const auto tl = tle::run_training(cfg, splits, tle::LossKind::kTle, out_dir + "/tle");
      const std::string table = tle::format_comparison(ce, tl);
      tle::write_file(out_dir + "/comparison.txt", table);
      std::fputs(table.c_str(), stdout);
      return kOk;
    }
  } catch (const tle::IoError& e) {
    std::fprintf(stderr, "tle: %s\n", e.what());
    return kIo;
  } catch (const tle::ConfigError& e) {
    std::fprintf(stderr, "tle: config error: %s\n", e.what());
    return kConfig;
  } catch (const tle::ParseError& e) {
    std::fprintf(stderr, "tle: %s\n", e.what());
    return kConfig;
  } catch (const tle::BudgetExceeded& e) {
    std::fprintf(stderr, "tle: budget exceeded: %s\n", e.what());
    return kBudget;
  } catch (const tle::DivergenceError& e) {
    std::fprintf(stderr, "tle: diverged at epoch %d: %s\n", e.epoch(), e.what());
    return kDivergence;
  } catch (const tle::BoundViolation& e) {
    std::fprintf(stderr, "tle: bound violated: %s\n", e.what());
    return kViolation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "tle: %s\n", e.what());
    return kConfig;
  }
  return kOk;
}
