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

#include "tle/experiment.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tle/encoder_decoder.h"
#include "tle/io.h"
#include "tle/random.h"

namespace tle {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  std::from_chars_result res;
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for double is incomplete in some toolchains.
    char* end = nullptr;
    out = std::strtod(value.c_str(), &end);
    res.ptr = end;
    res.ec = value.empty() ? std::errc::invalid_argument : std::errc{};
  } else {
    res = std::from_chars(first, last, out);
  }
  if (res.ec != std::errc{} || res.ptr != last)
    throw ConfigError("bad value '" + value + "' for key '" + key + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("bad boolean '" + value + "' for key '" + key + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  if (out.empty()) throw ConfigError("empty list for key '" + key + "'");
  return out;
}

const char* task_name(TaskKind t) {
  switch (t) {
    case TaskKind::kCopy: return "copy";
    case TaskKind::kReverse: return "reverse";
    case TaskKind::kNoisyCopy: return "noisy-copy";
  }
  return "?";
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "task") {
    if (value == "copy") task = TaskKind::kCopy;
    else if (value == "reverse") task = TaskKind::kReverse;
    else if (value == "noisy-copy") task = TaskKind::kNoisyCopy;
    else throw ConfigError("unknown task '" + value + "'");
  } else if (key == "noise") noise = parse_number<double>(key, value);
  else if (key == "alphabet_size") alphabet_size = parse_number<int>(key, value);
  else if (key == "min_len") min_len = parse_number<int>(key, value);
  else if (key == "max_len") max_len = parse_number<int>(key, value);
  else if (key == "n_train") n_train = parse_number<int>(key, value);
  else if (key == "n_valid") n_valid = parse_number<int>(key, value);
  else if (key == "n_test") n_test = parse_number<int>(key, value);
  else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
    train.seed = seed;
  } else if (key == "embed_dim") embed_dim = parse_number<int>(key, value);
  else if (key == "hidden_dim") hidden_dim = parse_number<int>(key, value);
  else if (key == "loss") {
    if (value == "tle") loss = LossKind::kTle;
    else if (value == "ce") loss = LossKind::kCe;
    else throw ConfigError("unknown loss '" + value + "'");
  } else if (key == "batch_size") train.batch_size = parse_number<int>(key, value);
  else if (key == "learning_rate") train.learning_rate = parse_number<double>(key, value);
  else if (key == "beta1") train.beta1 = parse_number<double>(key, value);
  else if (key == "beta2") train.beta2 = parse_number<double>(key, value);
  else if (key == "epsilon") train.epsilon = parse_number<double>(key, value);
  else if (key == "grad_clip") train.grad_clip = parse_number<double>(key, value);
  else if (key == "max_epochs") train.max_epochs = parse_number<int>(key, value);
  else if (key == "patience") train.patience = parse_number<int>(key, value);
  else if (key == "clip_value") train.clip_value = parse_number<double>(key, value);
  else if (key == "eval_beams") train.eval_beams = parse_int_list(key, value);
  else if (key == "verify_bounds") train.verify_bounds = parse_bool(key, value);
  else if (key == "record_wall_clock") train.record_wall_clock = parse_bool(key, value);
  else if (key == "eval_threads") train.eval_threads = parse_number<int>(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
  if (alphabet_size < 1 || alphabet_size > 26)
    throw ConfigError("alphabet_size must be in [1, 26]");
  if (min_len < 1 || max_len < min_len)
    throw ConfigError("need 1 <= min_len <= max_len");
  if (n_train < 1 || n_valid < 1 || n_test < 1)
    throw ConfigError("sample counts must be positive");
  if (!(noise >= 0.0 && noise <= 1.0)) throw ConfigError("noise must be in [0, 1]");
  if (embed_dim < 1 || hidden_dim < 1) throw ConfigError("model dims must be positive");
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    cfg.set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) { return parse(read_file(path)); }

std::string RunConfig::to_text() const {
  std::string beams;
  for (std::size_t i = 0; i < train.eval_beams.size(); ++i)
    beams += (i ? "," : "") + std::to_string(train.eval_beams[i]);
  std::string out;
  auto kv = [&](const char* k, const std::string& v) { out += std::string(k) + "=" + v + "\n"; };
  kv("task", task_name(task));
  kv("noise", fmt(noise));
  kv("alphabet_size", std::to_string(alphabet_size));
  kv("min_len", std::to_string(min_len));
  kv("max_len", std::to_string(max_len));
  kv("n_train", std::to_string(n_train));
  kv("n_valid", std::to_string(n_valid));
  kv("n_test", std::to_string(n_test));
  kv("seed", std::to_string(seed));
  kv("embed_dim", std::to_string(embed_dim));
  kv("hidden_dim", std::to_string(hidden_dim));
  kv("loss", loss_kind_name(loss));
  kv("batch_size", std::to_string(train.batch_size));
  kv("learning_rate", fmt(train.learning_rate));
  kv("beta1", fmt(train.beta1));
  kv("beta2", fmt(train.beta2));
  kv("epsilon", fmt(train.epsilon));
  kv("grad_clip", fmt(train.grad_clip));
  kv("max_epochs", std::to_string(train.max_epochs));
  kv("patience", std::to_string(train.patience));
  kv("clip_value", fmt(train.clip_value));
  kv("eval_beams", beams);
  kv("verify_bounds", train.verify_bounds ? "true" : "false");
  kv("record_wall_clock", train.record_wall_clock ? "true" : "false");
  kv("eval_threads", std::to_string(train.eval_threads));
  return out;
}

Alphabet task_alphabet(const RunConfig& config) {
  return Alphabet::letters(config.alphabet_size);
}

TokenSeq task_target(TaskKind task, const TokenSeq& clean) {
  if (task == TaskKind::kReverse) return TokenSeq(clean.rbegin(), clean.rend());
  return clean;
}

namespace {

Dataset generate_split(const RunConfig& cfg, int count, std::uint64_t stream) {
  Rng rng(derive_seed(cfg.seed, stream));
  Dataset out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int len = uniform_int(rng, cfg.min_len, cfg.max_len);
    TokenSeq clean(len);
    for (Token& t : clean) t = uniform_int(rng, 0, cfg.alphabet_size - 1);
    TokenSeq input = clean;
    if (cfg.task == TaskKind::kNoisyCopy && cfg.alphabet_size > 1) {
      for (Token& t : input) {
        if (uniform01(rng) < cfg.noise) {
          // Substitute a different symbol.
          const int shift = uniform_int(rng, 1, cfg.alphabet_size - 1);
          t = (t + shift) % cfg.alphabet_size;
        }
      }
    }
    out.push_back({std::move(input),
                   OutputSequence::terminate(task_target(cfg.task, clean),
                                             cfg.alphabet_size)});
  }
  return out;
}

}  // namespace

Splits generate_data(const RunConfig& config) {
  config.validate();
  return {generate_split(config, config.n_train, 101),
          generate_split(config, config.n_valid, 102),
          generate_split(config, config.n_test, 103)};
}

void write_splits(const std::string& dir, const Splits& splits,
                  const Alphabet& alphabet) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
  save_dataset(dir + "/train.tsv", splits.train, alphabet, alphabet);
  save_dataset(dir + "/valid.tsv", splits.valid, alphabet, alphabet);
  save_dataset(dir + "/test.tsv", splits.test, alphabet, alphabet);
}

Splits read_splits(const std::string& dir, const Alphabet& alphabet) {
  return {load_dataset(dir + "/train.tsv", alphabet, alphabet),
          load_dataset(dir + "/valid.tsv", alphabet, alphabet),
          load_dataset(dir + "/test.tsv", alphabet, alphabet)};
}

std::string dataset_digest(const Dataset& data, const Alphabet& alphabet) {
  return sha256_hex(format_dataset(data, alphabet, alphabet));
}

RunResult run_training(const RunConfig& config, const Splits& splits,
                       LossKind loss, const std::string& out_dir) {
  config.validate();
  const Alphabet alphabet = task_alphabet(config);

  ModelConfig mc;
  mc.input_size = config.alphabet_size;
  mc.output_size = config.alphabet_size + 1;
  mc.embed_dim = config.embed_dim;
  mc.hidden_dim = config.hidden_dim;
  mc.seed = config.seed;
  NeuralScorer model(mc);

  RunResult result;
  result.manifest = mc.to_manifest();
  for (const auto& [k, v] : config.train.to_manifest()) result.manifest[k] = v;
  result.manifest["run.loss"] = loss_kind_name(loss);
  result.manifest["run.config"] = [&] {
    std::string flat = config.to_text();
    std::replace(flat.begin(), flat.end(), '\n', ';');
    return flat;
  }();
  result.manifest["data.train.sha256"] = dataset_digest(splits.train, alphabet);
  result.manifest["data.valid.sha256"] = dataset_digest(splits.valid, alphabet);
  result.manifest["data.test.sha256"] = dataset_digest(splits.test, alphabet);

  std::ofstream csv_file;
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create directory '" + out_dir + "'");
    csv_file.open(out_dir + "/metrics.csv", std::ios::trunc);
    if (!csv_file) throw IoError("cannot write '" + out_dir + "/metrics.csv'");
    std::string manifest_text;
    for (const auto& [k, v] : result.manifest) manifest_text += k + "=" + v + "\n";
    write_file(out_dir + "/manifest.txt", manifest_text);
  }
  auto emit = [&](const MetricsReport& m) {
    const std::string row = format_metrics_row(m) + "\n";
    result.metrics_csv += row;
    if (csv_file) csv_file << row << std::flush;
  };
  result.metrics_csv = std::string(kMetricsCsvHeader) + "\n";
  if (csv_file) csv_file << kMetricsCsvHeader << "\n";

  TrainCallbacks callbacks;
  callbacks.on_epoch = [&](const EpochRecord& rec) { emit(rec.valid); };
  const auto started = std::chrono::steady_clock::now();
  result.history = train(loss, model, splits.train, splits.valid, config.train, callbacks);

  const EvalOptions eval_opts{config.train.clip_value, config.train.eval_threads,
                              decode_mode(loss)};
  for (const auto* split : {&splits.valid, &splits.test}) {
    auto reports = evaluate(model, *split, config.train.eval_beams, eval_opts);
    const double secs =
        config.train.record_wall_clock
            ? std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                  .count()
            : 0.0;
    for (auto& m : reports) {
      m.split = split == &splits.valid ? "valid" : "test";
      m.epoch = result.history.best_epoch;
      m.seconds = secs;
      emit(m);
      result.final_metrics.push_back(m);
    }
  }

  result.manifest["run.best_epoch"] = std::to_string(result.history.best_epoch);
  result.manifest["run.epochs"] = std::to_string(result.history.epochs.size());
  if (!out_dir.empty()) {
    save_checkpoint(out_dir + "/model.ckpt", model.params(), result.manifest);
    std::string manifest_text;
    for (const auto& [k, v] : result.manifest) manifest_text += k + "=" + v + "\n";
    write_file(out_dir + "/manifest.txt", manifest_text);
  }
  return result;
}

std::string format_comparison(const RunResult& ce, const RunResult& tle) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s %5s %9s %9s %12s %12s\n", "Model", "Beam",
                "TER%", "SER%", "loss_ce", "loss_greedy2");
  out += buf;
  std::vector<int> beams;
  for (const auto& m : tle.final_metrics)
    if (m.split == "test") beams.push_back(m.beam);
  for (int b : beams) {
    for (const auto* run : {&ce, &tle}) {
      for (const auto& m : run->final_metrics) {
        if (m.split != "test" || m.beam != b) continue;
        std::snprintf(buf, sizeof buf, "%-6s %5d %9.2f %9.2f %12.4f %12.4f\n",
                      run->history.loss == LossKind::kCe ? "CE" : "TLE", b, 100.0 * m.ter,
                      100.0 * m.ser, m.loss_ce, m.loss_greedy2);
        out += buf;
      }
    }
  }
  return out;
}

}  // namespace tle
