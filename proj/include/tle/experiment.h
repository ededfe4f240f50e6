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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tle/checkpoint.h"
#include "tle/seq.h"
#include "tle/training.h"

namespace tle {

/// Raised for unknown keys and malformed values in a run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TaskKind { kCopy, kReverse, kNoisyCopy };

/// Flat `key=value` run description. Blank lines and `#` comments are
/// ignored; unknown keys raise ConfigError.
struct RunConfig {
  TaskKind task = TaskKind::kCopy;
  /// Substitution rate applied to the input of noisy-copy.
  double noise = 0.2;
  int alphabet_size = 8;
  int min_len = 3;
  int max_len = 10;
  int n_train = 2000;
  int n_valid = 200;
  int n_test = 200;
  std::uint64_t seed = 1;
  int embed_dim = 32;
  int hidden_dim = 64;
  LossKind loss = LossKind::kTle;
  TrainConfig train;

  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::string& path);
  void set(const std::string& key, const std::string& value);
  void validate() const;
  /// Canonical text form; parse(to_text()) reproduces the config.
  std::string to_text() const;
};

struct Splits {
  Dataset train, valid, test;
};

/// Input and output alphabets of every toy task: the first alphabet_size
/// lowercase letters.
Alphabet task_alphabet(const RunConfig& config);

/// Ground truth of a clean source string under the task.
TokenSeq task_target(TaskKind task, const TokenSeq& clean);

/// Each split draws from its own PRNG stream derived from the seed.
Splits generate_data(const RunConfig& config);

void write_splits(const std::string& dir, const Splits& splits,
                  const Alphabet& alphabet);
Splits read_splits(const std::string& dir, const Alphabet& alphabet);

/// SHA-256 of the serialized dataset.
std::string dataset_digest(const Dataset& data, const Alphabet& alphabet);

struct RunResult {
  TrainHistory history;
  /// Evaluation of the restored best model at every configured beam, valid
  /// split first, then test.
  std::vector<MetricsReport> final_metrics;
  std::string metrics_csv;
  Manifest manifest;
};

/// Trains one model on `splits`. When out_dir is non-empty, writes
/// model.ckpt, manifest.txt and metrics.csv there; metrics rows are appended
/// as each epoch completes.
RunResult run_training(const RunConfig& config, const Splits& splits,
                       LossKind loss, const std::string& out_dir = "");

/// Side-by-side test-set table for a CE and a TLE run.
std::string format_comparison(const RunResult& ce, const RunResult& tle);

}  // namespace tle
