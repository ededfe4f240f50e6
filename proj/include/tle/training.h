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
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tle/checkpoint.h"
#include "tle/encoder_decoder.h"
#include "tle/scoring.h"
#include "tle/seq.h"

namespace tle {

enum class LossKind { kTle, kCe };

const char* loss_kind_name(LossKind kind);

struct TrainConfig {
  int batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double grad_clip = 5.0;
  int max_epochs = 50;
  /// Evaluations without validation improvement before stopping.
  int patience = 5;
  /// Upper clip on the terminal target.
  double clip_value = 5.0;
  std::vector<int> eval_beams = {1, 10};
  std::uint64_t seed = 1;
  /// Fail the run if greedy empirical risk exceeds the greedy surrogate risk
  /// at any evaluation.
  bool verify_bounds = false;
  /// Write elapsed seconds into metrics; when false the column holds 0 so
  /// metrics files are reproducible byte for byte.
  bool record_wall_clock = true;
  /// Worker threads for evaluation.
  int eval_threads = 1;

  /// Throws std::invalid_argument on non-positive settings.
  void validate() const;
  Manifest to_manifest() const;
};

/// Metrics of one scorer on one split at one beam size.
struct MetricsReport {
  std::string split;
  int epoch = 0;
  int beam = 1;
  double ter = 0.0;
  double ser = 0.0;
  double mean_task_loss = 0.0;
  double loss_ce = 0.0;
  double loss_greedy2 = 0.0;
  double loss_ed_greedy = 0.0;
  double seconds = 0.0;
};

struct EvalOptions {
  double clip_value = 5.0;
  int threads = 1;
  /// Score the decoders minimize. Softmax-trained models decode under
  /// kNormalized; surrogate losses always use the raw deltas.
  ScoreMode decode = ScoreMode::kSum;
};

/// Decoding score of a model trained with `loss`.
ScoreMode decode_mode(LossKind loss);

/// Decodes every sample at each beam size (B = 1 is greedy) with the length
/// cap 2 * |input| + 5. Surrogate losses do not depend on the beam and are
/// repeated in each report.
std::vector<MetricsReport> evaluate(const Scorer& scorer, const Dataset& data,
                                    const std::vector<int>& beams,
                                    const EvalOptions& opts = {});

/// Raised when a training loss becomes non-finite. The model has already been
/// restored to the last good parameters.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Raised in verify_bounds mode when an evaluation breaks the greedy bound.
class BoundViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  /// Early-stopping criterion on the validation set: mean clipped greedy2
  /// loss for TLE, mean token-level cross-entropy for CE.
  double valid_criterion = 0.0;
  MetricsReport valid;
  double seconds = 0.0;
};

struct TrainHistory {
  LossKind loss = LossKind::kTle;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_criterion = 0.0;
  bool early_stopped = false;
  long steps = 0;
};

struct TrainCallbacks {
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Training along the model's own greedy predictions: per batch, decode with
/// the current parameters, regress every delta toward the optimistic-loss
/// increments (terminal entry clipped), take a clipped Adam step.
TrainHistory train_tle(NeuralScorer& model, const Dataset& train,
                       const Dataset& valid, const TrainConfig& config,
                       const TrainCallbacks& callbacks = {});

/// Teacher-forced token-level cross-entropy baseline with the same loop.
TrainHistory train_ce(NeuralScorer& model, const Dataset& train,
                      const Dataset& valid, const TrainConfig& config,
                      const TrainCallbacks& callbacks = {});

TrainHistory train(LossKind loss, NeuralScorer& model, const Dataset& train,
                   const Dataset& valid, const TrainConfig& config,
                   const TrainCallbacks& callbacks = {});

/// Differentiable per-sample objectives. `yhat` receives the greedy
/// prediction made during the same forward pass.
Var tle_sample_loss(NeuralScorer::Graph& graph, const SamplePair& sample,
                    double clip_value, OutputSequence* yhat = nullptr);
/// Squared-error objective along a fixed terminated sequence `yhat`.
Var tle_loss_along(NeuralScorer::Graph& graph, const SamplePair& sample,
                   const OutputSequence& yhat, double clip_value);
Var ce_sample_loss(NeuralScorer::Graph& graph, const SamplePair& sample);

/// Training-time decode cap: 2 * |ground truth| + 5.
int training_length_cap(const SamplePair& sample);

inline constexpr const char* kMetricsCsvHeader =
    "epoch,split,beam,TER,SER,loss_ce,loss_greedy2,seconds";
std::string format_metrics_row(const MetricsReport& m);

}  // namespace tle
