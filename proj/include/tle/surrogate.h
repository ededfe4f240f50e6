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

#include <span>
#include <vector>

#include "tle/scoring.h"
#include "tle/seq.h"
#include "tle/task_loss.h"

namespace tle {

enum class DecoderKind { kGreedy, kBeam, kExact };

/// Which decoder to run and its length cap. A negative max_len selects the
/// default cap 2 * |input| + 5.
struct DecoderSpec {
  DecoderKind kind = DecoderKind::kGreedy;
  int beam = 1;
  int max_len = -1;

  static DecoderSpec greedy(int max_len = -1) {
    return {DecoderKind::kGreedy, 1, max_len};
  }
  static DecoderSpec beam_of(int beam, int max_len = -1) {
    return {DecoderKind::kBeam, beam, max_len};
  }
  static DecoderSpec exact(int max_len) {
    return {DecoderKind::kExact, 1, max_len};
  }
};

int decode_length_cap(const DecoderSpec& spec, std::span<const Token> input);
OutputSequence decode(const Scorer& scorer, std::span<const Token> input,
                      const DecoderSpec& spec);

/// How optimistic-loss targets are post-processed before comparison with the
/// model deltas.
struct TargetOptions {
  bool clip = false;
  double clip_value = kDefaultTerminalClip;
};

struct SampleRisk {
  int task_loss = 0;
  double min_min = 0.0;
  double margin = 0.0;
};

/// Empirical risk alongside the min-min surrogate risk and its margin term.
struct RiskReport {
  double empirical_risk = 0.0;
  double surrogate_risk = 0.0;
  double margin_term = 0.0;
  std::vector<SampleRisk> per_sample;
};

/// Mean task loss of decoded predictions.
double empirical_risk(const Scorer& scorer, const Dataset& data,
                      const DecoderSpec& spec);

/// Per-sample min-min loss and margin with the decoder's prediction as yhat.
RiskReport min_min_risk(const Scorer& scorer, const Dataset& data,
                        const DecoderSpec& spec);

/// Sequence-level cross-entropy over the enumerable output space:
/// F(gt) - log sum_y exp(F(y)), F = score_sum.
double loss_ce_global(const Scorer& scorer, std::span<const Token> input,
                      const OutputSequence& gt, int max_len,
                      std::size_t cap = kDefaultEnumerationCap);

/// Teacher-forced token-level cross-entropy along gt.
double loss_ce_factorized(const Scorer& scorer, std::span<const Token> input,
                          const OutputSequence& gt);

/// max(0, max_y F(gt) - F(y) + task_loss(gt, y)) over the enumerable space.
double loss_hinge(const Scorer& scorer, std::span<const Token> input,
                  const OutputSequence& gt, int max_len,
                  std::size_t cap = kDefaultEnumerationCap);

/// |F(gt)| + |task_loss(gt, yhat) - F(yhat)|.
double loss_min_min(const Scorer& scorer, std::span<const Token> input,
                    const OutputSequence& gt, const OutputSequence& yhat);

/// max(F(yhat) - F(gt), 0).
double margin_term(const Scorer& scorer, std::span<const Token> input,
                   const OutputSequence& gt, const OutputSequence& yhat);

/// Token-wise absolute errors against optimistic-loss targets along both gt
/// and yhat.
double loss_ed_min_min(const Scorer& scorer, std::span<const Token> input,
                       const OutputSequence& gt, const OutputSequence& yhat,
                       const TargetOptions& opts = {});

/// One greedy decoding step: the model deltas, the optimistic-loss targets
/// for the same prefix, the chosen token and the reference token c_min.
struct GreedyStep {
  std::vector<double> deltas;
  std::vector<double> targets;
  Token chosen = 0;
  /// argmin of the targets over the tokens permitted at this step; at the
  /// length cap only the end token is permitted.
  Token c_min = 0;
  bool forced = false;
};

struct GreedyTrace {
  OutputSequence yhat;
  std::vector<GreedyStep> steps;
};

/// Runs greedy search and records deltas and targets at every step.
GreedyTrace greedy_trace(const Scorer& scorer, std::span<const Token> input,
                         const OutputSequence& gt, int max_len,
                         const TargetOptions& opts = {});

double loss_ed_greedy(const GreedyTrace& trace);
double loss_ed_greedy1(const GreedyTrace& trace);
double loss_ed_greedy2(const GreedyTrace& trace);

double loss_ed_greedy(const Scorer& scorer, std::span<const Token> input,
                      const OutputSequence& gt, int max_len,
                      const TargetOptions& opts = {});
double loss_ed_greedy1(const Scorer& scorer, std::span<const Token> input,
                       const OutputSequence& gt, int max_len,
                       const TargetOptions& opts = {});
/// Squared-error variant; the terminal target is clipped by default.
double loss_ed_greedy2(const Scorer& scorer, std::span<const Token> input,
                       const OutputSequence& gt, int max_len,
                       const TargetOptions& opts = {true,
                                                    kDefaultTerminalClip});

}  // namespace tle
