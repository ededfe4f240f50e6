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

#include "tle/surrogate.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tle {

int decode_length_cap(const DecoderSpec& spec, std::span<const Token> input) {
  return spec.max_len >= 0 ? spec.max_len
                           : 2 * static_cast<int>(input.size()) + 5;
}

OutputSequence decode(const Scorer& scorer, std::span<const Token> input,
                      const DecoderSpec& spec) {
  const int cap = decode_length_cap(spec, input);
  switch (spec.kind) {
    case DecoderKind::kGreedy:
      return greedy_search(scorer, input, cap);
    case DecoderKind::kBeam:
      return spec.beam == 1 ? greedy_search(scorer, input, cap)
                            : beam_search(scorer, input, spec.beam, cap);
    case DecoderKind::kExact:
      return exact_search(scorer, input, cap);
  }
  throw std::logic_error("unknown decoder kind");
}

double empirical_risk(const Scorer& scorer, const Dataset& data,
                      const DecoderSpec& spec) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : data)
    total += task_loss(s.ground_truth, decode(scorer, s.input, spec));
  return total / static_cast<double>(data.size());
}

RiskReport min_min_risk(const Scorer& scorer, const Dataset& data,
                        const DecoderSpec& spec) {
  RiskReport report;
  for (const auto& s : data) {
    const OutputSequence yhat = decode(scorer, s.input, spec);
    SampleRisk r;
    r.task_loss = task_loss(s.ground_truth, yhat);
    r.min_min = loss_min_min(scorer, s.input, s.ground_truth, yhat);
    r.margin = margin_term(scorer, s.input, s.ground_truth, yhat);
    report.empirical_risk += r.task_loss;
    report.surrogate_risk += r.min_min;
    report.margin_term += r.margin;
    report.per_sample.push_back(r);
  }
  if (!data.empty()) {
    const double n = static_cast<double>(data.size());
    report.empirical_risk /= n;
    report.surrogate_risk /= n;
    report.margin_term /= n;
  }
  return report;
}

double loss_ce_global(const Scorer& scorer, std::span<const Token> input,
                      const OutputSequence& gt, int max_len, std::size_t cap) {
  std::vector<double> scores;
  for_each_output(
      scorer.extended_size() - 1, max_len,
      [&](const OutputSequence& y) {
        scores.push_back(score_sum(scorer, input, y));
      },
      cap);
  return score_sum(scorer, input, gt) - log_sum_exp(scores);
}

double loss_ce_factorized(const Scorer& scorer, std::span<const Token> input,
                          const OutputSequence& gt) {
  return score_normalized(scorer, input, gt);
}

double loss_hinge(const Scorer& scorer, std::span<const Token> input,
                  const OutputSequence& gt, int max_len, std::size_t cap) {
  const double f_gt = score_sum(scorer, input, gt);
  double worst = 0.0;
  for_each_output(
      scorer.extended_size() - 1, max_len,
      [&](const OutputSequence& y) {
        worst = std::max(worst,
                         f_gt - score_sum(scorer, input, y) + task_loss(gt, y));
      },
      cap);
  return worst;
}

double loss_min_min(const Scorer& scorer, std::span<const Token> input,
                    const OutputSequence& gt, const OutputSequence& yhat) {
  return std::abs(score_sum(scorer, input, gt)) +
         std::abs(task_loss(gt, yhat) - score_sum(scorer, input, yhat));
}

double margin_term(const Scorer& scorer, std::span<const Token> input,
                   const OutputSequence& gt, const OutputSequence& yhat) {
  return std::max(
      score_sum(scorer, input, yhat) - score_sum(scorer, input, gt), 0.0);
}

namespace {

std::vector<double> targets_for(const OptimisticRow& row, int alphabet_size,
                                const TargetOptions& opts) {
  auto t = delta_targets(row, alphabet_size);
  return opts.clip ? clip_terminal(std::move(t), opts.clip_value) : t;
}

// Sum over positions of |delta_alpha(y_j) - delta_o(y_j)|.
double token_errors_along(const Scorer& scorer, std::span<const Token> input,
                          const OutputSequence& gt, const OutputSequence& y,
                          const TargetOptions& opts) {
  if (!y.terminated)
    throw std::invalid_argument("token errors need a terminated sequence");
  const int alphabet_size = scorer.extended_size() - 1;
  OptimisticRow row(gt.content(), alphabet_size);
  Scorer::Step step = scorer.begin(input);
  double total = 0.0;
  for (std::size_t j = 0; j < y.tokens.size(); ++j) {
    const Token c = y.tokens[j];
    const auto targets = targets_for(row, alphabet_size, opts);
    total += std::abs(step.deltas.at(c) - targets[c]);
    if (j + 1 < y.tokens.size()) {
      row = row.extend(c);
      step = scorer.advance(step, c);
    }
  }
  return total;
}

}  // namespace

double loss_ed_min_min(const Scorer& scorer, std::span<const Token> input,
                       const OutputSequence& gt, const OutputSequence& yhat,
                       const TargetOptions& opts) {
  return token_errors_along(scorer, input, gt, gt, opts) +
         token_errors_along(scorer, input, gt, yhat, opts);
}

GreedyTrace greedy_trace(const Scorer& scorer, std::span<const Token> input,
                         const OutputSequence& gt, int max_len,
                         const TargetOptions& opts) {
  if (max_len < 0) throw std::invalid_argument("max_len must be >= 0");
  const int alphabet_size = scorer.extended_size() - 1;
  const Token end = scorer.end();
  GreedyTrace trace;
  trace.yhat.terminated = true;
  OptimisticRow row(gt.content(), alphabet_size);
  Scorer::Step step = scorer.begin(input);
  while (true) {
    GreedyStep g;
    g.deltas = step.deltas;
    g.targets = targets_for(row, alphabet_size, opts);
    g.forced = static_cast<int>(trace.yhat.tokens.size()) == max_len;
    g.chosen = g.forced ? end : argmin(g.deltas);
    g.c_min = g.forced ? end : argmin(g.targets);
    const Token chosen = g.chosen;
    trace.steps.push_back(std::move(g));
    trace.yhat.tokens.push_back(chosen);
    if (chosen == end) break;
    row = row.extend(chosen);
    step = scorer.advance(step, chosen);
  }
  return trace;
}

double loss_ed_greedy(const GreedyTrace& trace) {
  double total = 0.0;
  for (const auto& s : trace.steps)
    total += std::abs(s.deltas[s.chosen] - s.targets[s.chosen]) +
             std::abs(s.deltas[s.c_min]);
  return total;
}

double loss_ed_greedy1(const GreedyTrace& trace) {
  double total = 0.0;
  for (const auto& s : trace.steps)
    for (std::size_t c = 0; c < s.deltas.size(); ++c)
      total += std::abs(s.deltas[c] - s.targets[c]);
  return total;
}

double loss_ed_greedy2(const GreedyTrace& trace) {
  double total = 0.0;
  for (const auto& s : trace.steps)
    for (std::size_t c = 0; c < s.deltas.size(); ++c) {
      const double d = s.deltas[c] - s.targets[c];
      total += d * d;
    }
  return total;
}

double loss_ed_greedy(const Scorer& scorer, std::span<const Token> input,
                      const OutputSequence& gt, int max_len,
                      const TargetOptions& opts) {
  return loss_ed_greedy(greedy_trace(scorer, input, gt, max_len, opts));
}

double loss_ed_greedy1(const Scorer& scorer, std::span<const Token> input,
                       const OutputSequence& gt, int max_len,
                       const TargetOptions& opts) {
  return loss_ed_greedy1(greedy_trace(scorer, input, gt, max_len, opts));
}

double loss_ed_greedy2(const Scorer& scorer, std::span<const Token> input,
                       const OutputSequence& gt, int max_len,
                       const TargetOptions& opts) {
  return loss_ed_greedy2(greedy_trace(scorer, input, gt, max_len, opts));
}

}  // namespace tle
