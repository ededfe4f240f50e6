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

#include "tle/verify.h"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "tle/random.h"
#include "tle/surrogate.h"
#include "tle/task_loss.h"

namespace tle {

InstanceGenerator::InstanceGenerator(GeneratorConfig config) : config_(config) {
  if (config_.min_alphabet < 1 || config_.max_alphabet < config_.min_alphabet ||
      config_.min_gt_len < 0 || config_.max_gt_len < config_.min_gt_len ||
      config_.extra_len < 0 || config_.uniform_hi < config_.uniform_lo ||
      config_.noise_scale < 0)
    throw std::invalid_argument("inconsistent generator configuration");
}

Instance InstanceGenerator::make(std::uint64_t trial) const {
  Rng rng(derive_seed(config_.seed, trial));
  Instance inst;
  inst.alphabet_size = uniform_int(rng, config_.min_alphabet, config_.max_alphabet);
  const int len = uniform_int(rng, config_.min_gt_len, config_.max_gt_len);
  TokenSeq gt(len);
  for (Token& t : gt) t = uniform_int(rng, 0, inst.alphabet_size - 1);
  inst.gt = OutputSequence::terminate(gt, inst.alphabet_size);
  inst.input = {0};
  inst.max_len = len + config_.extra_len;

  ScorerDistribution dist = config_.distribution;
  if (dist == ScorerDistribution::kMixed)
    dist = trial % 2 == 0 ? ScorerDistribution::kUniform
                          : ScorerDistribution::kTargetPlusNoise;

  const int K = inst.alphabet_size + 1;
  inst.scorer = TabulatedScorer(K);
  inst.scorer.fill_all(inst.input, inst.max_len, [&](const TokenSeq& prefix) {
    std::vector<double> d(K);
    switch (dist) {
      case ScorerDistribution::kUniform:
        for (double& x : d) x = uniform(rng, config_.uniform_lo, config_.uniform_hi);
        break;
      case ScorerDistribution::kTargetPlusNoise:
        d = delta_targets(inst.gt, prefix, inst.alphabet_size);
        for (double& x : d) x += uniform(rng, -config_.noise_scale, config_.noise_scale);
        break;
      case ScorerDistribution::kPerfect:
      case ScorerDistribution::kMixed:
        d = delta_targets(inst.gt, prefix, inst.alphabet_size);
        break;
    }
    return d;
  });
  return inst;
}

void SlackStats::record(double slack, long trial, double tolerance) {
  ++checks;
  if (slack < -tolerance) ++violations;
  if (slack < min_slack) {
    min_slack = slack;
    worst_trial = trial;
  }
}

SlackStats& ViolationReport::check(const std::string& check_name) {
  for (auto& c : checks)
    if (c.name == check_name) return c;
  checks.push_back({check_name});
  return checks.back();
}

const SlackStats* ViolationReport::find(const std::string& check_name) const {
  for (const auto& c : checks)
    if (c.name == check_name) return &c;
  return nullptr;
}

double ViolationReport::max_violation() const {
  double worst = 0.0;
  for (const auto& c : checks) worst = std::max(worst, c.max_violation());
  return worst;
}

namespace {

using Clock = std::chrono::steady_clock;

ViolationReport start_report(const char* name, const InstanceGenerator& gen,
                             long trials, double tolerance) {
  ViolationReport r;
  r.name = name;
  r.trials = trials;
  r.seed = gen.config().seed;
  r.tolerance = tolerance;
  return r;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Decoded {
  const char* name;
  OutputSequence yhat;
};

std::vector<Decoded> decode_all(const Instance& inst) {
  return {{"greedy", greedy_search(inst.scorer, inst.input, inst.max_len)},
          {"beam4", beam_search(inst.scorer, inst.input, 4, inst.max_len)},
          {"exact", exact_search(inst.scorer, inst.input, inst.max_len)}};
}

}  // namespace

ViolationReport verify_theorem1(const InstanceGenerator& gen, long trials,
                                double tolerance) {
  const auto t0 = Clock::now();
  ViolationReport r = start_report("theorem1", gen, trials, tolerance);
  struct Sums {
    double risk = 0, surrogate = 0, margin = 0;
  };
  Sums sums[3];
  for (long trial = 0; trial < trials; ++trial) {
    const Instance inst = gen.make(trial);
    const double f_gt = score_sum(inst.scorer, inst.input, inst.gt);
    const auto decoded = decode_all(inst);
    for (std::size_t k = 0; k < decoded.size(); ++k) {
      const auto& [name, yhat] = decoded[k];
      const double loss = task_loss(inst.gt, yhat);
      const double f_hat = score_sum(inst.scorer, inst.input, yhat);
      const double min_min = std::abs(f_gt) + std::abs(loss - f_hat);
      const double margin = std::max(f_hat - f_gt, 0.0);
      r.check(std::string("min_min_bound.") + name)
          .record(min_min + margin - loss, trial, tolerance);
      sums[k].risk += loss;
      sums[k].surrogate += min_min;
      sums[k].margin += margin;
      if (k == 2) r.check("exact_margin_zero").record(-margin, trial, tolerance);
    }
  }
  const char* names[3] = {"greedy", "beam4", "exact"};
  for (int k = 0; k < 3; ++k) {
    const double n = std::max<double>(1.0, static_cast<double>(trials));
    r.check(std::string("averaged_bound.") + names[k])
        .record((sums[k].surrogate + sums[k].margin - sums[k].risk) / n, -1,
                tolerance);
  }
  r.seconds = seconds_since(t0);
  return r;
}

ViolationReport verify_theorem2(const InstanceGenerator& gen, long trials,
                                double tolerance) {
  const auto t0 = Clock::now();
  ViolationReport r = start_report("theorem2", gen, trials, tolerance);
  double risk = 0, surrogate = 0;
  for (long trial = 0; trial < trials; ++trial) {
    const Instance inst = gen.make(trial);
    const GreedyTrace trace =
        greedy_trace(inst.scorer, inst.input, inst.gt, inst.max_len);
    const double loss = task_loss(inst.gt, trace.yhat);
    const double bound = loss_ed_greedy(trace);
    r.check("greedy_bound").record(bound - loss, trial, tolerance);

    double telescoped = 0.0;
    for (const auto& s : trace.steps) {
      const double target = s.targets[s.chosen];
      const double step_bound = std::abs(s.deltas[s.chosen] - target) +
                                std::abs(s.deltas[s.c_min]);
      r.check("per_step_bound").record(step_bound - target, trial, tolerance);
      telescoped += target;
    }
    r.check("telescoping").record(-std::abs(telescoped - loss), trial, tolerance);
    risk += loss;
    surrogate += bound;
  }
  r.check("averaged_bound")
      .record((surrogate - risk) / std::max<double>(1.0, static_cast<double>(trials)),
              -1, tolerance);
  r.seconds = seconds_since(t0);
  return r;
}

ViolationReport verify_orderings(const InstanceGenerator& gen, long trials,
                                 double tolerance) {
  const auto t0 = Clock::now();
  ViolationReport r = start_report("orderings", gen, trials, tolerance);
  for (long trial = 0; trial < trials; ++trial) {
    const Instance inst = gen.make(trial);
    for (const auto& [name, yhat] : decode_all(inst)) {
      const double ed = loss_ed_min_min(inst.scorer, inst.input, inst.gt, yhat);
      const double mm = loss_min_min(inst.scorer, inst.input, inst.gt, yhat);
      r.check(std::string("ed_min_min_dominates.") + name)
          .record(ed - mm, trial, tolerance);
    }
    const GreedyTrace trace =
        greedy_trace(inst.scorer, inst.input, inst.gt, inst.max_len);
    r.check("greedy1_dominates_greedy")
        .record(loss_ed_greedy1(trace) - loss_ed_greedy(trace), trial, tolerance);
  }
  r.seconds = seconds_since(t0);
  return r;
}

ViolationReport verify_delta_oracle(const InstanceGenerator& gen, long trials,
                                    double tolerance) {
  const auto t0 = Clock::now();
  ViolationReport r = start_report("delta_oracle", gen, trials, tolerance);
  const auto& cfg = gen.config();
  for (long trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(cfg.seed ^ 0x6f7261636c65ULL, static_cast<std::uint64_t>(trial)));
    const int A = uniform_int(rng, cfg.min_alphabet, cfg.max_alphabet);
    const int len = uniform_int(rng, cfg.min_gt_len, cfg.max_gt_len);
    TokenSeq gt_tokens(len);
    for (Token& t : gt_tokens) t = uniform_int(rng, 0, A - 1);
    const OutputSequence gt = OutputSequence::terminate(gt_tokens, A);

    // A third of prefixes start as a prefix of the ground truth.
    TokenSeq prefix;
    const int plen = uniform_int(rng, 0, len + 2);
    const bool from_gt = uniform_index(rng, 3) == 0;
    for (int i = 0; i < plen; ++i)
      prefix.push_back(from_gt && i < len ? gt_tokens[i] : uniform_int(rng, 0, A - 1));

    const int closed = optimistic_loss(gt, OutputSequence::prefix(prefix));
    const int brute = oracle_optimistic_loss(gt, prefix, len, A);
    r.check("optimistic_equals_oracle")
        .record(-std::abs(static_cast<double>(closed - brute)), trial, tolerance);

    const auto d = delta_targets(gt, prefix, A);
    double range = 0.0;
    for (int c = 0; c < A; ++c)
      range = std::min(range, (d[c] == 0.0 || d[c] == 1.0) ? 0.0 : -1.0);
    r.check("content_delta_in_0_1").record(range, trial, tolerance);
    r.check("terminal_delta_nonnegative").record(d[A], trial, tolerance);

    r.check("terminal_delta_at_empty_prefix")
        .record(-std::abs(delta_targets(gt, {}, A)[A] - len), trial, tolerance);
    r.check("terminal_delta_at_full_prefix")
        .record(-std::abs(delta_targets(gt, gt_tokens, A)[A]), trial, tolerance);

    TokenSeq y_tokens(uniform_int(rng, 0, len + 2));
    for (Token& t : y_tokens) t = uniform_int(rng, 0, A - 1);
    const OutputSequence y = OutputSequence::terminate(y_tokens, A);
    const auto along = delta_targets_along(gt, y, A);
    double telescoped = 0.0;
    for (std::size_t j = 0; j < along.size(); ++j) telescoped += along[j][y.tokens[j]];
    r.check("telescoping")
        .record(-std::abs(telescoped - task_loss(gt, y)), trial, tolerance);
  }
  r.seconds = seconds_since(t0);
  return r;
}

std::string format_report_table(std::span<const ViolationReport> reports) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-14s %-34s %8s %10s %13s %10s\n", "suite",
                "inequality", "checks", "violations", "max_violation",
                "worst_trial");
  out += buf;
  for (const auto& r : reports) {
    for (const auto& c : r.checks) {
      std::snprintf(buf, sizeof buf, "%-14s %-34s %8ld %10ld %13.3e %10ld\n",
                    r.name.c_str(), c.name.c_str(), c.checks, c.violations,
                    c.max_violation(), c.worst_trial);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "%-14s %-34s %s (%.2f s)\n", r.name.c_str(),
                  "=>", r.passed() ? "PASS" : "FAIL", r.seconds);
    out += buf;
  }
  return out;
}

nlohmann::json to_json(const ViolationReport& report) {
  nlohmann::json j;
  j["suite"] = report.name;
  j["trials"] = report.trials;
  j["seed"] = report.seed;
  j["tolerance"] = report.tolerance;
  j["seconds"] = report.seconds;
  j["max_violation"] = report.max_violation();
  j["passed"] = report.passed();
  auto& checks = j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"checks", c.checks},
                      {"violations", c.violations},
                      {"min_slack", c.min_slack},
                      {"max_violation", c.max_violation()},
                      {"worst_trial", c.worst_trial}});
  }
  return j;
}

}  // namespace tle
