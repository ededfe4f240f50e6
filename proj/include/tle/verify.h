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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tle/scoring.h"
#include "tle/seq.h"

namespace tle {

enum class ScorerDistribution {
  /// Alternates uniform and target-plus-noise instances by trial parity.
  kMixed,
  /// Every delta drawn uniformly from [uniform_lo, uniform_hi].
  kUniform,
  /// Optimistic-loss targets plus uniform noise in [-noise_scale, noise_scale].
  kTargetPlusNoise,
  /// Exact optimistic-loss targets.
  kPerfect,
};

struct GeneratorConfig {
  std::uint64_t seed = 20160101;
  int min_alphabet = 2;
  int max_alphabet = 4;
  int min_gt_len = 1;
  int max_gt_len = 5;
  /// Decode length cap is |gt| + extra_len.
  int extra_len = 1;
  ScorerDistribution distribution = ScorerDistribution::kMixed;
  double uniform_lo = -2.0;
  double uniform_hi = 6.0;
  double noise_scale = 0.5;
};

/// A randomized problem with an enumerable output space.
struct Instance {
  int alphabet_size = 0;
  TokenSeq input;
  OutputSequence gt;
  int max_len = 0;
  TabulatedScorer scorer{1};
};

/// Builds instances reproducibly from (seed, trial index) so any failure can
/// be replayed in isolation.
class InstanceGenerator {
 public:
  explicit InstanceGenerator(GeneratorConfig config = {});
  const GeneratorConfig& config() const { return config_; }
  Instance make(std::uint64_t trial) const;

 private:
  GeneratorConfig config_;
};

/// Running extremum of `bound - quantity` for one inequality.
struct SlackStats {
  std::string name;
  long checks = 0;
  long violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  long worst_trial = -1;

  void record(double slack, long trial, double tolerance);
  double max_violation() const { return min_slack < 0 ? -min_slack : 0.0; }
};

struct ViolationReport {
  std::string name;
  long trials = 0;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
  double seconds = 0.0;
  std::vector<SlackStats> checks;

  SlackStats& check(const std::string& name);
  const SlackStats* find(const std::string& name) const;
  double max_violation() const;
  bool passed() const { return max_violation() <= tolerance; }
};

inline constexpr double kVerifyTolerance = 1e-9;

/// Min-min bound under greedy, beam(4) and exact decoding, plus the zero
/// margin of the exact minimizer and the dataset-averaged form.
ViolationReport verify_theorem1(const InstanceGenerator& gen, long trials,
                                double tolerance = kVerifyTolerance);

/// Greedy bound per instance, per decoding step, and averaged, together with
/// the telescoping of targets along the greedy prediction.
ViolationReport verify_theorem2(const InstanceGenerator& gen, long trials,
                                double tolerance = kVerifyTolerance);

/// Token-wise min-min dominates sequence-level min-min; greedy1 dominates
/// greedy.
ViolationReport verify_orderings(const InstanceGenerator& gen, long trials,
                                 double tolerance = kVerifyTolerance);

/// Closed-form optimistic loss against brute-force continuation search,
/// target ranges, and telescoping along random terminated sequences.
ViolationReport verify_delta_oracle(const InstanceGenerator& gen, long trials,
                                    double tolerance = kVerifyTolerance);

std::string format_report_table(std::span<const ViolationReport> reports);
nlohmann::json to_json(const ViolationReport& report);

}  // namespace tle
