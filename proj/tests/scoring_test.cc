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

#include "tle/scoring.h"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "tle/seq.h"
#include "tle/task_loss.h"

namespace tle {
namespace {

const TokenSeq kInput = {0};

// Random table over every prefix up to max_len.
TabulatedScorer random_table(int k, int max_len, std::mt19937_64& rng, double lo = -1,
                             double hi = 1) {
  TabulatedScorer t(k + 1);
  std::uniform_real_distribution<double> u(lo, hi);
  t.fill_all(kInput, max_len, [&](const TokenSeq&) {
    std::vector<double> d(k + 1);
    for (double& x : d) x = u(rng);
    return d;
  });
  return t;
}

class ConstantScorer : public PrefixScorer {
 public:
  ConstantScorer(std::vector<double> d) : d_(std::move(d)) {}
  int extended_size() const override { return static_cast<int>(d_.size()); }

 protected:
  std::vector<double> compute(std::span<const Token>, std::span<const Token>) const override {
    return d_;
  }

 private:
  std::vector<double> d_;
};

// Reference: independent score of y by direct table lookups.
double lookup_sum(const TabulatedScorer& t, const OutputSequence& y) {
  double s = 0;
  for (std::size_t j = 0; j < y.tokens.size(); ++j)
    s += t.deltas(kInput, std::span<const Token>(y.tokens).first(j))[y.tokens[j]];
  return s;
}

// Reference exact decoder: first minimum in enumeration order.
OutputSequence brute_force_min(const Scorer& s, int k, int max_len) {
  OutputSequence best;
  double best_score = std::numeric_limits<double>::infinity();
  for_each_output(k, max_len, [&](const OutputSequence& y) {
    const double f = score_sum(s, kInput, y);
    if (f < best_score) {
      best_score = f;
      best = y;
    }
  });
  return best;
}

TEST(ScoreSumTest, Examples) {
  const ConstantScorer zero({0, 0, 0});
  EXPECT_EQ(score_sum(zero, kInput, OutputSequence::terminate(TokenSeq{0, 1}, 2)), 0.0);

  const auto gt = OutputSequence::terminate(TokenSeq{0, 1}, 2);
  const auto perfect = TabulatedScorer::from_targets(kInput, gt, 4, 2);
  EXPECT_EQ(score_sum(perfect, kInput, gt), 0.0);
  EXPECT_EQ(score_sum(perfect, kInput, OutputSequence::terminate(TokenSeq{}, 2)), 2.0);

  std::mt19937_64 rng(1);
  const auto t = random_table(3, 3, rng);
  const auto y = OutputSequence::terminate(TokenSeq{2, 0}, 3);
  const double expect = t.deltas(kInput, TokenSeq{})[2] + t.deltas(kInput, TokenSeq{2})[0] +
                        t.deltas(kInput, TokenSeq{2, 0})[3];
  EXPECT_DOUBLE_EQ(score_sum(t, kInput, y), expect);
}

TEST(ScoreSumTest, RejectsUnterminated) {
  const ConstantScorer zero({0, 0});
  EXPECT_THROW(score_sum(zero, kInput, OutputSequence::prefix({0})), std::invalid_argument);
}

TEST(ScoreNormalizedTest, Examples) {
  const ConstantScorer uniform({0.7, 0.7, 0.7});
  EXPECT_NEAR(score_normalized(uniform, kInput, OutputSequence::terminate(TokenSeq{1}, 2)),
              2 * std::log(3.0), 1e-12);
  const ConstantScorer single({3.0});
  EXPECT_NEAR(score_normalized(single, kInput, OutputSequence::terminate(TokenSeq{}, 0)), 0.0,
              1e-15);
}

TEST(ScoreNormalizedTest, MatchesNaiveSoftmax) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = random_table(3, 4, rng, -3, 3);
    const auto y = OutputSequence::terminate(TokenSeq{static_cast<int>(trial % 3), 1, 2}, 3);
    double naive = 0;
    for (std::size_t j = 0; j < y.tokens.size(); ++j) {
      const auto d = t.deltas(kInput, std::span<const Token>(y.tokens).first(j));
      double z = 0;
      for (double v : d) z += std::exp(v);
      naive += -std::log(std::exp(d[y.tokens[j]]) / z);
    }
    EXPECT_NEAR(score_normalized(t, kInput, y), naive, 1e-12);
  }
}

TEST(LogSumExpTest, StableAndExact) {
  EXPECT_NEAR(log_sum_exp(std::vector<double>{0, 0}), std::log(2.0), 1e-15);
  EXPECT_NEAR(log_sum_exp(std::vector<double>{1000, 1000}), 1000 + std::log(2.0), 1e-12);
  EXPECT_NEAR(log_sum_exp(std::vector<double>{-1000, -1000}), -1000 + std::log(2.0), 1e-12);
}

TEST(ArgminTest, LowestIndexWinsTies) {
  EXPECT_EQ(argmin(std::vector<double>{1, 0, 0}), 1);
  EXPECT_EQ(argmin(std::vector<double>{0, 0, 0}), 0);
  EXPECT_EQ(argmin(std::vector<double>{3, 2, 1}), 2);
}

TEST(TabulatedScorerTest, OutOfDomainThrows) {
  std::mt19937_64 rng(3);
  const auto t = random_table(2, 2, rng);
  EXPECT_EQ(t.entries(), count_outputs(2, 2));
  EXPECT_NO_THROW(t.deltas(kInput, TokenSeq{1, 1}));
  EXPECT_THROW(t.deltas(kInput, TokenSeq{1, 1, 1}), std::out_of_range);
  EXPECT_THROW(t.deltas(TokenSeq{1}, TokenSeq{}), std::out_of_range);
}

TEST(NormalizedScorerTest, StepsAreNegativeLogSoftmax) {
  std::mt19937_64 rng(4);
  const auto t = random_table(3, 3, rng, -2, 2);
  const NormalizedScorer n(t);
  const auto y = OutputSequence::terminate(TokenSeq{1, 2}, 3);
  EXPECT_NEAR(score_sum(n, kInput, y), score_normalized(t, kInput, y), 1e-12);
  // most probable token = largest raw delta
  const auto raw = t.deltas(kInput, TokenSeq{});
  const auto nll = n.deltas(kInput, TokenSeq{});
  EXPECT_EQ(argmin(nll),
            static_cast<int>(std::max_element(raw.begin(), raw.end()) - raw.begin()));
}

TEST(GreedySearchTest, Examples) {
  const auto gt = OutputSequence::terminate(TokenSeq{0, 1, 2}, 3);
  const auto perfect = TabulatedScorer::from_targets(kInput, gt, 5, 3);
  EXPECT_EQ(greedy_search(perfect, kInput, 5), gt);

  TabulatedScorer stop(3);
  stop.set(kInput, {}, {0.5, 0.0, -1.0});
  EXPECT_EQ(greedy_search(stop, kInput, 4), OutputSequence::terminate(TokenSeq{}, 2));

  const ConstantScorer never({0.0, 1.0, 2.0});
  EXPECT_EQ(greedy_search(never, kInput, 2), OutputSequence::terminate(TokenSeq{0, 0}, 2));
  EXPECT_EQ(greedy_search(never, kInput, 0), OutputSequence::terminate(TokenSeq{}, 2));
}

TEST(BeamSearchTest, BeamOneIsGreedy) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + trial % 3;
    const auto t = random_table(k, 4, rng);
    ASSERT_EQ(beam_search(t, kInput, 1, 4), greedy_search(t, kInput, 4));
  }
}

TEST(BeamSearchTest, WideBeamMatchesExactOnNonnegativeScores) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = random_table(2, 3, rng, 0, 2);
    const auto exact = exact_search(t, kInput, 3);
    const auto beam = beam_search(t, kInput, 64, 3);
    ASSERT_NEAR(score_sum(t, kInput, beam), score_sum(t, kInput, exact), 1e-12);
  }
}

TEST(BeamSearchTest, ScoreOrderingAgainstEnumeration) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + trial % 2;
    const auto t = random_table(k, 3, rng);
    const double fe = score_sum(t, kInput, exact_search(t, kInput, 3));
    for (int b : {1, 2, 4}) {
      const auto y = beam_search(t, kInput, b, 3);
      const double fb = score_sum(t, kInput, y);
      EXPECT_LE(fe, fb + 1e-12);
      EXPECT_NEAR(fb, lookup_sum(t, y), 1e-12);
    }
  }
}

TEST(BeamSearchTest, PerfectScorerReturnsGroundTruth) {
  const auto gt = OutputSequence::terminate(TokenSeq{1, 0, 1}, 2);
  const auto perfect = TabulatedScorer::from_targets(kInput, gt, 5, 2);
  for (int b : {1, 2, 5, 16}) {
    const auto y = beam_search(perfect, kInput, b, 5);
    EXPECT_EQ(y, gt) << "beam " << b;
    EXPECT_EQ(score_sum(perfect, kInput, y), 0.0);
  }
  EXPECT_EQ(exact_search(perfect, kInput, 5), gt);
}

TEST(BeamSearchTest, ForcedTerminationAtCap) {
  const ConstantScorer never({-0.1, 1.0, 2.0});
  EXPECT_EQ(beam_search(never, kInput, 3, 2), OutputSequence::terminate(TokenSeq{0, 0}, 2));
  // "$" and "aa$" tie; the earlier hypothesis wins
  const ConstantScorer tie({0.0, 1.0, 2.0});
  EXPECT_EQ(beam_search(tie, kInput, 3, 2), OutputSequence::terminate(TokenSeq{}, 2));
}

TEST(ExactSearchTest, Examples) {
  const ConstantScorer zero({0, 0, 0});
  EXPECT_EQ(exact_search(zero, kInput, 3), OutputSequence::terminate(TokenSeq{}, 2));
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = random_table(2, 3, rng);
    ASSERT_EQ(count_outputs(2, 3), 15u);
    ASSERT_EQ(exact_search(t, kInput, 3), brute_force_min(t, 2, 3));
  }
}

TEST(ExactSearchTest, BudgetExceeded) {
  const ConstantScorer zero({0, 0, 0, 0, 0});
  EXPECT_THROW(exact_search(zero, kInput, 12, 1000), BudgetExceeded);
}

TEST(TargetScorerTest, MatchesTabulatedTargets) {
  const auto gt = OutputSequence::terminate(TokenSeq{2, 0, 1}, 3);
  const Dataset data = {{kInput, gt}};
  const TargetScorer lazy(3, data);
  const auto table = TabulatedScorer::from_targets(kInput, gt, 4, 3);
  for_each_output(3, 3, [&](const OutputSequence& y) {
    const auto p = y.content();
    EXPECT_EQ(lazy.deltas(kInput, p), table.deltas(kInput, p));
  });
  EXPECT_THROW(lazy.begin(TokenSeq{1, 1}), std::out_of_range);
}

}  // namespace
}  // namespace tle
