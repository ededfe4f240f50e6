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

#include "tle/task_loss.h"

#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "tle/seq.h"

namespace tle {
namespace {

// Exponential-time Levenshtein straight from the recursive definition.
int naive_distance(const TokenSeq& a, std::size_t i, const TokenSeq& b, std::size_t j) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  return std::min({naive_distance(a, i + 1, b, j) + 1, naive_distance(a, i, b, j + 1) + 1,
                   naive_distance(a, i + 1, b, j + 1) + (a[i] != b[j])});
}

int naive_distance(const TokenSeq& a, const TokenSeq& b) {
  return naive_distance(a, 0, b, 0);
}

TokenSeq letters(std::string_view s) {
  TokenSeq out;
  for (char ch : s) out.push_back(ch - 'a');
  return out;
}

// Optimistic loss over C' = {a..z}, with end index 26.
constexpr Token kEnd = 26;

OutputSequence gt_of(std::string_view s) { return OutputSequence::terminate(letters(s), kEnd); }

TokenSeq random_seq(std::mt19937_64& rng, int k, int max_len, int min_len = 0) {
  std::uniform_int_distribution<int> len(min_len, max_len), tok(0, k - 1);
  TokenSeq out(len(rng));
  for (Token& t : out) t = tok(rng);
  return out;
}

TEST(EditDistanceTest, Examples) {
  EXPECT_EQ(edit_distance(letters("abc"), letters("abc")), 0);
  EXPECT_EQ(edit_distance(letters(""), letters("abc")), 3);
  EXPECT_EQ(edit_distance(letters("kitten"), letters("sitting")), 3);
  EXPECT_EQ(naive_distance(letters("kitten"), letters("sitting")), 3);
}

TEST(EditDistanceTest, MatchesRecursiveDefinition) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 400; ++trial) {
    const TokenSeq a = random_seq(rng, 3, 7), b = random_seq(rng, 3, 7);
    ASSERT_EQ(edit_distance(a, b), naive_distance(a, b));
  }
}

TEST(EditDistanceTest, MetricProperties) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const TokenSeq a = random_seq(rng, 4, 8), b = random_seq(rng, 4, 8),
                   c = random_seq(rng, 4, 8);
    const int ab = edit_distance(a, b);
    EXPECT_EQ(ab, edit_distance(b, a));
    EXPECT_EQ(ab == 0, a == b);
    EXPECT_LE(edit_distance(a, c), ab + edit_distance(b, c));
    EXPECT_GE(ab, std::abs(static_cast<int>(a.size()) - static_cast<int>(b.size())));
    EXPECT_LE(ab, static_cast<int>(std::max(a.size(), b.size())));
  }
}

TEST(TaskLossTest, Examples) {
  EXPECT_EQ(task_loss(gt_of("abc"), gt_of("abc")), 0);
  EXPECT_EQ(task_loss(gt_of("abc"), gt_of("")), 3);
  EXPECT_EQ(task_loss(gt_of("abc"), gt_of("axc")), 1);
}

TEST(TaskLossTest, RejectsUnterminated) {
  EXPECT_THROW(task_loss(gt_of("abc"), OutputSequence::prefix(letters("abc"))),
               std::invalid_argument);
  EXPECT_THROW(task_loss(OutputSequence::prefix(letters("abc")), gt_of("abc")),
               std::invalid_argument);
}

TEST(OptimisticLossTest, Examples) {
  EXPECT_EQ(optimistic_loss(gt_of("abc"), OutputSequence::prefix({})), 0);
  EXPECT_EQ(optimistic_loss(gt_of("abc"), OutputSequence::prefix(letters("ab"))), 0);
  EXPECT_EQ(optimistic_loss(gt_of("abc"), OutputSequence::prefix(letters("ax"))), 1);
  EXPECT_EQ(row_for(letters("abc"), letters("ax"), kEnd).row(), (std::vector<int>{2, 1, 1, 2}));
  // Terminated prefix: the loss is fixed.
  EXPECT_EQ(optimistic_loss(gt_of("abc"), gt_of("ax")), 2);
}

TEST(OptimisticRowTest, ExtendExamples) {
  const OptimisticRow empty(letters("abc"), kEnd);
  EXPECT_EQ(empty.row(), (std::vector<int>{0, 1, 2, 3}));

  const auto ra = extend_row(empty, 0);
  EXPECT_EQ(ra.row(), (std::vector<int>{1, 0, 1, 2}));
  EXPECT_EQ(ra.min() - empty.min(), 0);

  const auto rb = extend_row(empty, 1);
  EXPECT_EQ(rb.row(), (std::vector<int>{1, 1, 1, 2}));
  EXPECT_EQ(rb.min(), 1);
  EXPECT_EQ(rb.min() - empty.min(), 1);

  const auto a1 = row_for(letters("a"), letters("a"), kEnd);
  EXPECT_EQ(a1.row(), (std::vector<int>{1, 0}));
  const auto a2 = extend_row(a1, 0);
  EXPECT_EQ(a2.row(), (std::vector<int>{2, 1}));
  EXPECT_EQ(a2.min() - a1.min(), 1);
}

TEST(OptimisticRowTest, EndTokenExtensionThrows) {
  const OptimisticRow r(letters("ab"), kEnd);
  EXPECT_THROW(extend_row(r, kEnd), std::invalid_argument);
}

TEST(OptimisticRowTest, IncrementalMatchesFullRecomputation) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const TokenSeq gt = random_seq(rng, 3, 6), prefix = random_seq(rng, 3, 7);
    OptimisticRow r(gt, kEnd);
    for (std::size_t j = 0; j < prefix.size(); ++j) r = extend_row(r, prefix[j]);
    const TokenSeq p(prefix.begin(), prefix.end());
    ASSERT_EQ(r.prefix_len(), static_cast<int>(p.size()));
    for (std::size_t k = 0; k <= gt.size(); ++k) {
      const TokenSeq head(gt.begin(), gt.begin() + k);
      ASSERT_EQ(r.row()[k], naive_distance(p, head));
    }
    // row invariants
    EXPECT_EQ(r.row()[0], r.prefix_len());
    for (std::size_t k = 1; k < r.row().size(); ++k)
      EXPECT_LE(std::abs(r.row()[k] - r.row()[k - 1]), 1);
    EXPECT_EQ(r.min(), *std::min_element(r.row().begin(), r.row().end()));
    EXPECT_EQ(r.full(), edit_distance(p, gt));
  }
}

TEST(DeltaTargetsTest, Examples) {
  const int k = 26;
  auto d = delta_targets(gt_of("abc"), {}, k);
  EXPECT_EQ(d[0], 0);
  EXPECT_EQ(d[1], 1);
  EXPECT_EQ(d[2], 1);
  EXPECT_EQ(d[kEnd], 3);

  d = delta_targets(gt_of("abc"), letters("abc"), k);
  EXPECT_EQ(d[kEnd], 0);

  d = delta_targets(gt_of("a"), letters("b"), k);
  EXPECT_EQ(d[0], 0);
  EXPECT_EQ(d[kEnd], 0);

  // Continuing "ax" towards "abc".
  d = delta_targets(gt_of("abc"), letters("ax"), k);
  EXPECT_EQ(d[0], 1);
  EXPECT_EQ(d[1], 0);
  EXPECT_EQ(d[2], 0);
  EXPECT_EQ(d[kEnd], 1);
}

TEST(DeltaTargetsTest, MatchesBruteForceOracle) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + trial % 3;
    const auto gt = OutputSequence::terminate(random_seq(rng, k, 4), k);
    const TokenSeq prefix = random_seq(rng, k, 4);
    // End index inside the gt is k here, not kEnd.
    const auto d = delta_targets(gt, prefix, k);
    ASSERT_EQ(static_cast<int>(d.size()), k + 1);
    const int max_extra = static_cast<int>(gt.content().size()) + 1;
    const int base = oracle_optimistic_loss(gt, prefix, max_extra, k);
    EXPECT_EQ(base, optimistic_loss(gt, OutputSequence::prefix(prefix)));
    for (int c = 0; c < k; ++c) {
      TokenSeq next = prefix;
      next.push_back(c);
      EXPECT_EQ(d[c], oracle_optimistic_loss(gt, next, max_extra, k) - base);
    }
    TokenSeq closed = prefix;
    EXPECT_EQ(d[k], task_loss(gt, OutputSequence::terminate(closed, k)) - base);
  }
}

TEST(DeltaTargetsTest, RangesAndZeroMinimum) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + trial % 4;
    const auto gt = OutputSequence::terminate(random_seq(rng, k, 6), k);
    const TokenSeq prefix = random_seq(rng, k, 8);
    const auto d = delta_targets(gt, prefix, k);
    for (int c = 0; c < k; ++c) EXPECT_TRUE(d[c] == 0.0 || d[c] == 1.0);
    EXPECT_GE(d[k], 0.0);
    // Some token always keeps the optimistic loss unchanged.
    EXPECT_EQ(*std::min_element(d.begin(), d.end()), 0.0);
  }
}

TEST(DeltaTargetsTest, TelescopesToTaskLoss) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + trial % 3;
    const auto gt = OutputSequence::terminate(random_seq(rng, k, 5), k);
    const auto y = OutputSequence::terminate(random_seq(rng, k, 7), k);
    const auto along = delta_targets_along(gt, y, k);
    ASSERT_EQ(along.size(), y.tokens.size());
    double total = 0;
    for (std::size_t j = 0; j < along.size(); ++j) total += along[j][y.tokens[j]];
    EXPECT_EQ(total, task_loss(gt, y));
  }
  // along gt itself the sum is zero
  const auto gt = gt_of("abca");
  const auto along = delta_targets_along(gt, gt, 26);
  for (std::size_t j = 0; j < along.size(); ++j) EXPECT_EQ(along[j][gt.tokens[j]], 0.0);
}

TEST(ClipTerminalTest, Examples) {
  EXPECT_EQ(clip_terminal({0, 1, 3}, 5).back(), 3);
  EXPECT_EQ(clip_terminal({0, 1, 12}, 5).back(), 5);
  EXPECT_EQ(clip_terminal({0, 1, 0}, 5).back(), 0);
  // other entries are untouched
  EXPECT_EQ(clip_terminal({7, 9, 12}, 5), (std::vector<double>{7, 9, 5}));
  EXPECT_EQ(clip_terminal({0, 1, 12}).back(), 5);
}

TEST(OracleTest, BudgetExceeded) {
  EXPECT_THROW(oracle_optimistic_loss(gt_of("abcdefgh"), {}, 12, 26, 1000), BudgetExceeded);
}

}  // namespace
}  // namespace tle
