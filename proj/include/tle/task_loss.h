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

#include "tle/seq.h"

namespace tle {

/// Levenshtein distance (unit-cost insert, delete, substitute).
int edit_distance(std::span<const Token> a, std::span<const Token> b);

/// Edit distance between the contents of two terminated sequences. Throws
/// std::invalid_argument if either is unterminated.
int task_loss(const OutputSequence& gt, const OutputSequence& y);

/// Edit-distance DP row of a prefix against every prefix of the ground
/// truth: row[k] = distance(prefix, gt[0..k)). The optimistic loss of the
/// prefix is the row minimum; extending by one content token costs O(|gt|).
class OptimisticRow {
 public:
  /// Row for the empty prefix. `end` is the terminator index, which may not
  /// be used to extend the row.
  OptimisticRow(std::span<const Token> gt_content, Token end);

  [[nodiscard]] OptimisticRow extend(Token c) const;

  const std::vector<int>& row() const { return row_; }
  int prefix_len() const { return prefix_len_; }
  int min() const { return min_; }
  /// Distance from the prefix to the whole ground truth.
  int full() const { return row_.back(); }

 private:
  OptimisticRow() = default;

  TokenSeq gt_;
  Token end_ = 0;
  std::vector<int> row_;
  int prefix_len_ = 0;
  int min_ = 0;
};

/// Incremental DP extension; throws std::invalid_argument on the end token.
OptimisticRow extend_row(const OptimisticRow& r, Token c);

/// Row for an arbitrary prefix, built from the empty row.
OptimisticRow row_for(std::span<const Token> gt_content,
                      std::span<const Token> prefix, Token end);

/// Lowest task loss reachable by completing `prefix`; equals task_loss when
/// `prefix` is already terminated.
int optimistic_loss(const OutputSequence& gt, const OutputSequence& prefix);

/// Unclipped increments of the optimistic loss over the extended alphabet for
/// the given content prefix. Entry `end` holds distance(prefix, gt) - min(row).
std::vector<double> delta_targets(const OutputSequence& gt,
                                  std::span<const Token> prefix,
                                  int alphabet_size);
std::vector<double> delta_targets(const OptimisticRow& row, int alphabet_size);

/// Per-position targets along a terminated sequence y: entry j is the delta
/// vector for the prefix y[0..j).
std::vector<std::vector<double>> delta_targets_along(const OutputSequence& gt,
                                                     const OutputSequence& y,
                                                     int alphabet_size);

inline constexpr double kDefaultTerminalClip = 5.0;

/// Replaces the end-token entry by min(entry, clip_value).
std::vector<double> clip_terminal(std::vector<double> targets,
                                  double clip_value = kDefaultTerminalClip);

/// Brute force minimum over every continuation z with |z| <= max_extra of
/// task_loss(gt, prefix z $). Throws BudgetExceeded beyond `cap` candidates.
int oracle_optimistic_loss(const OutputSequence& gt,
                           std::span<const Token> prefix, int max_extra,
                           int alphabet_size,
                           std::size_t cap = kDefaultEnumerationCap);

}  // namespace tle
