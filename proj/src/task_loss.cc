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
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tle {

int edit_distance(std::span<const Token> a, std::span<const Token> b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

int task_loss(const OutputSequence& gt, const OutputSequence& y) {
  if (!gt.terminated || !y.terminated)
    throw std::invalid_argument("task_loss requires terminated sequences");
  return edit_distance(gt.content(), y.content());
}

OptimisticRow::OptimisticRow(std::span<const Token> gt_content, Token end)
    : gt_(gt_content.begin(), gt_content.end()), end_(end) {
  row_.resize(gt_.size() + 1);
  std::iota(row_.begin(), row_.end(), 0);
  min_ = 0;
}

OptimisticRow OptimisticRow::extend(Token c) const {
  if (c == end_)
    throw std::invalid_argument("cannot extend an optimistic row by the end token");
  OptimisticRow next;
  next.gt_ = gt_;
  next.end_ = end_;
  next.prefix_len_ = prefix_len_ + 1;
  next.row_.resize(row_.size());
  next.row_[0] = next.prefix_len_;
  for (std::size_t k = 1; k < row_.size(); ++k) {
    const int sub = row_[k - 1] + (gt_[k - 1] == c ? 0 : 1);
    next.row_[k] = std::min({sub, row_[k] + 1, next.row_[k - 1] + 1});
  }
  next.min_ = *std::min_element(next.row_.begin(), next.row_.end());
  return next;
}

OptimisticRow extend_row(const OptimisticRow& r, Token c) { return r.extend(c); }

OptimisticRow row_for(std::span<const Token> gt_content,
                      std::span<const Token> prefix, Token end) {
  OptimisticRow row(gt_content, end);
  for (Token c : prefix) row = row.extend(c);
  return row;
}

int optimistic_loss(const OutputSequence& gt, const OutputSequence& prefix) {
  if (!gt.terminated)
    throw std::invalid_argument("ground truth must be terminated");
  if (prefix.terminated) return task_loss(gt, prefix);
  return row_for(gt.content(), prefix.tokens, gt.tokens.back()).min();
}

std::vector<double> delta_targets(const OptimisticRow& row,
                                  int alphabet_size) {
  std::vector<double> out(alphabet_size + 1);
  for (Token c = 0; c < alphabet_size; ++c)
    out[c] = row.extend(c).min() - row.min();
  out[alphabet_size] = row.full() - row.min();
  return out;
}

std::vector<double> delta_targets(const OutputSequence& gt,
                                  std::span<const Token> prefix,
                                  int alphabet_size) {
  return delta_targets(row_for(gt.content(), prefix, alphabet_size),
                       alphabet_size);
}

std::vector<std::vector<double>> delta_targets_along(const OutputSequence& gt,
                                                     const OutputSequence& y,
                                                     int alphabet_size) {
  if (!y.terminated)
    throw std::invalid_argument("targets along an unterminated sequence");
  std::vector<std::vector<double>> out;
  out.reserve(y.tokens.size());
  OptimisticRow row(gt.content(), alphabet_size);
  for (std::size_t j = 0; j < y.tokens.size(); ++j) {
    out.push_back(delta_targets(row, alphabet_size));
    if (j + 1 < y.tokens.size()) row = row.extend(y.tokens[j]);
  }
  return out;
}

std::vector<double> clip_terminal(std::vector<double> targets,
                                  double clip_value) {
  if (!targets.empty())
    targets.back() = std::min(targets.back(), clip_value);
  return targets;
}

int oracle_optimistic_loss(const OutputSequence& gt,
                           std::span<const Token> prefix, int max_extra,
                           int alphabet_size, std::size_t cap) {
  int best = std::numeric_limits<int>::max();
  TokenSeq candidate;
  for_each_output(
      alphabet_size, max_extra,
      [&](const OutputSequence& z) {
        candidate.assign(prefix.begin(), prefix.end());
        const auto zc = z.content();
        candidate.insert(candidate.end(), zc.begin(), zc.end());
        best = std::min(best, edit_distance(gt.content(), candidate));
      },
      cap);
  return best;
}

}  // namespace tle
