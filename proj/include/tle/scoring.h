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

#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "tle/seq.h"

namespace tle {

/// Produces the per-token score vector delta(c, x, prefix) over the extended
/// alphabet. Decoders walk prefixes through opaque, immutable states so that
/// recurrent scorers can extend a prefix in O(1) steps.
class Scorer {
 public:
  class State {
   public:
    virtual ~State() = default;
  };
  using StatePtr = std::shared_ptr<const State>;

  /// A scoring state together with the delta vector for its prefix.
  struct Step {
    StatePtr state;
    std::vector<double> deltas;
  };

  virtual ~Scorer() = default;

  /// Size of the extended alphabet; the end token is extended_size() - 1.
  virtual int extended_size() const = 0;
  /// State for the empty prefix of `input`.
  virtual Step begin(std::span<const Token> input) const = 0;
  /// State for the prefix of `from` followed by content token `c`.
  virtual Step advance(const Step& from, Token c) const = 0;

  Token end() const { return extended_size() - 1; }

  /// Deltas for an explicit prefix, walked from begin().
  std::vector<double> deltas(std::span<const Token> input,
                             std::span<const Token> prefix) const;
};

/// Scorer whose deltas are a pure function of (input, prefix); the state is
/// just the prefix itself.
class PrefixScorer : public Scorer {
 public:
  Step begin(std::span<const Token> input) const override;
  Step advance(const Step& from, Token c) const override;

 protected:
  virtual std::vector<double> compute(std::span<const Token> input,
                                      std::span<const Token> prefix) const = 0;
};

/// Explicit table from (input, prefix) to delta vectors. Lookups outside the
/// declared domain throw std::out_of_range.
class TabulatedScorer : public PrefixScorer {
 public:
  explicit TabulatedScorer(int extended_size) : extended_size_(extended_size) {}

  int extended_size() const override { return extended_size_; }

  void set(const TokenSeq& input, const TokenSeq& prefix,
           std::vector<double> deltas);
  bool contains(const TokenSeq& input, const TokenSeq& prefix) const;
  std::size_t entries() const { return table_.size(); }

  /// Fills every prefix of length <= max_len for `input` by calling
  /// `fill(prefix)`.
  template <typename Fill>
  void fill_all(const TokenSeq& input, int max_len, Fill&& fill);

  /// Table whose entries are the unclipped optimistic-loss increments of `gt`
  /// for every prefix up to `max_len`.
  static TabulatedScorer from_targets(const TokenSeq& input,
                                      const OutputSequence& gt, int max_len,
                                      int alphabet_size);

 protected:
  std::vector<double> compute(std::span<const Token> input,
                              std::span<const Token> prefix) const override;

 private:
  int extended_size_;
  std::map<std::pair<TokenSeq, TokenSeq>, std::vector<double>> table_;
};

/// Scorer that returns the exact optimistic-loss increments of each input's
/// ground truth, computed on demand. Behaves like a perfectly trained model.
class TargetScorer : public Scorer {
 public:
  TargetScorer(int alphabet_size, const Dataset& data);

  int extended_size() const override { return alphabet_size_ + 1; }
  Step begin(std::span<const Token> input) const override;
  Step advance(const Step& from, Token c) const override;

 private:
  int alphabet_size_;
  std::map<TokenSeq, OutputSequence> gt_;
};

/// How per-step vectors combine into a sequence score: the plain sum of
/// deltas, or the sum of -log softmax(deltas).
enum class ScoreMode { kSum, kNormalized };

/// Presents -log softmax(base deltas) as the step vector, so that decoders
/// minimizing it follow the most probable tokens of a softmax-trained model.
class NormalizedScorer : public Scorer {
 public:
  explicit NormalizedScorer(const Scorer& base) : base_(base) {}

  int extended_size() const override { return base_.extended_size(); }
  Step begin(std::span<const Token> input) const override;
  Step advance(const Step& from, Token c) const override;

 private:
  Step wrap(Step inner) const;

  const Scorer& base_;
};

/// Sum of deltas along a terminated sequence. Throws std::invalid_argument on
/// unterminated input.
double score_sum(const Scorer& scorer, std::span<const Token> input,
                 const OutputSequence& y);

/// Sum of per-token negative log-softmax of the deltas along y.
double score_normalized(const Scorer& scorer, std::span<const Token> input,
                        const OutputSequence& y);

/// Numerically stable log(sum(exp(v))).
double log_sum_exp(std::span<const double> v);

/// Index of the smallest entry; ties go to the lowest index.
int argmin(std::span<const double> v);

OutputSequence greedy_search(const Scorer& scorer, std::span<const Token> input,
                             int max_len);

OutputSequence beam_search(const Scorer& scorer, std::span<const Token> input,
                           int beam_size, int max_len);

/// Minimum of score_sum over every output with at most max_len content
/// tokens; ties resolve to the earliest sequence in enumeration order.
OutputSequence exact_search(const Scorer& scorer, std::span<const Token> input,
                            int max_len,
                            std::size_t cap = kDefaultEnumerationCap);

template <typename Fill>
void TabulatedScorer::fill_all(const TokenSeq& input, int max_len,
                               Fill&& fill) {
  const int alphabet_size = extended_size_ - 1;
  for (int len = 0; len <= max_len; ++len) {
    TokenSeq prefix(len, 0);
    while (true) {
      set(input, prefix, fill(std::as_const(prefix)));
      int pos = len - 1;
      while (pos >= 0 && ++prefix[pos] == alphabet_size) prefix[pos--] = 0;
      if (pos < 0) break;
    }
  }
}

}  // namespace tle
