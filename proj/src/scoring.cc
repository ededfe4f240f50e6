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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tle/task_loss.h"

namespace tle {
namespace {

struct PrefixState : Scorer::State {
  TokenSeq input;
  TokenSeq prefix;
};

struct TargetState : Scorer::State {
  explicit TargetState(OptimisticRow r) : row(std::move(r)) {}
  OptimisticRow row;
};

}  // namespace

std::vector<double> Scorer::deltas(std::span<const Token> input,
                                   std::span<const Token> prefix) const {
  Step step = begin(input);
  for (Token c : prefix) step = advance(step, c);
  return std::move(step.deltas);
}

Scorer::Step PrefixScorer::begin(std::span<const Token> input) const {
  auto state = std::make_shared<PrefixState>();
  state->input.assign(input.begin(), input.end());
  auto deltas = compute(state->input, state->prefix);
  return {std::move(state), std::move(deltas)};
}

Scorer::Step PrefixScorer::advance(const Step& from, Token c) const {
  const auto& prev = static_cast<const PrefixState&>(*from.state);
  auto state = std::make_shared<PrefixState>(prev);
  state->prefix.push_back(c);
  auto deltas = compute(state->input, state->prefix);
  return {std::move(state), std::move(deltas)};
}

void TabulatedScorer::set(const TokenSeq& input, const TokenSeq& prefix,
                          std::vector<double> deltas) {
  if (static_cast<int>(deltas.size()) != extended_size_)
    throw std::invalid_argument("delta vector size does not match alphabet");
  table_[{input, prefix}] = std::move(deltas);
}

bool TabulatedScorer::contains(const TokenSeq& input,
                               const TokenSeq& prefix) const {
  return table_.count({input, prefix}) != 0;
}

std::vector<double> TabulatedScorer::compute(
    std::span<const Token> input, std::span<const Token> prefix) const {
  auto it = table_.find({TokenSeq(input.begin(), input.end()),
                         TokenSeq(prefix.begin(), prefix.end())});
  if (it == table_.end())
    throw std::out_of_range("prefix of length " +
                            std::to_string(prefix.size()) +
                            " outside the tabulated domain");
  return it->second;
}

TabulatedScorer TabulatedScorer::from_targets(const TokenSeq& input,
                                              const OutputSequence& gt,
                                              int max_len, int alphabet_size) {
  TabulatedScorer table(alphabet_size + 1);
  table.fill_all(input, max_len, [&](const TokenSeq& prefix) {
    return delta_targets(gt, prefix, alphabet_size);
  });
  return table;
}

TargetScorer::TargetScorer(int alphabet_size, const Dataset& data)
    : alphabet_size_(alphabet_size) {
  for (const auto& s : data) gt_.emplace(s.input, s.ground_truth);
}

Scorer::Step TargetScorer::begin(std::span<const Token> input) const {
  auto it = gt_.find(TokenSeq(input.begin(), input.end()));
  if (it == gt_.end())
    throw std::out_of_range("input unknown to the target scorer");
  auto state = std::make_shared<TargetState>(
      OptimisticRow(it->second.content(), alphabet_size_));
  auto deltas = delta_targets(state->row, alphabet_size_);
  return {std::move(state), std::move(deltas)};
}

Scorer::Step TargetScorer::advance(const Step& from, Token c) const {
  const auto& prev = static_cast<const TargetState&>(*from.state);
  auto state = std::make_shared<TargetState>(prev.row.extend(c));
  auto deltas = delta_targets(state->row, alphabet_size_);
  return {std::move(state), std::move(deltas)};
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

int argmin(std::span<const double> v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] < v[best]) best = i;
  return best;
}

namespace {

void require_terminated(const OutputSequence& y, const Scorer& scorer) {
  if (!y.terminated || y.tokens.empty() || y.tokens.back() != scorer.end())
    throw std::invalid_argument("scoring requires a terminated sequence");
}

}  // namespace

double score_sum(const Scorer& scorer, std::span<const Token> input,
                 const OutputSequence& y) {
  require_terminated(y, scorer);
  Scorer::Step step = scorer.begin(input);
  double total = 0.0;
  for (std::size_t j = 0; j < y.tokens.size(); ++j) {
    total += step.deltas.at(y.tokens[j]);
    if (j + 1 < y.tokens.size()) step = scorer.advance(step, y.tokens[j]);
  }
  return total;
}

double score_normalized(const Scorer& scorer, std::span<const Token> input,
                        const OutputSequence& y) {
  require_terminated(y, scorer);
  Scorer::Step step = scorer.begin(input);
  double total = 0.0;
  for (std::size_t j = 0; j < y.tokens.size(); ++j) {
    total += log_sum_exp(step.deltas) - step.deltas.at(y.tokens[j]);
    if (j + 1 < y.tokens.size()) step = scorer.advance(step, y.tokens[j]);
  }
  return total;
}

namespace {

struct WrappedState : Scorer::State {
  Scorer::Step inner;
};

}  // namespace

Scorer::Step NormalizedScorer::wrap(Step inner) const {
  const double lse = log_sum_exp(inner.deltas);
  std::vector<double> nll(inner.deltas.size());
  for (std::size_t c = 0; c < nll.size(); ++c) nll[c] = lse - inner.deltas[c];
  auto st = std::make_shared<WrappedState>();
  st->inner = std::move(inner);
  return {std::move(st), std::move(nll)};
}

Scorer::Step NormalizedScorer::begin(std::span<const Token> input) const {
  return wrap(base_.begin(input));
}

Scorer::Step NormalizedScorer::advance(const Step& from, Token c) const {
  const auto* st = dynamic_cast<const WrappedState*>(from.state.get());
  if (!st) throw std::invalid_argument("state does not belong to this scorer");
  return wrap(base_.advance(st->inner, c));
}

OutputSequence greedy_search(const Scorer& scorer, std::span<const Token> input,
                             int max_len) {
  if (max_len < 0) throw std::invalid_argument("max_len must be >= 0");
  const Token end = scorer.end();
  OutputSequence out{{}, true};
  Scorer::Step step = scorer.begin(input);
  while (static_cast<int>(out.tokens.size()) < max_len) {
    const Token c = argmin(step.deltas);
    if (c == end) break;
    out.tokens.push_back(c);
    step = scorer.advance(step, c);
  }
  out.tokens.push_back(end);
  return out;
}

namespace {

struct Hypothesis {
  TokenSeq prefix;
  double score = 0.0;
  Scorer::Step step;
};

struct Candidate {
  double score;
  int hyp;
  Token token;
};

}  // namespace

OutputSequence beam_search(const Scorer& scorer, std::span<const Token> input,
                           int beam_size, int max_len) {
  if (beam_size < 1) throw std::invalid_argument("beam size must be >= 1");
  if (max_len < 0) throw std::invalid_argument("max_len must be >= 0");
  const Token end = scorer.end();

  std::vector<Hypothesis> active;
  active.push_back({{}, 0.0, scorer.begin(input)});
  // Completed hypotheses in creation order.
  std::vector<std::pair<TokenSeq, double>> completed;
  auto best_completed = [&] {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : completed) best = std::min(best, c.second);
    return best;
  };

  for (int t = 0; !active.empty(); ++t) {
    if (t == max_len) {
      for (auto& h : active) {
        h.prefix.push_back(end);
        completed.emplace_back(std::move(h.prefix), h.score + h.step.deltas[end]);
      }
      break;
    }
    std::vector<Candidate> candidates;
    candidates.reserve(active.size() * scorer.extended_size());
    for (int i = 0; i < static_cast<int>(active.size()); ++i)
      for (Token c = 0; c <= end; ++c)
        candidates.push_back({active[i].score + active[i].step.deltas[c], i, c});
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       return a.score < b.score;
                     });
    if (static_cast<int>(candidates.size()) > beam_size)
      candidates.resize(beam_size);

    std::vector<Hypothesis> next;
    for (const auto& cand : candidates) {
      const Hypothesis& h = active[cand.hyp];
      TokenSeq prefix = h.prefix;
      prefix.push_back(cand.token);
      if (cand.token == end) {
        completed.emplace_back(std::move(prefix), cand.score);
      } else {
        next.push_back(
            {std::move(prefix), cand.score, scorer.advance(h.step, cand.token)});
      }
    }
    active = std::move(next);
    if (!completed.empty()) {
      const double best = best_completed();
      if (std::all_of(active.begin(), active.end(),
                      [&](const Hypothesis& h) { return h.score >= best; }))
        break;
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < completed.size(); ++i)
    if (completed[i].second < completed[best].second) best = i;
  return {std::move(completed[best].first), true};
}

namespace {

struct ExactSearch {
  const Scorer& scorer;
  int max_len;
  Token end;
  TokenSeq prefix;
  TokenSeq best;
  double best_score = std::numeric_limits<double>::infinity();
  bool found = false;

  // Enumeration order: shorter first, then lexicographic.
  bool precedes(const TokenSeq& a, const TokenSeq& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }

  void offer(double score) {
    TokenSeq cand = prefix;
    cand.push_back(end);
    if (!found || score < best_score ||
        (score == best_score && precedes(cand, best))) {
      best = std::move(cand);
      best_score = score;
      found = true;
    }
  }

  void visit(const Scorer::Step& step, double score) {
    offer(score + step.deltas[end]);
    if (static_cast<int>(prefix.size()) == max_len) return;
    for (Token c = 0; c < end; ++c) {
      prefix.push_back(c);
      visit(scorer.advance(step, c), score + step.deltas[c]);
      prefix.pop_back();
    }
  }
};

}  // namespace

OutputSequence exact_search(const Scorer& scorer, std::span<const Token> input,
                            int max_len, std::size_t cap) {
  if (max_len < 0) throw std::invalid_argument("max_len must be >= 0");
  const std::size_t n = count_outputs(scorer.extended_size() - 1, max_len);
  if (n > cap)
    throw BudgetExceeded("exact search over " + std::to_string(n) +
                         " sequences exceeds cap " + std::to_string(cap));
  ExactSearch search{scorer, max_len, scorer.end(), {}, {}};
  search.visit(scorer.begin(input), 0.0);
  return {std::move(search.best), true};
}

}  // namespace tle
