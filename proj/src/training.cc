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

#include "tle/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <thread>

#include "tle/random.h"
#include "tle/surrogate.h"
#include "tle/task_loss.h"

namespace tle {

const char* loss_kind_name(LossKind kind) {
  return kind == LossKind::kTle ? "tle" : "ce";
}

void TrainConfig::validate() const {
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (!(learning_rate > 0) || !(epsilon > 0) || !(grad_clip > 0) ||
      !(clip_value > 0))
    throw std::invalid_argument(
        "learning_rate, epsilon, grad_clip and clip_value must be positive");
  if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1))
    throw std::invalid_argument("Adam decay rates must lie in (0, 1)");
  if (max_epochs < 0) throw std::invalid_argument("max_epochs must be >= 0");
  if (patience <= 0) throw std::invalid_argument("patience must be positive");
  if (eval_threads <= 0) throw std::invalid_argument("eval_threads must be positive");
  if (eval_beams.empty()) throw std::invalid_argument("eval_beams is empty");
  for (int b : eval_beams)
    if (b <= 0) throw std::invalid_argument("beam sizes must be positive");
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

Manifest TrainConfig::to_manifest() const {
  std::string beams;
  for (std::size_t i = 0; i < eval_beams.size(); ++i)
    beams += (i ? "," : "") + std::to_string(eval_beams[i]);
  return {{"train.batch_size", std::to_string(batch_size)},
          {"train.learning_rate", fmt_double(learning_rate)},
          {"train.beta1", fmt_double(beta1)},
          {"train.beta2", fmt_double(beta2)},
          {"train.epsilon", fmt_double(epsilon)},
          {"train.grad_clip", fmt_double(grad_clip)},
          {"train.max_epochs", std::to_string(max_epochs)},
          {"train.patience", std::to_string(patience)},
          {"train.clip_value", fmt_double(clip_value)},
          {"train.eval_beams", beams},
          {"train.seed", std::to_string(seed)},
          {"train.verify_bounds", verify_bounds ? "true" : "false"}};
}

std::string format_metrics_row(const MetricsReport& m) {
  return std::to_string(m.epoch) + "," + m.split + "," + std::to_string(m.beam) +
         "," + fmt_fixed(m.ter) + "," + fmt_fixed(m.ser) + "," +
         fmt_fixed(m.loss_ce) + "," + fmt_fixed(m.loss_greedy2) + "," +
         fmt_fixed(m.seconds);
}

ScoreMode decode_mode(LossKind loss) {
  return loss == LossKind::kCe ? ScoreMode::kNormalized : ScoreMode::kSum;
}

int training_length_cap(const SamplePair& sample) {
  return 2 * static_cast<int>(sample.ground_truth.content().size()) + 5;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct SampleEval {
  std::vector<int> distance;  // per beam
  int ref_len = 0;
  double loss_ce = 0.0;
  double loss_greedy2 = 0.0;
  double loss_ed_greedy = 0.0;
};

SampleEval evaluate_sample(const Scorer& scorer, const SamplePair& s,
                           const std::vector<int>& beams, const EvalOptions& opts) {
  SampleEval out;
  const int cap = 2 * static_cast<int>(s.input.size()) + 5;
  const NormalizedScorer normalized(scorer);
  const Scorer& decoder =
      opts.decode == ScoreMode::kNormalized ? static_cast<const Scorer&>(normalized) : scorer;
  GreedyTrace trace = greedy_trace(scorer, s.input, s.ground_truth, cap);
  out.loss_ed_greedy = loss_ed_greedy(trace);
  const int greedy_distance =
      opts.decode == ScoreMode::kSum
          ? task_loss(s.ground_truth, trace.yhat)
          : task_loss(s.ground_truth, greedy_search(decoder, s.input, cap));
  for (auto& step : trace.steps)
    step.targets = clip_terminal(std::move(step.targets), opts.clip_value);
  out.loss_greedy2 = loss_ed_greedy2(trace);
  out.loss_ce = loss_ce_factorized(scorer, s.input, s.ground_truth);
  out.ref_len = static_cast<int>(s.ground_truth.content().size());
  for (int b : beams) {
    out.distance.push_back(
        b == 1 ? greedy_distance
               : task_loss(s.ground_truth, beam_search(decoder, s.input, b, cap)));
  }
  return out;
}

}  // namespace

std::vector<MetricsReport> evaluate(const Scorer& scorer, const Dataset& data,
                                    const std::vector<int>& beams,
                                    const EvalOptions& opts) {
  if (data.empty()) throw std::invalid_argument("cannot evaluate an empty dataset");
  for (int b : beams)
    if (b <= 0) throw std::invalid_argument("beam sizes must be positive");
  std::vector<SampleEval> per(data.size());
  const int threads =
      std::max(1, std::min<int>(opts.threads, static_cast<int>(data.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < data.size(); ++i)
      per[i] = evaluate_sample(scorer, data[i], beams, opts);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < data.size(); i += threads)
          per[i] = evaluate_sample(scorer, data[i], beams, opts);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<MetricsReport> reports(beams.size());
  const double n = std::max<double>(1.0, static_cast<double>(data.size()));
  double ref_total = 0, ce = 0, g2 = 0, edg = 0;
  for (const auto& s : per) {
    ref_total += s.ref_len;
    ce += s.loss_ce;
    g2 += s.loss_greedy2;
    edg += s.loss_ed_greedy;
  }
  for (std::size_t k = 0; k < beams.size(); ++k) {
    MetricsReport& r = reports[k];
    r.beam = beams[k];
    double dist = 0, wrong = 0;
    for (const auto& s : per) {
      dist += s.distance[k];
      wrong += s.distance[k] > 0 ? 1 : 0;
    }
    r.ter = ref_total > 0 ? dist / ref_total : dist;
    r.ser = wrong / n;
    r.mean_task_loss = dist / n;
    r.loss_ce = ce / n;
    r.loss_greedy2 = g2 / n;
    r.loss_ed_greedy = edg / n;
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Objectives

namespace {

Var squared_error(Tape& tape, Var deltas, std::vector<double> targets) {
  return sum(square(sub(deltas, tape.constant(Tensor::row(std::move(targets))))));
}

Var accumulate(Var total, Var term) {
  return total.tape() ? add(total, term) : term;
}

}  // namespace

Var tle_sample_loss(NeuralScorer::Graph& graph, const SamplePair& sample,
                    double clip_value, OutputSequence* yhat) {
  Tape& tape = graph.tape();
  const auto& gt = sample.ground_truth;
  const int alphabet_size = gt.tokens.back();
  const Token end = alphabet_size;
  const int cap = training_length_cap(sample);

  auto ctx = graph.start(graph.encode(sample.input));
  OptimisticRow row(gt.content(), end);
  Var state = ctx.initial_state;
  Var total;
  Token prev = -1;
  OutputSequence pred{{}, true};
  while (true) {
    state = graph.step(ctx, state, prev);
    Var d = graph.deltas(state);
    total = accumulate(total, squared_error(tape, d,
                                            clip_terminal(delta_targets(row, alphabet_size),
                                                          clip_value)));
    const Token chosen = static_cast<int>(pred.tokens.size()) == cap
                             ? end
                             : argmin(d.value().values());
    pred.tokens.push_back(chosen);
    if (chosen == end) break;
    row = row.extend(chosen);
    prev = chosen;
  }
  if (yhat) *yhat = std::move(pred);
  return total;
}

Var tle_loss_along(NeuralScorer::Graph& graph, const SamplePair& sample,
                   const OutputSequence& yhat, double clip_value) {
  Tape& tape = graph.tape();
  const auto& gt = sample.ground_truth;
  const int alphabet_size = gt.tokens.back();
  const auto targets = delta_targets_along(gt, yhat, alphabet_size);
  auto ctx = graph.start(graph.encode(sample.input));
  Var state = ctx.initial_state;
  Var total;
  Token prev = -1;
  for (std::size_t j = 0; j < yhat.tokens.size(); ++j) {
    state = graph.step(ctx, state, prev);
    total = accumulate(total, squared_error(tape, graph.deltas(state),
                                            clip_terminal(targets[j], clip_value)));
    prev = yhat.tokens[j];
  }
  return total;
}

Var ce_sample_loss(NeuralScorer::Graph& graph, const SamplePair& sample) {
  Tape& tape = graph.tape();
  const auto& gt = sample.ground_truth;
  auto ctx = graph.start(graph.encode(sample.input));
  Var state = ctx.initial_state;
  Var total;
  Token prev = -1;
  for (Token y : gt.tokens) {
    state = graph.step(ctx, state, prev);
    Var d = graph.deltas(state);
    Tensor pick({d.value().cols(), 1});
    pick[y] = 1.0;
    total = accumulate(total, sub(log_sum_exp(d), matmul(d, tape.constant(std::move(pick)))));
    prev = y;
  }
  return sum(total);
}

// ---------------------------------------------------------------------------
// Training loop

TrainHistory train(LossKind loss, NeuralScorer& model, const Dataset& train_set,
                   const Dataset& valid, const TrainConfig& config,
                   const TrainCallbacks& callbacks) {
  config.validate();
  if (train_set.empty() || valid.empty())
    throw std::invalid_argument("training and validation sets must be non-empty");
  for (const auto& s : train_set)
    if (s.ground_truth.tokens.back() != model.config().output_size - 1)
      throw std::invalid_argument("dataset alphabet does not match the model");

  TrainHistory history;
  history.loss = loss;
  if (config.max_epochs == 0) return history;

  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  auto elapsed = [&] {
    return config.record_wall_clock
               ? std::chrono::duration<double>(Clock::now() - started).count()
               : 0.0;
  };

  Adam adam({config.learning_rate, config.beta1, config.beta2, config.epsilon});
  ParameterSet best = model.params();
  history.best_criterion = std::numeric_limits<double>::infinity();
  int since_improvement = 0;
  const EvalOptions eval_opts{config.clip_value, config.eval_threads, decode_mode(loss)};

  std::vector<std::size_t> order(train_set.size());
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    shuffle(order, rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double inv = 1.0 / static_cast<double>(stop - start);
      model.params().zero_grad();
      double batch_loss = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const SamplePair& sample = train_set[order[k]];
        Tape tape;
        NeuralScorer::Graph graph(tape, model);
        Var l = loss == LossKind::kTle
                    ? tle_sample_loss(graph, sample, config.clip_value)
                    : ce_sample_loss(graph, sample);
        tape.backward(scale(l, inv));
        batch_loss += l.item();
      }
      const double norm = model.params().grad_norm();
      if (!std::isfinite(batch_loss) || !std::isfinite(norm)) {
        model.params().assign_values(best);
        throw DivergenceError("non-finite training loss at epoch " +
                                  std::to_string(epoch) + "; restored epoch " +
                                  std::to_string(history.best_epoch) + " parameters",
                              epoch);
      }
      model.params().clip_grad_norm(config.grad_clip);
      adam.step(model.params());
      ++history.steps;
      epoch_loss += batch_loss;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(train_set.size());
    rec.valid = evaluate(model, valid, {1}, eval_opts).front();
    rec.valid.split = "valid";
    rec.valid.epoch = epoch;
    rec.valid_criterion =
        loss == LossKind::kTle ? rec.valid.loss_greedy2 : rec.valid.loss_ce;
    rec.seconds = elapsed();
    rec.valid.seconds = rec.seconds;
    if (config.verify_bounds &&
        rec.valid.mean_task_loss > rec.valid.loss_ed_greedy + 1e-9)
      throw BoundViolation("epoch " + std::to_string(epoch) +
                           ": greedy empirical risk " +
                           fmt_double(rec.valid.mean_task_loss) +
                           " exceeds greedy surrogate risk " +
                           fmt_double(rec.valid.loss_ed_greedy));
    history.epochs.push_back(rec);
    if (callbacks.on_epoch) callbacks.on_epoch(rec);

    if (rec.valid_criterion < history.best_criterion) {
      history.best_criterion = rec.valid_criterion;
      history.best_epoch = epoch;
      best.assign_values(model.params());
      since_improvement = 0;
    } else if (++since_improvement >= config.patience) {
      history.early_stopped = true;
      break;
    }
  }
  model.params().assign_values(best);
  return history;
}

TrainHistory train_tle(NeuralScorer& model, const Dataset& train_set,
                       const Dataset& valid, const TrainConfig& config,
                       const TrainCallbacks& callbacks) {
  return train(LossKind::kTle, model, train_set, valid, config, callbacks);
}

TrainHistory train_ce(NeuralScorer& model, const Dataset& train_set,
                      const Dataset& valid, const TrainConfig& config,
                      const TrainCallbacks& callbacks) {
  return train(LossKind::kCe, model, train_set, valid, config, callbacks);
}

}  // namespace tle
