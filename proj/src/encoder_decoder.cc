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

#include "tle/encoder_decoder.h"

#include <cmath>
#include <stdexcept>

#include "tle/random.h"

namespace tle {
namespace {

enum ParamId {
  kInEmbed,
  kEncWz, kEncWr, kEncWn,
  kEncUz, kEncUr, kEncUn,
  kEncBz, kEncBr, kEncBn,
  kInitW, kInitB,
  kOutEmbed, kBos,
  kDecWz, kDecWr, kDecWn,
  kDecCz, kDecCr, kDecCn,
  kDecUz, kDecUr, kDecUn,
  kDecBz, kDecBr, kDecBn,
  kProjW, kProjB,
  kNumParams
};

struct ParamSpec {
  const char* name;
  bool bias;
};

constexpr ParamSpec kSpecs[kNumParams] = {
    {"input_embedding", false},
    {"encoder.W_update", false}, {"encoder.W_reset", false}, {"encoder.W_candidate", false},
    {"encoder.U_update", false}, {"encoder.U_reset", false}, {"encoder.U_candidate", false},
    {"encoder.b_update", true}, {"encoder.b_reset", true}, {"encoder.b_candidate", true},
    {"decoder.init_W", false}, {"decoder.init_b", true},
    {"output_embedding", false}, {"decoder.bos", false},
    {"decoder.W_update", false}, {"decoder.W_reset", false}, {"decoder.W_candidate", false},
    {"decoder.C_update", false}, {"decoder.C_reset", false}, {"decoder.C_candidate", false},
    {"decoder.U_update", false}, {"decoder.U_reset", false}, {"decoder.U_candidate", false},
    {"decoder.b_update", true}, {"decoder.b_reset", true}, {"decoder.b_candidate", true},
    {"projection.W", false}, {"projection.b", true},
};

Shape param_shape(int id, const ModelConfig& c) {
  const int E = c.embed_dim, H = c.hidden_dim;
  switch (id) {
    case kInEmbed: return {c.input_size, E};
    case kEncWz: case kEncWr: case kEncWn: return {E, H};
    case kEncUz: case kEncUr: case kEncUn: return {H, H};
    case kEncBz: case kEncBr: case kEncBn: return {1, H};
    case kInitW: return {H, H};
    case kInitB: return {1, H};
    case kOutEmbed: return {std::max(c.output_size - 1, 1), E};
    case kBos: return {1, E};
    case kDecWz: case kDecWr: case kDecWn: return {E, H};
    case kDecCz: case kDecCr: case kDecCn: return {H, H};
    case kDecUz: case kDecUr: case kDecUn: return {H, H};
    case kDecBz: case kDecBr: case kDecBn: return {1, H};
    case kProjW: return {H, c.output_size};
    case kProjB: return {1, c.output_size};
  }
  throw std::logic_error("unknown parameter id");
}

struct NeuralState : Scorer::State {
  std::shared_ptr<const std::array<Tensor, 3>> gates;
  Tensor hidden;
};

std::string num(std::uint64_t v) { return std::to_string(v); }

int manifest_int(const Manifest& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw std::invalid_argument("manifest lacks '" + key + "'");
  return std::stoi(it->second);
}

}  // namespace

void ModelConfig::validate() const {
  if (input_size <= 0 || output_size <= 0 || embed_dim <= 0 || hidden_dim <= 0)
    throw std::invalid_argument("model dimensions must be positive");
}

Manifest ModelConfig::to_manifest() const {
  return {{"model.input_size", num(input_size)},
          {"model.output_size", num(output_size)},
          {"model.embed_dim", num(embed_dim)},
          {"model.hidden_dim", num(hidden_dim)},
          {"model.seed", num(seed)}};
}

ModelConfig ModelConfig::from_manifest(const Manifest& m) {
  ModelConfig c;
  c.input_size = manifest_int(m, "model.input_size");
  c.output_size = manifest_int(m, "model.output_size");
  c.embed_dim = manifest_int(m, "model.embed_dim");
  c.hidden_dim = manifest_int(m, "model.hidden_dim");
  auto it = m.find("model.seed");
  if (it == m.end()) throw std::invalid_argument("manifest lacks 'model.seed'");
  c.seed = std::stoull(it->second);
  c.validate();
  return c;
}

NeuralScorer::NeuralScorer(const ModelConfig& config) : config_(config) {
  config_.validate();
  init_layout();
  randomize();
}

NeuralScorer::NeuralScorer(const ModelConfig& config, const ParameterSet& params)
    : config_(config) {
  config_.validate();
  init_layout();
  params_.assign_values(params);
}

NeuralScorer::NeuralScorer(const NeuralScorer& other)
    : config_(other.config_), params_(other.params_) {
  for (int id = 0; id < kNumParams; ++id)
    by_id_.push_back(&params_.get(kSpecs[id].name));
}

void NeuralScorer::init_layout() {
  for (int id = 0; id < kNumParams; ++id)
    by_id_.push_back(&params_.add(kSpecs[id].name, Tensor(param_shape(id, config_))));
}

void NeuralScorer::randomize() {
  Rng rng(config_.seed);
  for (int id = 0; id < kNumParams; ++id) {
    if (kSpecs[id].bias) continue;
    for (double& w : by_id_[id]->value.values()) w = uniform(rng, -0.1, 0.1);
  }
}

NeuralScorer::Graph::Graph(Tape& tape, NeuralScorer& model)
    : tape_(tape), model_(model), mutable_model_(&model), bound_(kNumParams) {}

NeuralScorer::Graph::Graph(Tape& tape, const NeuralScorer& model)
    : tape_(tape), model_(model), mutable_model_(nullptr), bound_(kNumParams) {}

Var NeuralScorer::Graph::p(int id) {
  if (bound_[id].tape() == nullptr) {
    bound_[id] = mutable_model_ ? tape_.param(*mutable_model_->by_id_[id])
                                : tape_.constant_ref(model_.by_id_[id]->value);
  }
  return bound_[id];
}

Var NeuralScorer::Graph::encode(std::span<const Token> input) {
  if (input.empty()) throw std::invalid_argument("cannot encode an empty input");
  const int H = model_.config_.hidden_dim;
  for (Token t : input)
    if (t < 0 || t >= model_.config_.input_size)
      throw std::invalid_argument("input token " + std::to_string(t) +
                                  " outside the input alphabet");
  Var h = tape_.constant(Tensor({1, H}));
  for (Token t : input) {
    const int row = t;
    Var e = gather_rows(p(kInEmbed), std::span<const int>(&row, 1));
    Var zg = sigmoid(add(add(matmul(e, p(kEncWz)), matmul(h, p(kEncUz))), p(kEncBz)));
    Var rg = sigmoid(add(add(matmul(e, p(kEncWr)), matmul(h, p(kEncUr))), p(kEncBr)));
    Var n = tanh(add(add(matmul(e, p(kEncWn)), matmul(mul(rg, h), p(kEncUn))),
                     p(kEncBn)));
    h = add(n, mul(zg, sub(h, n)));
  }
  return h;
}

NeuralScorer::DecoderContext NeuralScorer::Graph::start(Var z) {
  DecoderContext ctx;
  ctx.z = z;
  ctx.gates = {add(matmul(z, p(kDecCz)), p(kDecBz)),
               add(matmul(z, p(kDecCr)), p(kDecBr)),
               add(matmul(z, p(kDecCn)), p(kDecBn))};
  ctx.initial_state = tanh(add(matmul(z, p(kInitW)), p(kInitB)));
  return ctx;
}

Var NeuralScorer::Graph::step(const DecoderContext& ctx, Var state, Token prev) {
  Var e;
  if (prev < 0) {
    e = p(kBos);
  } else {
    if (prev >= model_.config_.output_size - 1)
      throw std::invalid_argument("decoder cannot condition on the end token");
    const int row = prev;
    e = gather_rows(p(kOutEmbed), std::span<const int>(&row, 1));
  }
  Var zg = sigmoid(add(add(matmul(e, p(kDecWz)), matmul(state, p(kDecUz))), ctx.gates[0]));
  Var rg = sigmoid(add(add(matmul(e, p(kDecWr)), matmul(state, p(kDecUr))), ctx.gates[1]));
  Var n = tanh(add(add(matmul(e, p(kDecWn)), matmul(mul(rg, state), p(kDecUn))),
                   ctx.gates[2]));
  return add(n, mul(zg, sub(state, n)));
}

Var NeuralScorer::Graph::deltas(Var state) {
  return add(matmul(state, p(kProjW)), p(kProjB));
}

Scorer::Step NeuralScorer::begin(std::span<const Token> input) const {
  Tape tape(false);
  Graph g(tape, *this);
  DecoderContext ctx = g.start(g.encode(input));
  Var s = g.step(ctx, ctx.initial_state, -1);
  auto state = std::make_shared<NeuralState>();
  state->gates = std::make_shared<const std::array<Tensor, 3>>(std::array<Tensor, 3>{
      ctx.gates[0].value(), ctx.gates[1].value(), ctx.gates[2].value()});
  state->hidden = s.value();
  std::vector<double> d = g.deltas(s).value().vec();
  return {std::move(state), std::move(d)};
}

Scorer::Step NeuralScorer::advance(const Step& from, Token c) const {
  const auto& prev = static_cast<const NeuralState&>(*from.state);
  Tape tape(false);
  Graph g(tape, *this);
  DecoderContext ctx;
  for (int k = 0; k < 3; ++k) ctx.gates[k] = tape.constant_ref((*prev.gates)[k]);
  Var s = g.step(ctx, tape.constant_ref(prev.hidden), c);
  auto state = std::make_shared<NeuralState>();
  state->gates = prev.gates;
  state->hidden = s.value();
  std::vector<double> d = g.deltas(s).value().vec();
  return {std::move(state), std::move(d)};
}

Var softmax_head(Var deltas) { return sub(deltas, log_sum_exp(deltas)); }

std::vector<double> softmax_head(std::span<const double> deltas) {
  const double lse = log_sum_exp(deltas);
  std::vector<double> out(deltas.begin(), deltas.end());
  for (double& x : out) x -= lse;
  return out;
}

}  // namespace tle
