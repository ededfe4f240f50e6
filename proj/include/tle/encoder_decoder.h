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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tle/checkpoint.h"
#include "tle/scoring.h"
#include "tle/tensor.h"

namespace tle {

struct ModelConfig {
  int input_size = 0;   // input alphabet size
  int output_size = 0;  // extended output alphabet size, end token included
  int embed_dim = 32;
  int hidden_dim = 64;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument unless every dimension is positive.
  void validate() const;
  Manifest to_manifest() const;
  static ModelConfig from_manifest(const Manifest& m);
};

/// GRU encoder-decoder that emits one unnormalized delta per extended-alphabet
/// token at every decoding step. The encoder's final state z(x) is fed to
/// every decoder step next to the previous token embedding.
class NeuralScorer : public Scorer {
 public:
  explicit NeuralScorer(const ModelConfig& config);
  /// Adopts trained parameters; layout must match `config`.
  NeuralScorer(const ModelConfig& config, const ParameterSet& params);

  NeuralScorer(const NeuralScorer& other);
  NeuralScorer& operator=(const NeuralScorer&) = delete;

  const ModelConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  int extended_size() const override { return config_.output_size; }
  Step begin(std::span<const Token> input) const override;
  Step advance(const Step& from, Token c) const override;

  /// Decoder inputs that stay fixed across steps: the projections of z(x)
  /// into each gate (bias included) and the initial state.
  struct DecoderContext {
    Var z;
    std::array<Var, 3> gates;
    Var initial_state;
  };

  /// Builds model computations on a tape. A graph over a mutable model binds
  /// parameters as trainable leaves; over a const model they are constants.
  class Graph {
   public:
    Graph(Tape& tape, NeuralScorer& model);
    Graph(Tape& tape, const NeuralScorer& model);

    Tape& tape() { return tape_; }

    /// Throws std::invalid_argument on empty input.
    Var encode(std::span<const Token> input);
    DecoderContext start(Var z);
    /// One decoder step from `state`; prev < 0 selects the BOS embedding.
    Var step(const DecoderContext& ctx, Var state, Token prev);
    /// Affine projection of a decoder state to the delta vector [1 x K].
    Var deltas(Var state);

   private:
    Var p(int id);

    Tape& tape_;
    const NeuralScorer& model_;
    NeuralScorer* mutable_model_;
    std::vector<Var> bound_;
  };

 private:
  void init_layout();
  void randomize();

  ModelConfig config_;
  ParameterSet params_;
  std::vector<Parameter*> by_id_;
};

/// delta - log-sum-exp(delta): log-probabilities over the extended alphabet.
Var softmax_head(Var deltas);
std::vector<double> softmax_head(std::span<const double> deltas);

}  // namespace tle
