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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tle {

/// Index of a symbol in an Alphabet. Content symbols occupy [0, size());
/// the end token is always size().
using Token = int;
using TokenSeq = std::vector<Token>;

/// Raised when an enumeration would exceed its configured cap.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a file cannot be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on malformed text input (datasets, sequences, configs).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> symbols,
                    std::string end_token = "$");

  /// First `n` lowercase letters: a, b, c, ...
  static Alphabet letters(int n);

  int size() const { return static_cast<int>(symbols_.size()); }
  int extended_size() const { return size() + 1; }
  Token end() const { return size(); }

  const std::string& symbol(Token t) const;
  Token index(std::string_view symbol) const;
  bool contains(std::string_view symbol) const;
  const std::vector<std::string>& symbols() const { return symbols_; }
  const std::string& end_token() const { return end_token_; }

 private:
  std::vector<std::string> symbols_;
  std::string end_token_ = "$";
};

/// A token sequence. When `terminated`, the last token is the end token;
/// otherwise it is a prefix over the content alphabet.
struct OutputSequence {
  TokenSeq tokens;
  bool terminated = false;

  /// Tokens with the terminator stripped.
  std::span<const Token> content() const {
    return terminated && !tokens.empty()
               ? std::span<const Token>(tokens).first(tokens.size() - 1)
               : std::span<const Token>(tokens);
  }

  static OutputSequence prefix(TokenSeq content) {
    return {std::move(content), false};
  }
  static OutputSequence terminate(std::span<const Token> content, Token end);

  friend bool operator==(const OutputSequence&, const OutputSequence&) =
      default;
};

/// True iff the terminator discipline holds for `seq` under `alphabet`.
bool validate(const OutputSequence& seq, const Alphabet& alphabet);

/// Space-separated symbols; a terminated sequence ends with the literal end
/// token.
std::string format_sequence(const OutputSequence& seq,
                            const Alphabet& alphabet);
OutputSequence parse_sequence(std::string_view text, const Alphabet& alphabet);

std::string format_tokens(std::span<const Token> tokens,
                          const Alphabet& alphabet);
TokenSeq parse_tokens(std::string_view text, const Alphabet& alphabet);

inline constexpr std::size_t kDefaultEnumerationCap = 1u << 20;

/// Number of terminated sequences with at most `max_len` content tokens.
std::size_t count_outputs(int alphabet_size, int max_len);

/// Visits every terminated sequence with at most `max_len` content tokens,
/// ordered by length and then lexicographically by token index.
void for_each_output(int alphabet_size, int max_len,
                     const std::function<void(const OutputSequence&)>& visit,
                     std::size_t cap = kDefaultEnumerationCap);

std::vector<OutputSequence> enumerate_outputs(
    const Alphabet& alphabet, int max_len,
    std::size_t cap = kDefaultEnumerationCap);

struct SamplePair {
  TokenSeq input;
  OutputSequence ground_truth;
};

using Dataset = std::vector<SamplePair>;

/// One sample per line: `input tokens<TAB>target tokens`. Targets are stored
/// without the terminator, which is appended on load.
Dataset load_dataset(const std::string& path, const Alphabet& input_alphabet,
                     const Alphabet& output_alphabet);
Dataset parse_dataset(std::string_view text, const Alphabet& input_alphabet,
                      const Alphabet& output_alphabet);
std::string format_dataset(const Dataset& data, const Alphabet& input_alphabet,
                           const Alphabet& output_alphabet);
void save_dataset(const std::string& path, const Dataset& data,
                  const Alphabet& input_alphabet,
                  const Alphabet& output_alphabet);

}  // namespace tle
