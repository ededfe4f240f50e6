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

#include "tle/seq.h"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "tle/io.h"

namespace tle {

Alphabet::Alphabet(std::vector<std::string> symbols, std::string end_token)
    : symbols_(std::move(symbols)), end_token_(std::move(end_token)) {
  std::unordered_set<std::string> seen;
  for (const auto& s : symbols_) {
    if (s.empty() || s.find_first_of(" \t\n") != std::string::npos)
      throw std::invalid_argument("alphabet symbol must be a non-empty word");
    if (!seen.insert(s).second)
      throw std::invalid_argument("duplicate alphabet symbol '" + s + "'");
  }
  if (seen.count(end_token_))
    throw std::invalid_argument("end token '" + end_token_ +
                                "' is also a content symbol");
}

Alphabet Alphabet::letters(int n) {
  if (n < 1 || n > 26)
    throw std::invalid_argument("letter alphabet size must be in [1, 26]");
  std::vector<std::string> symbols;
  for (int i = 0; i < n; ++i) symbols.emplace_back(1, static_cast<char>('a' + i));
  return Alphabet(std::move(symbols));
}

const std::string& Alphabet::symbol(Token t) const {
  if (t == end()) return end_token_;
  if (t < 0 || t > end())
    throw std::out_of_range("token index " + std::to_string(t) +
                            " outside alphabet");
  return symbols_[t];
}

Token Alphabet::index(std::string_view symbol) const {
  if (symbol == end_token_) return end();
  auto it = std::find(symbols_.begin(), symbols_.end(), symbol);
  if (it == symbols_.end())
    throw ParseError("unknown symbol '" + std::string(symbol) + "'");
  return static_cast<Token>(it - symbols_.begin());
}

bool Alphabet::contains(std::string_view symbol) const {
  return symbol == end_token_ ||
         std::find(symbols_.begin(), symbols_.end(), symbol) != symbols_.end();
}

OutputSequence OutputSequence::terminate(std::span<const Token> content,
                                         Token end) {
  OutputSequence out{TokenSeq(content.begin(), content.end()), true};
  out.tokens.push_back(end);
  return out;
}

bool validate(const OutputSequence& seq, const Alphabet& alphabet) {
  const Token end = alphabet.end();
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    const Token t = seq.tokens[i];
    if (t < 0 || t > end) return false;
    const bool last = i + 1 == seq.tokens.size();
    if (t == end && !(seq.terminated && last)) return false;
  }
  if (seq.terminated && (seq.tokens.empty() || seq.tokens.back() != end))
    return false;
  return true;
}

std::string format_tokens(std::span<const Token> tokens,
                          const Alphabet& alphabet) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += alphabet.symbol(tokens[i]);
  }
  return out;
}

TokenSeq parse_tokens(std::string_view text, const Alphabet& alphabet) {
  TokenSeq out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) out.push_back(alphabet.index(word));
  return out;
}

std::string format_sequence(const OutputSequence& seq,
                            const Alphabet& alphabet) {
  return format_tokens(seq.tokens, alphabet);
}

OutputSequence parse_sequence(std::string_view text,
                              const Alphabet& alphabet) {
  OutputSequence seq;
  seq.tokens = parse_tokens(text, alphabet);
  seq.terminated = !seq.tokens.empty() && seq.tokens.back() == alphabet.end();
  if (!validate(seq, alphabet))
    throw ParseError("end token misplaced in '" + std::string(text) + "'");
  return seq;
}

std::size_t count_outputs(int alphabet_size, int max_len) {
  std::size_t total = 0, level = 1;
  for (int k = 0; k <= max_len; ++k) {
    total += level;
    if (k < max_len) {
      if (level > (std::size_t{1} << 62) / std::max(alphabet_size, 1))
        return std::size_t(-1);
      level *= static_cast<std::size_t>(alphabet_size);
    }
  }
  return total;
}

void for_each_output(int alphabet_size, int max_len,
                     const std::function<void(const OutputSequence&)>& visit,
                     std::size_t cap) {
  if (max_len < 0) throw std::invalid_argument("max_len must be >= 0");
  const std::size_t n = count_outputs(alphabet_size, max_len);
  if (n > cap)
    throw BudgetExceeded("enumeration of " + std::to_string(n) +
                         " sequences exceeds cap " + std::to_string(cap));
  OutputSequence seq;
  seq.terminated = true;
  for (int len = 0; len <= max_len; ++len) {
    TokenSeq content(len, 0);
    while (true) {
      seq.tokens = content;
      seq.tokens.push_back(alphabet_size);
      visit(seq);
      // Odometer increment, last position fastest.
      int pos = len - 1;
      while (pos >= 0 && ++content[pos] == alphabet_size) content[pos--] = 0;
      if (pos < 0) break;
    }
  }
}

std::vector<OutputSequence> enumerate_outputs(const Alphabet& alphabet,
                                              int max_len, std::size_t cap) {
  std::vector<OutputSequence> out;
  for_each_output(
      alphabet.size(), max_len,
      [&](const OutputSequence& s) { out.push_back(s); }, cap);
  return out;
}

Dataset parse_dataset(std::string_view text, const Alphabet& input_alphabet,
                      const Alphabet& output_alphabet) {
  Dataset data;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected exactly one TAB");
    SamplePair s;
    try {
      s.input = parse_tokens(std::string_view(line).substr(0, tab),
                             input_alphabet);
      TokenSeq target =
          parse_tokens(std::string_view(line).substr(tab + 1), output_alphabet);
      if (std::find(target.begin(), target.end(), output_alphabet.end()) !=
          target.end())
        throw ParseError("target must not contain the end token");
      s.ground_truth = OutputSequence::terminate(target, output_alphabet.end());
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (s.input.empty())
      throw ParseError("line " + std::to_string(line_no) + ": empty input");
    data.push_back(std::move(s));
  }
  return data;
}

Dataset load_dataset(const std::string& path, const Alphabet& input_alphabet,
                     const Alphabet& output_alphabet) {
  return parse_dataset(read_file(path), input_alphabet, output_alphabet);
}

std::string format_dataset(const Dataset& data, const Alphabet& input_alphabet,
                           const Alphabet& output_alphabet) {
  std::string out;
  for (const auto& s : data) {
    out += format_tokens(s.input, input_alphabet);
    out += '\t';
    out += format_tokens(s.ground_truth.content(), output_alphabet);
    out += '\n';
  }
  return out;
}

void save_dataset(const std::string& path, const Dataset& data,
                  const Alphabet& input_alphabet,
                  const Alphabet& output_alphabet) {
  write_file(path, format_dataset(data, input_alphabet, output_alphabet));
}

std::string read_file(const std::string& path) {
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) throw IoError("'" + path + "' is a directory");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

}  // namespace tle
