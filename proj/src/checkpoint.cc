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

#include "tle/checkpoint.h"

#include <bit>
#include <cstring>
#include <sstream>

#include "tle/io.h"
#include "tle/seq.h"

namespace tle {
namespace {

constexpr char kMagic[] = "TLE-CKPT v1";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i]))
         << (8 * i);
  return v;
}

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}

  std::string line() {
    const auto nl = s_.find('\n', pos_);
    if (nl == std::string::npos) throw ParseError("checkpoint truncated");
    std::string out = s_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    return out;
  }

  std::string bytes(std::size_t n) {
    if (pos_ + n > s_.size()) throw ParseError("checkpoint truncated");
    std::string out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

std::size_t parse_count(const std::string& line, const std::string& key) {
  std::istringstream in(line);
  std::string word;
  long long n = -1;
  if (!(in >> word >> n) || word != key || n < 0)
    throw ParseError("checkpoint: expected '" + key + " <count>', got '" +
                     line + "'");
  return static_cast<std::size_t>(n);
}

}  // namespace

std::string serialize_checkpoint(const ParameterSet& params,
                                 const Manifest& manifest) {
  std::string out = std::string(kMagic) + "\n";
  out += "manifest " + std::to_string(manifest.size()) + "\n";
  for (const auto& [k, v] : manifest) {
    if (k.find_first_of("=\n") != std::string::npos ||
        v.find('\n') != std::string::npos)
      throw std::invalid_argument("manifest entry '" + k + "' not serializable");
    out += k + "=" + v + "\n";
  }
  out += "params " + std::to_string(params.size()) + "\n";
  for (const auto& p : params.items()) {
    out += p.name + " " + std::to_string(p.value.shape().size());
    for (int d : p.value.shape()) out += " " + std::to_string(d);
    out += "\n";
    put_u64(out, p.value.size());
    for (double x : p.value.values()) put_u64(out, std::bit_cast<std::uint64_t>(x));
    out += "\n";
  }
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.line() != kMagic) throw ParseError("not a TLE-CKPT v1 checkpoint");
  Checkpoint ck;
  const std::size_t n_manifest = parse_count(r.line(), "manifest");
  for (std::size_t i = 0; i < n_manifest; ++i) {
    const std::string l = r.line();
    const auto eq = l.find('=');
    if (eq == std::string::npos)
      throw ParseError("checkpoint: bad manifest line '" + l + "'");
    ck.manifest[l.substr(0, eq)] = l.substr(eq + 1);
  }
  const std::size_t n_params = parse_count(r.line(), "params");
  for (std::size_t i = 0; i < n_params; ++i) {
    std::istringstream head(r.line());
    std::string name;
    int rank = 0;
    if (!(head >> name >> rank) || rank < 1 || rank > 2)
      throw ParseError("checkpoint: bad parameter header");
    Shape shape(rank);
    for (int& d : shape)
      if (!(head >> d) || d <= 0) throw ParseError("checkpoint: bad shape");
    const std::string len = r.bytes(8);
    const std::uint64_t n = get_u64(len, 0);
    const std::string payload = r.bytes(n * 8);
    std::vector<double> data(n);
    for (std::uint64_t k = 0; k < n; ++k)
      data[k] = std::bit_cast<double>(get_u64(payload, k * 8));
    if (r.bytes(1) != "\n") throw ParseError("checkpoint: missing separator");
    try {
      ck.params.add(name, Tensor(shape, std::move(data)));
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("checkpoint: ") + e.what());
    }
  }
  return ck;
}

void save_checkpoint(const std::string& path, const ParameterSet& params,
                     const Manifest& manifest) {
  write_file(path, serialize_checkpoint(params, manifest));
}

Checkpoint load_checkpoint(const std::string& path) {
  return parse_checkpoint(read_file(path));
}

}  // namespace tle
