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
#include <string>

#include "tle/tensor.h"

namespace tle {

/// Free-form key/value metadata stored ahead of the parameters.
using Manifest = std::map<std::string, std::string>;

/// Serialized layout:
///   TLE-CKPT v1
///   manifest <count>
///   <key>=<value>                      (count lines)
///   params <count>
///   <name> <rank> <dim>...             (then, per parameter)
///   <uint64 little-endian element count><little-endian IEEE-754 doubles>\n
std::string serialize_checkpoint(const ParameterSet& params,
                                 const Manifest& manifest);

struct Checkpoint {
  Manifest manifest;
  ParameterSet params;
};

/// Throws ParseError on malformed input.
Checkpoint parse_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const ParameterSet& params,
                     const Manifest& manifest);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tle
