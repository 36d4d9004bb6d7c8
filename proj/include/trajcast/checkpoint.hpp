// Copyright 2026 The trajcast Authors
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

#ifndef TRAJCAST__CHECKPOINT_HPP_
#define TRAJCAST__CHECKPOINT_HPP_

#include <filesystem>
#include <map>
#include <string>

#include "trajcast/params.hpp"

namespace trajcast
{

// Binary container, all integers and floats little-endian:
//
//   "TJC1PARM"                       8-byte magic
//   u64 count
//   count x {
//     u32 name_length, name bytes (UTF-8, dot-separated module path)
//     u32 rank, u64 dims[rank]
//     f64 payload[product(dims)]     row-major
//   }
//
// Entries are written in lexicographic name order.

inline constexpr char kCheckpointMagic[8] = {'T', 'J', 'C', '1', 'P', 'A', 'R', 'M'};

using TensorMap = std::map<std::string, Tensor>;

void save_checkpoint(const std::filesystem::path & path, const ParamStore & params);
TensorMap read_checkpoint(const std::filesystem::path & path);

/// Copies every tensor of `saved` into `params`. Names and shapes must match one-to-one;
/// otherwise CheckpointError names the first offending parameter.
void restore_checkpoint(ParamStore & params, const TensorMap & saved);
void load_checkpoint(const std::filesystem::path & path, ParamStore & params);

}  // namespace trajcast

#endif  // TRAJCAST__CHECKPOINT_HPP_
