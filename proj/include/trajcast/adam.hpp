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

#ifndef TRAJCAST__ADAM_HPP_
#define TRAJCAST__ADAM_HPP_

#include <cstdint>
#include <map>
#include <string>

#include "trajcast/params.hpp"

namespace trajcast
{

/// Adam moments keyed by parameter name. Moments start at zero; `step` counts updates.
struct AdamState
{
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;
};

/// One bias-corrected Adam update of every parameter from its `grad` buffer.
/// Throws DimensionError when a gradient or moment disagrees with its parameter's shape.
void adam_step(ParamStore & params, AdamState & state);

}  // namespace trajcast

#endif  // TRAJCAST__ADAM_HPP_
