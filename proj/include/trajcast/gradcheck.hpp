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

#ifndef TRAJCAST__GRADCHECK_HPP_
#define TRAJCAST__GRADCHECK_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trajcast/graph.hpp"

namespace trajcast
{

struct GradCheckOptions
{
  double step = 1e-5;
  double rel_tol = 1e-4;
  /// Errors below this are accepted regardless of the gradient's magnitude.
  double abs_floor = 1e-7;
  /// On failure, retry the entry at step/10 and step*10 before reporting it. Guards
  /// against a perturbation straddling a kink (relu, max, bilinear cell edge).
  bool kink_retry = true;
};

/// Outcome for one named group of checked entries.
struct GradCheckResult
{
  std::string group;
  std::size_t checked = 0;
  std::size_t failures = 0;
  /// max |analytic - numeric| / max(|analytic|, |numeric|, abs_floor / rel_tol)
  double worst_rel_error = 0.0;
  bool passed() const { return failures == 0; }
};

/// Builds the scalar loss on a fresh graph from leaves created with Graph::input.
using InputLossFn = std::function<Var(Graph &, std::span<const Var>)>;
/// Builds the scalar loss on a fresh graph, reading parameters via Graph::param.
using ParamLossFn = std::function<Var(Graph &)>;

/// Central-difference check of d(loss)/d(input) for every element of every input.
/// One result per input, named by `names` (or "input<k>").
std::vector<GradCheckResult> check_input_gradients(const InputLossFn & loss, std::vector<Tensor> inputs,
                                                   const GradCheckOptions & options = {},
                                                   std::vector<std::string> names = {});

/// Maps a parameter name to the group it is reported under.
using GroupFn = std::function<std::string(const std::string &)>;

/// Central-difference check over every element of every parameter in `params`.
/// Parameter values are restored afterwards; grads are left zeroed.
std::vector<GradCheckResult> check_param_gradients(const ParamLossFn & loss, ParamStore & params,
                                                   const GradCheckOptions & options = {},
                                                   const GroupFn & group = {});

/// Group by the first two dot-separated components ("ain.gru.w" -> "ain.gru").
std::string group_by_prefix(const std::string & name);

}  // namespace trajcast

#endif  // TRAJCAST__GRADCHECK_HPP_
