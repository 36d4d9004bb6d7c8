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

#ifndef TRAJCAST__VERIFY_HPP_
#define TRAJCAST__VERIFY_HPP_

#include <cstdint>
#include <vector>

#include "trajcast/gradcheck.hpp"
#include "trajcast/model.hpp"

namespace trajcast::verify
{

/// Small dimensions for finite-difference runs of the whole model.
model::ModelConfig toy_model_config();

/// Two agents (ego with plan plus one vehicle), 3 observed and 2 predicted frames,
/// relative frame, rasterized with `cfg`.
model::Sample toy_model_sample(const model::ModelConfig & cfg, std::uint64_t seed);

/**
 * @brief Central-difference checks of every differentiable operation, both recurrent
 * cells, the convolution, ROIAlign and the end-to-end model loss.
 *
 * Groups are named "op.<name>", "cell.<name>", "env.<name>" and "model.<param group>".
 */
std::vector<GradCheckResult> gradient_suite(std::uint64_t seed, const GradCheckOptions & options = {});

}  // namespace trajcast::verify

#endif  // TRAJCAST__VERIFY_HPP_
