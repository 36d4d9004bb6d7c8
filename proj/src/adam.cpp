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

#include "trajcast/adam.hpp"

#include <cmath>

#include "trajcast/errors.hpp"

namespace trajcast
{

void adam_step(ParamStore & params, AdamState & state)
{
  for (auto & [name, p] : params) {
    if (p.grad.shape() != p.value.shape()) {
      throw DimensionError(
        "adam: gradient of '" + name + "' has shape " + to_string(p.grad.shape()) + ", parameter " +
        to_string(p.value.shape()));
    }
    auto & m = state.first_moment.try_emplace(name, Tensor::zeros(p.value.shape())).first->second;
    auto & v = state.second_moment.try_emplace(name, Tensor::zeros(p.value.shape())).first->second;
    if (m.shape() != p.value.shape() || v.shape() != p.value.shape()) {
      throw DimensionError("adam: moment buffers of '" + name + "' disagree with " + to_string(p.value.shape()));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (auto & [name, p] : params) {
    Tensor & m = state.first_moment.at(name);
    Tensor & v = state.second_moment.at(name);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p.value[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace trajcast
