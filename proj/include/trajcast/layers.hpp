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

#ifndef TRAJCAST__LAYERS_HPP_
#define TRAJCAST__LAYERS_HPP_

#include <random>
#include <string>

#include "trajcast/graph.hpp"

namespace trajcast::nn
{

/// Looks up `name` and checks its shape; throws DimensionError on mismatch.
Parameter & bind_param(ParamStore & store, const std::string & name, const Shape & shape);

/// Affine map over rows: y = x W^T + b with W [out x in], b [1 x out].
class Linear
{
public:
  Linear() = default;

  static Linear create(ParamStore & store, const std::string & prefix, std::size_t in, std::size_t out,
                       std::mt19937_64 & rng);
  static Linear bind(ParamStore & store, const std::string & prefix, std::size_t in, std::size_t out);

  Var operator()(Graph & g, Var x) const;

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  Parameter & weight() const { return *weight_; }
  Parameter & bias() const { return *bias_; }

private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  Parameter * weight_ = nullptr;
  Parameter * bias_ = nullptr;
};

}  // namespace trajcast::nn

#endif  // TRAJCAST__LAYERS_HPP_
