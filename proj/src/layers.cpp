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

#include "trajcast/layers.hpp"

#include "trajcast/errors.hpp"
#include "trajcast/ops.hpp"

namespace trajcast::nn
{

Parameter & bind_param(ParamStore & store, const std::string & name, const Shape & shape)
{
  Parameter & p = store.get(name);
  if (p.value.shape() != shape) {
    throw DimensionError(
      "parameter '" + name + "' has shape " + to_string(p.value.shape()) + ", expected " + to_string(shape));
  }
  return p;
}

Linear Linear::create(ParamStore & store, const std::string & prefix, std::size_t in, std::size_t out,
                      std::mt19937_64 & rng)
{
  add_linear(store, prefix, in, out, rng);
  return bind(store, prefix, in, out);
}

Linear Linear::bind(ParamStore & store, const std::string & prefix, std::size_t in, std::size_t out)
{
  Linear l;
  l.in_ = in;
  l.out_ = out;
  l.weight_ = &bind_param(store, prefix + ".weight", {out, in});
  l.bias_ = &bind_param(store, prefix + ".bias", {1, out});
  return l;
}

Var Linear::operator()(Graph & g, Var x) const
{
  if (!weight_) {
    throw ContractError("Linear used before create/bind");
  }
  return linear(x, g.param(*weight_), g.param(*bias_));
}

}  // namespace trajcast::nn
