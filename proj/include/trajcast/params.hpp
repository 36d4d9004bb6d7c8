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

#ifndef TRAJCAST__PARAMS_HPP_
#define TRAJCAST__PARAMS_HPP_

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "trajcast/tensor.hpp"

namespace trajcast
{

/// A learnable tensor with its gradient accumulator.
struct Parameter
{
  std::string name;
  Tensor value;
  Tensor grad;
};

/**
 * @brief Owns every learnable tensor of a model, addressed by dot-separated name.
 *
 * Iteration order is lexicographic by name, which fixes the order of checkpoints,
 * optimizer updates and gradient checks. References returned by add()/get() stay
 * valid for the lifetime of the store.
 */
class ParamStore
{
public:
  using Map = std::map<std::string, Parameter>;

  Parameter & add(const std::string & name, Tensor init);
  Parameter & get(const std::string & name);
  const Parameter & get(const std::string & name) const;
  bool contains(const std::string & name) const { return params_.count(name) != 0; }

  void zero_grad();
  std::size_t size() const { return params_.size(); }
  std::size_t total_elements() const;

  Map::iterator begin() { return params_.begin(); }
  Map::iterator end() { return params_.end(); }
  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }

  /// FNV-1a over names, shapes and raw payload bytes; used for run logs.
  std::uint64_t checksum() const;

private:
  Map params_;
};

/// Uniform in [-bound, bound], drawn in row-major order.
Tensor uniform_tensor(Shape shape, double bound, std::mt19937_64 & rng);

/// Registers `prefix.weight` [out x in] and `prefix.bias` [1 x out], uniform in +-1/sqrt(in).
void add_linear(ParamStore & store, const std::string & prefix, std::size_t in, std::size_t out,
                std::mt19937_64 & rng);

}  // namespace trajcast

#endif  // TRAJCAST__PARAMS_HPP_
