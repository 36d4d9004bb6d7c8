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

#include "trajcast/params.hpp"

#include <cmath>
#include <cstring>

#include "trajcast/errors.hpp"

namespace trajcast
{

Parameter & ParamStore::add(const std::string & name, Tensor init)
{
  auto [it, inserted] = params_.try_emplace(name);
  if (!inserted) {
    throw ConfigError("duplicate parameter name '" + name + "'");
  }
  it->second.name = name;
  it->second.grad = Tensor::zeros(init.shape());
  it->second.value = std::move(init);
  return it->second;
}

Parameter & ParamStore::get(const std::string & name)
{
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw ConfigError("unknown parameter '" + name + "'");
  }
  return it->second;
}

const Parameter & ParamStore::get(const std::string & name) const
{
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw ConfigError("unknown parameter '" + name + "'");
  }
  return it->second;
}

void ParamStore::zero_grad()
{
  for (auto & [name, p] : params_) {
    p.grad.fill(0.0);
  }
}

std::size_t ParamStore::total_elements() const
{
  std::size_t n = 0;
  for (const auto & [name, p] : params_) {
    n += p.value.size();
  }
  return n;
}

std::uint64_t ParamStore::checksum() const
{
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void * data, std::size_t bytes) {
    const auto * p = static_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto & [name, p] : params_) {
    mix(name.data(), name.size());
    for (auto d : p.value.shape()) {
      const std::uint64_t d64 = d;
      mix(&d64, sizeof d64);
    }
    mix(p.value.ptr(), p.value.size() * sizeof(double));
  }
  return h;
}

Tensor uniform_tensor(Shape shape, double bound, std::mt19937_64 & rng)
{
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto & v : t.data()) {
    v = dist(rng);
  }
  return t;
}

void add_linear(ParamStore & store, const std::string & prefix, std::size_t in, std::size_t out,
                std::mt19937_64 & rng)
{
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  store.add(prefix + ".weight", uniform_tensor({out, in}, bound, rng));
  store.add(prefix + ".bias", uniform_tensor({1, out}, bound, rng));
}

}  // namespace trajcast
