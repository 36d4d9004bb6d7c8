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

#include "trajcast/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "trajcast/errors.hpp"

namespace trajcast
{

namespace
{

template <typename T>
T to_little(T v)
{
  if constexpr (std::endian::native == std::endian::big) {
    auto * b = reinterpret_cast<unsigned char *>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::ostream & out, T v)
{
  v = to_little(v);
  out.write(reinterpret_cast<const char *>(&v), sizeof v);
}

template <typename T>
T get(std::istream & in, const std::filesystem::path & path)
{
  T v{};
  if (!in.read(reinterpret_cast<char *>(&v), sizeof v)) {
    throw CheckpointError("truncated checkpoint " + path.string());
  }
  return to_little(v);
}

}  // namespace

void save_checkpoint(const std::filesystem::path & path, const ParamStore & params)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint " + path.string());
  }
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put<std::uint64_t>(out, params.size());
  for (const auto & [name, p] : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (auto d : p.value.shape()) {
      put<std::uint64_t>(out, d);
    }
    for (double v : p.value.data()) {
      put<double>(out, v);
    }
  }
  if (!out) {
    throw std::runtime_error("failed writing checkpoint " + path.string());
  }
}

TensorMap read_checkpoint(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingInputError("cannot open checkpoint " + path.string());
  }
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw CheckpointError("bad checkpoint magic in " + path.string());
  }
  const auto count = get<std::uint64_t>(in, path);
  TensorMap result;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = get<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) {
      throw CheckpointError("truncated checkpoint " + path.string());
    }
    const auto rank = get<std::uint32_t>(in, path);
    if (rank == 0 || rank > 8) {
      throw CheckpointError("implausible rank in checkpoint entry '" + name + "'", name);
    }
    Shape shape(rank);
    for (auto & d : shape) {
      d = static_cast<std::size_t>(get<std::uint64_t>(in, path));
      if (d == 0) {
        throw CheckpointError("zero dimension in checkpoint entry '" + name + "'", name);
      }
    }
    Tensor t(shape);
    for (auto & v : t.data()) {
      v = get<double>(in, path);
    }
    result.emplace(std::move(name), std::move(t));
  }
  return result;
}

void restore_checkpoint(ParamStore & params, const TensorMap & saved)
{
  for (const auto & [name, p] : params) {
    auto it = saved.find(name);
    if (it == saved.end()) {
      throw CheckpointError("checkpoint lacks parameter '" + name + "'", name);
    }
    if (it->second.shape() != p.value.shape()) {
      throw CheckpointError(
        "parameter '" + name + "' has shape " + to_string(p.value.shape()) + " in the model but " +
          to_string(it->second.shape()) + " in the checkpoint",
        name);
    }
  }
  for (const auto & [name, t] : saved) {
    if (!params.contains(name)) {
      throw CheckpointError("checkpoint has unexpected parameter '" + name + "'", name);
    }
  }
  for (auto & [name, p] : params) {
    p.value = saved.at(name);
  }
}

void load_checkpoint(const std::filesystem::path & path, ParamStore & params)
{
  restore_checkpoint(params, read_checkpoint(path));
}

}  // namespace trajcast
