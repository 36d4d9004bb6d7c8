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

#ifndef TRAJCAST__RECURRENT_HPP_
#define TRAJCAST__RECURRENT_HPP_

#include <random>
#include <span>
#include <string>
#include <vector>

#include "trajcast/graph.hpp"

namespace trajcast::nn
{

struct LstmState
{
  Var h;  // [batch x hidden]
  Var c;  // [batch x hidden]
};

/**
 * @brief Four-gate LSTM over a batch of rows.
 *
 *   [i f g o] = [x h] W^T + b
 *   c' = sigmoid(f) * c + sigmoid(i) * tanh(g)
 *   h' = sigmoid(o) * tanh(c')
 *
 * Parameters: `<prefix>.weight` [4H x (I+H)], `<prefix>.bias` [1 x 4H], gate blocks in
 * the order i, f, g, o.
 */
class LstmCell
{
public:
  LstmCell() = default;

  /// Registers fresh parameters: uniform in +-1/sqrt(H), forget-gate bias 1.
  static LstmCell create(ParamStore & store, const std::string & prefix, std::size_t input_size,
                         std::size_t hidden_size, std::mt19937_64 & rng);
  /// Binds to parameters already present in `store` (shapes are validated).
  static LstmCell bind(ParamStore & store, const std::string & prefix, std::size_t input_size,
                       std::size_t hidden_size);

  LstmState zero_state(Graph & g, std::size_t batch) const;
  LstmState step(Graph & g, Var x, const LstmState & prev) const;
  /// Threads `step` over the sequence; returns the state after every step.
  std::vector<LstmState> unroll(Graph & g, std::span<const Var> xs, LstmState init) const;

  std::size_t input_size() const { return input_size_; }
  std::size_t hidden_size() const { return hidden_size_; }

private:
  std::size_t input_size_ = 0;
  std::size_t hidden_size_ = 0;
  Parameter * weight_ = nullptr;
  Parameter * bias_ = nullptr;
};

/**
 * @brief GRU over a batch of rows.
 *
 *   [z r] = sigmoid([x h] Wg^T + bg)
 *   n     = tanh(x Wx^T + bx + (r * h) Wh^T)
 *   h'    = z * n + (1 - z) * h
 *
 * Parameters: `<prefix>.gates.{weight,bias}`, `<prefix>.cand_x.{weight,bias}`,
 * `<prefix>.cand_h.weight`.
 */
class GruCell
{
public:
  GruCell() = default;

  static GruCell create(ParamStore & store, const std::string & prefix, std::size_t input_size,
                        std::size_t hidden_size, std::mt19937_64 & rng);
  static GruCell bind(ParamStore & store, const std::string & prefix, std::size_t input_size,
                      std::size_t hidden_size);

  Var zero_state(Graph & g, std::size_t batch) const;
  Var step(Graph & g, Var x, Var h_prev) const;
  std::vector<Var> unroll(Graph & g, std::span<const Var> xs, Var init) const;

  std::size_t input_size() const { return input_size_; }
  std::size_t hidden_size() const { return hidden_size_; }

private:
  std::size_t input_size_ = 0;
  std::size_t hidden_size_ = 0;
  Parameter * gates_weight_ = nullptr;
  Parameter * gates_bias_ = nullptr;
  Parameter * cand_x_weight_ = nullptr;
  Parameter * cand_x_bias_ = nullptr;
  Parameter * cand_h_weight_ = nullptr;
};

}  // namespace trajcast::nn

#endif  // TRAJCAST__RECURRENT_HPP_
