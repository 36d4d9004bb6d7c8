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

#include "trajcast/recurrent.hpp"

#include <cmath>

#include "trajcast/errors.hpp"
#include "trajcast/layers.hpp"
#include "trajcast/ops.hpp"

namespace trajcast::nn
{

namespace
{

void check_input(const Var & x, std::size_t batch, std::size_t width, const char * what)
{
  if (x.value().rank() != 2 || x.rows() != batch || x.cols() != width) {
    throw DimensionError(
      std::string(what) + ": expected [" + std::to_string(batch) + "x" + std::to_string(width) + "], got " +
      to_string(x.shape()));
  }
}

}  // namespace

LstmCell LstmCell::create(ParamStore & store, const std::string & prefix, std::size_t input_size,
                          std::size_t hidden_size, std::mt19937_64 & rng)
{
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  store.add(prefix + ".weight", uniform_tensor({4 * hidden_size, input_size + hidden_size}, bound, rng));
  Tensor bias = uniform_tensor({1, 4 * hidden_size}, bound, rng);
  for (std::size_t k = hidden_size; k < 2 * hidden_size; ++k) {
    bias[k] = 1.0;
  }
  store.add(prefix + ".bias", std::move(bias));
  return bind(store, prefix, input_size, hidden_size);
}

LstmCell LstmCell::bind(ParamStore & store, const std::string & prefix, std::size_t input_size,
                        std::size_t hidden_size)
{
  LstmCell cell;
  cell.input_size_ = input_size;
  cell.hidden_size_ = hidden_size;
  cell.weight_ = &bind_param(store, prefix + ".weight", {4 * hidden_size, input_size + hidden_size});
  cell.bias_ = &bind_param(store, prefix + ".bias", {1, 4 * hidden_size});
  return cell;
}

LstmState LstmCell::zero_state(Graph & g, std::size_t batch) const
{
  return {g.constant(Tensor::zeros({batch, hidden_size_})), g.constant(Tensor::zeros({batch, hidden_size_}))};
}

LstmState LstmCell::step(Graph & g, Var x, const LstmState & prev) const
{
  const std::size_t batch = x.rows();
  check_input(x, batch, input_size_, "lstm input");
  check_input(prev.h, batch, hidden_size_, "lstm hidden");
  check_input(prev.c, batch, hidden_size_, "lstm cell");
  const std::size_t hs = hidden_size_;
  Var gates = linear(concat({x, prev.h}, 1), g.param(*weight_), g.param(*bias_));
  Var i = sigmoid(slice_cols(gates, 0, hs));
  Var f = sigmoid(slice_cols(gates, hs, 2 * hs));
  Var cand = tanh(slice_cols(gates, 2 * hs, 3 * hs));
  Var o = sigmoid(slice_cols(gates, 3 * hs, 4 * hs));
  Var c = add(mul(f, prev.c), mul(i, cand));
  Var h = mul(o, tanh(c));
  return {h, c};
}

std::vector<LstmState> LstmCell::unroll(Graph & g, std::span<const Var> xs, LstmState init) const
{
  std::vector<LstmState> states;
  states.reserve(xs.size());
  for (const Var & x : xs) {
    init = step(g, x, init);
    states.push_back(init);
  }
  return states;
}

GruCell GruCell::create(ParamStore & store, const std::string & prefix, std::size_t input_size,
                        std::size_t hidden_size, std::mt19937_64 & rng)
{
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  store.add(prefix + ".gates.weight", uniform_tensor({2 * hidden_size, input_size + hidden_size}, bound, rng));
  store.add(prefix + ".gates.bias", uniform_tensor({1, 2 * hidden_size}, bound, rng));
  store.add(prefix + ".cand_x.weight", uniform_tensor({hidden_size, input_size}, bound, rng));
  store.add(prefix + ".cand_x.bias", uniform_tensor({1, hidden_size}, bound, rng));
  store.add(prefix + ".cand_h.weight", uniform_tensor({hidden_size, hidden_size}, bound, rng));
  return bind(store, prefix, input_size, hidden_size);
}

GruCell GruCell::bind(ParamStore & store, const std::string & prefix, std::size_t input_size,
                      std::size_t hidden_size)
{
  GruCell cell;
  cell.input_size_ = input_size;
  cell.hidden_size_ = hidden_size;
  cell.gates_weight_ = &bind_param(store, prefix + ".gates.weight", {2 * hidden_size, input_size + hidden_size});
  cell.gates_bias_ = &bind_param(store, prefix + ".gates.bias", {1, 2 * hidden_size});
  cell.cand_x_weight_ = &bind_param(store, prefix + ".cand_x.weight", {hidden_size, input_size});
  cell.cand_x_bias_ = &bind_param(store, prefix + ".cand_x.bias", {1, hidden_size});
  cell.cand_h_weight_ = &bind_param(store, prefix + ".cand_h.weight", {hidden_size, hidden_size});
  return cell;
}

Var GruCell::zero_state(Graph & g, std::size_t batch) const
{
  return g.constant(Tensor::zeros({batch, hidden_size_}));
}

Var GruCell::step(Graph & g, Var x, Var h_prev) const
{
  const std::size_t batch = x.rows();
  check_input(x, batch, input_size_, "gru input");
  check_input(h_prev, batch, hidden_size_, "gru hidden");
  const std::size_t hs = hidden_size_;
  Var zr = sigmoid(linear(concat({x, h_prev}, 1), g.param(*gates_weight_), g.param(*gates_bias_)));
  Var z = slice_cols(zr, 0, hs);
  Var r = slice_cols(zr, hs, 2 * hs);
  Var n = tanh(add(linear(x, g.param(*cand_x_weight_), g.param(*cand_x_bias_)),
                   linear(mul(r, h_prev), g.param(*cand_h_weight_))));
  return add(h_prev, mul(z, sub(n, h_prev)));
}

std::vector<Var> GruCell::unroll(Graph & g, std::span<const Var> xs, Var init) const
{
  std::vector<Var> states;
  states.reserve(xs.size());
  for (const Var & x : xs) {
    init = step(g, x, init);
    states.push_back(init);
  }
  return states;
}

}  // namespace trajcast::nn
