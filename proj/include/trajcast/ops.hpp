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

#ifndef TRAJCAST__OPS_HPP_
#define TRAJCAST__OPS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "trajcast/graph.hpp"

// Differentiable operations on Graph values. Matrices are 2-D, row-major; a batch of
// agents is a stack of rows. No broadcasting happens except where one operand of a
// binary op holds a single element, or where an op says so (linear's bias, repeat_rows).

namespace trajcast
{

// [m x k] . [k x n] -> [m x n]
Var matmul(Var a, Var b);

// x [n x in], weight [out x in], bias [1 x out] -> x . weight^T + bias, [n x out].
Var linear(Var x, Var weight, Var bias);
Var linear(Var x, Var weight);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
Var add_scalar(Var x, double offset);

Var sigmoid(Var x);
Var tanh(Var x);
Var relu(Var x);

/// 2-D concatenation along axis 0 (rows) or 1 (columns).
Var concat(std::span<const Var> parts, std::size_t axis);
Var concat(std::initializer_list<Var> parts, std::size_t axis);

Var slice_cols(Var x, std::size_t begin, std::size_t end);
/// Gathers rows in the given order; repeated indices accumulate gradient.
Var select_rows(Var x, std::vector<std::size_t> rows);

/// Column-wise maximum over rows: [n x d] -> [1 x d]. Gradient goes to the first
/// (lowest-index) maximising row of each column.
Var maxpool_rows(Var x);
/// [1 x d] -> [n x d] by copying the row.
Var repeat_rows(Var x, std::size_t n);

/// Sum of all elements -> shape {1}.
Var sum(Var x);
/// [n x d] -> [n x 1]
Var row_sum(Var x);
Var reshape(Var x, Shape shape);

}  // namespace trajcast

#endif  // TRAJCAST__OPS_HPP_
