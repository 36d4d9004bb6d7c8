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

#ifndef TRAJCAST__GRAPH_HPP_
#define TRAJCAST__GRAPH_HPP_

#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

#include "trajcast/params.hpp"
#include "trajcast/tensor.hpp"

namespace trajcast
{

class Graph;

/// Handle to a value recorded on a Graph. Cheap to copy; valid while its Graph lives.
class Var
{
public:
  Var() = default;

  const Tensor & value() const;
  const Shape & shape() const { return value().shape(); }
  std::size_t rows() const { return value().dim(0); }
  std::size_t cols() const { return value().dim(1); }
  bool requires_grad() const;

  Graph * graph() const { return graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

private:
  friend class Graph;
  Var(Graph * graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph * graph_ = nullptr;
  std::size_t id_ = 0;
};

/**
 * @brief Tape of recorded operations for reverse-mode differentiation.
 *
 * Operations are appended in execution order, so the tape is topologically sorted by
 * construction. backward() walks it once in reverse. A Graph is rebuilt for every
 * forward pass and must stay on one thread.
 */
class Graph
{
public:
  /// Receives the recorded output value and its gradient, and scatters into the inputs.
  using BackwardFn = std::function<void(Graph &, const Tensor & out, const Tensor & dout)>;

  Graph() = default;
  Graph(const Graph &) = delete;
  Graph & operator=(const Graph &) = delete;

  Var constant(Tensor value);
  /// Leaf that requires a gradient but is not bound to a parameter.
  Var input(Tensor value);
  /// Leaf bound to `p`. Repeated calls with the same parameter return the same node.
  Var param(Parameter & p);

  /// Appends an operation. `backward` is kept only if some input requires a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

  /// Gradient accumulator of `v`, zero-allocated on first use.
  Tensor & grad_buffer(Var v);
  /// Gradient of `v` after backward(), or nullptr when nothing flowed into it.
  const Tensor * grad(Var v) const;

  /// Seeds d(loss)/d(loss) = 1 and propagates. Throws ContractError on non-scalar loss
  /// or on a second call without zero_grad().
  void backward(Var loss);
  /// Clears all node gradients so backward() may run again.
  void zero_grad();
  /// Adds gradients of parameter leaves into Parameter::grad.
  void accumulate_param_grads() const;

  std::size_t size() const { return nodes_.size(); }

private:
  friend class Var;
  struct Node
  {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
    Parameter * param = nullptr;
  };

  Var push(Node node);
  void check_owned(Var v) const;

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter *, std::size_t> param_nodes_;
  std::vector<std::size_t> param_order_;
  bool backward_done_ = false;
};

namespace debug
{

/// Deliberate defects used to prove that gradient checks catch broken backward rules.
enum class Fault
{
  none,
  tanh_backward_sign,
  matmul_backward_sign,
};

void inject_fault(Fault fault);
Fault active_fault();

}  // namespace debug

}  // namespace trajcast

#endif  // TRAJCAST__GRAPH_HPP_
