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

#include "trajcast/graph.hpp"

#include <atomic>

#include "trajcast/errors.hpp"

namespace trajcast
{

const Tensor & Var::value() const
{
  if (!graph_) {
    throw ContractError("use of an empty Var");
  }
  return graph_->nodes_[id_].value;
}

bool Var::requires_grad() const { return graph_ && graph_->nodes_[id_].requires_grad; }

Var Graph::push(Node node)
{
#ifndef NDEBUG
  if (!node.value.all_finite()) {
    throw NumericError("non-finite value produced by operation #" + std::to_string(nodes_.size()));
  }
#endif
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Graph::check_owned(Var v) const
{
  if (v.graph_ != this) {
    throw ContractError("Var belongs to a different graph");
  }
}

Var Graph::constant(Tensor value)
{
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::input(Tensor value)
{
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Graph::param(Parameter & p)
{
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return Var(this, it->second);
  }
  Node n;
  n.value = p.value;
  n.requires_grad = true;
  n.param = &p;
  Var v = push(std::move(n));
  param_nodes_.emplace(&p, v.id());
  param_order_.push_back(v.id());
  return v;
}

Var Graph::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward)
{
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Graph::record(Tensor value, std::span<const Var> inputs, BackwardFn backward)
{
  Node n;
  n.value = std::move(value);
  for (const Var & in : inputs) {
    check_owned(in);
    if (nodes_[in.id_].requires_grad) {
      n.requires_grad = true;
    }
  }
  if (n.requires_grad) {
    n.backward = std::move(backward);
  }
  return push(std::move(n));
}

Tensor & Graph::grad_buffer(Var v)
{
  check_owned(v);
  Node & n = nodes_[v.id_];
  if (!n.has_grad) {
    n.grad = Tensor::zeros(n.value.shape());
    n.has_grad = true;
  }
  return n.grad;
}

const Tensor * Graph::grad(Var v) const
{
  check_owned(v);
  const Node & n = nodes_[v.id_];
  return n.has_grad ? &n.grad : nullptr;
}

void Graph::backward(Var loss)
{
  check_owned(loss);
  if (backward_done_) {
    throw ContractError("backward() called twice without zero_grad()");
  }
  if (nodes_.empty()) {
    throw ContractError("backward() on an empty graph");
  }
  if (loss.value().size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + to_string(loss.shape()));
  }
  backward_done_ = true;
  grad_buffer(loss)[0] += 1.0;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node & n = nodes_[i];
    if (n.has_grad && n.backward) {
      n.backward(*this, n.value, n.grad);
    }
  }
}

void Graph::zero_grad()
{
  for (auto & n : nodes_) {
    n.grad = Tensor();
    n.has_grad = false;
  }
  backward_done_ = false;
}

void Graph::accumulate_param_grads() const
{
  for (std::size_t id : param_order_) {
    const Node & n = nodes_[id];
    if (!n.has_grad) {
      continue;
    }
    Tensor & dst = n.param->grad;
    if (dst.shape() != n.grad.shape()) {
      dst = Tensor::zeros(n.grad.shape());
    }
    for (std::size_t k = 0; k < dst.size(); ++k) {
      dst[k] += n.grad[k];
    }
  }
}

namespace debug
{
namespace
{
std::atomic<Fault> g_fault{Fault::none};
}

void inject_fault(Fault fault) { g_fault.store(fault); }
Fault active_fault() { return g_fault.load(std::memory_order_relaxed); }

}  // namespace debug

}  // namespace trajcast
