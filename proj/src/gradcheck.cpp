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

#include "trajcast/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "trajcast/errors.hpp"

namespace trajcast
{

namespace
{

double normalized_error(double analytic, double numeric, const GradCheckOptions & o)
{
  const double denom = std::max({std::abs(analytic), std::abs(numeric), o.abs_floor / o.rel_tol});
  return std::abs(analytic - numeric) / denom;
}

// Evaluates `f` at value +- h of `slot` and returns the central difference.
template <typename Eval>
double central_difference(double & slot, double h, Eval && f)
{
  const double orig = slot;
  slot = orig + h;
  const double up = f();
  slot = orig - h;
  const double down = f();
  slot = orig;
  return (up - down) / (2.0 * h);
}

template <typename Eval>
double check_entry(double & slot, double analytic, const GradCheckOptions & o, Eval && f)
{
  double err = normalized_error(analytic, central_difference(slot, o.step, f), o);
  if (err > o.rel_tol && o.kink_retry) {
    for (double h : {o.step * 0.1, o.step * 10.0}) {
      err = std::min(err, normalized_error(analytic, central_difference(slot, h, f), o));
    }
  }
  return err;
}

void tally(GradCheckResult & r, double err, const GradCheckOptions & o)
{
  ++r.checked;
  r.worst_rel_error = std::max(r.worst_rel_error, err);
  if (!(err <= o.rel_tol)) {
    ++r.failures;
  }
}

}  // namespace

std::string group_by_prefix(const std::string & name)
{
  auto first = name.find('.');
  if (first == std::string::npos) {
    return name;
  }
  auto second = name.find('.', first + 1);
  return second == std::string::npos ? name.substr(0, first) : name.substr(0, second);
}

std::vector<GradCheckResult> check_input_gradients(const InputLossFn & loss, std::vector<Tensor> inputs,
                                                   const GradCheckOptions & options,
                                                   std::vector<std::string> names)
{
  auto evaluate = [&](bool with_grad, std::vector<Tensor> * grads) {
    Graph g;
    std::vector<Var> leaves;
    for (const auto & t : inputs) {
      leaves.push_back(g.input(t));
    }
    Var out = loss(g, leaves);
    if (with_grad) {
      g.backward(out);
      for (std::size_t k = 0; k < leaves.size(); ++k) {
        const Tensor * gr = g.grad(leaves[k]);
        (*grads)[k] = gr ? *gr : Tensor::zeros(inputs[k].shape());
      }
    }
    return out.value().item();
  };

  std::vector<Tensor> analytic(inputs.size());
  evaluate(true, &analytic);

  std::vector<GradCheckResult> results;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    GradCheckResult r;
    r.group = k < names.size() ? names[k] : "input" + std::to_string(k);
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double err =
        check_entry(inputs[k][i], analytic[k][i], options, [&] { return evaluate(false, nullptr); });
      tally(r, err, options);
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<GradCheckResult> check_param_gradients(const ParamLossFn & loss, ParamStore & params,
                                                   const GradCheckOptions & options, const GroupFn & group)
{
  auto evaluate = [&] {
    Graph g;
    return loss(g).value().item();
  };

  params.zero_grad();
  {
    Graph g;
    Var out = loss(g);
    g.backward(out);
    g.accumulate_param_grads();
  }

  std::map<std::string, GradCheckResult> by_group;
  std::vector<std::string> order;
  for (auto & [name, p] : params) {
    const std::string key = group ? group(name) : name;
    auto [it, inserted] = by_group.try_emplace(key);
    if (inserted) {
      it->second.group = key;
      order.push_back(key);
    }
    const Tensor analytic = p.grad;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      tally(it->second, check_entry(p.value[i], analytic[i], options, evaluate), options);
    }
  }
  params.zero_grad();

  std::vector<GradCheckResult> results;
  for (const auto & key : order) {
    results.push_back(by_group.at(key));
  }
  return results;
}

}  // namespace trajcast
