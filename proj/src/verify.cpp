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

#include "trajcast/verify.hpp"

#include <random>

#include "trajcast/env_net.hpp"
#include "trajcast/ops.hpp"
#include "trajcast/recurrent.hpp"
#include "trajcast/synthetic.hpp"

namespace trajcast::verify
{

namespace
{

Tensor random_tensor(Shape shape, std::mt19937_64 & rng, double scale = 1.0)
{
  std::normal_distribution<double> d(0.0, scale);
  Tensor t(std::move(shape));
  for (auto & v : t.data()) {
    v = d(rng);
  }
  return t;
}

/// Scalar loss sum(x * w) with fixed random weights, so every output entry matters.
struct Weighted
{
  std::uint64_t seed;
  Var operator()(Graph & g, Var x) const
  {
    std::mt19937_64 rng(seed);
    return sum(mul(x, g.constant(random_tensor(x.shape(), rng))));
  }
};

void add_named(std::vector<GradCheckResult> & out, const std::string & group, std::vector<GradCheckResult> res)
{
  GradCheckResult merged;
  merged.group = group;
  for (const auto & r : res) {
    merged.checked += r.checked;
    merged.failures += r.failures;
    merged.worst_rel_error = std::max(merged.worst_rel_error, r.worst_rel_error);
  }
  out.push_back(merged);
}

}  // namespace

model::ModelConfig toy_model_config()
{
  model::ModelConfig c;
  c.modalities = 2;
  c.noise_dim = 2;
  c.embed = 3;
  c.gru_hidden = 4;
  c.lstm_hidden = 3;
  c.conv_widths = {4, 4, 4};
  c.raster.height = c.raster.width = 32;
  c.raster.extent_h = c.raster.extent_w = 40.0;
  c.raster.half_width = 2.0;
  c.roi.half_extent = 6.0;
  c.roi.bins = 2;
  return c;
}

model::Sample toy_model_sample(const model::ModelConfig & cfg, std::uint64_t seed)
{
  scene::SyntheticSpec spec;
  spec.kind = scene::Template::ego_with_plan;
  spec.t_obs = 3;
  spec.t_pred = 5;
  spec.vehicles = 1;
  spec.pedestrians = 0;
  const auto s = scene::generate_synthetic(spec, seed);
  return model::make_sample(scene::to_relative_frame(s.front()), cfg);
}

std::vector<GradCheckResult> gradient_suite(std::uint64_t seed, const GradCheckOptions & opt)
{
  std::vector<GradCheckResult> out;
  std::mt19937_64 rng(seed);
  const Weighted w{seed ^ 0x9e3779b97f4a7c15ULL};
  auto unary = [&](const std::string & name, Shape shape, auto fn) {
    add_named(out, "op." + name,
              check_input_gradients([&](Graph & g, std::span<const Var> in) { return w(g, fn(in[0])); },
                                    {random_tensor(std::move(shape), rng)}, opt));
  };
  auto binary = [&](const std::string & name, Shape a, Shape b, auto fn) {
    add_named(out, "op." + name,
              check_input_gradients([&](Graph & g, std::span<const Var> in) { return w(g, fn(in[0], in[1])); },
                                    {random_tensor(std::move(a), rng), random_tensor(std::move(b), rng)}, opt));
  };

  binary("matmul", {3, 4}, {4, 2}, [](Var a, Var b) { return matmul(a, b); });
  add_named(out, "op.linear",
            check_input_gradients(
              [&](Graph & g, std::span<const Var> in) { return w(g, linear(in[0], in[1], in[2])); },
              {random_tensor({3, 4}, rng), random_tensor({5, 4}, rng), random_tensor({1, 5}, rng)}, opt));
  binary("add", {3, 4}, {3, 4}, [](Var a, Var b) { return add(a, b); });
  binary("sub", {3, 4}, {3, 4}, [](Var a, Var b) { return sub(a, b); });
  binary("mul", {3, 4}, {3, 4}, [](Var a, Var b) { return mul(a, b); });
  binary("concat", {3, 2}, {3, 4}, [](Var a, Var b) { return concat({a, b}, 1); });
  unary("scale", {3, 4}, [](Var x) { return add_scalar(scale(x, -1.7), 0.3); });
  unary("sigmoid", {3, 4}, [](Var x) { return sigmoid(x); });
  unary("tanh", {3, 4}, [](Var x) { return tanh(x); });
  unary("relu", {3, 4}, [](Var x) { return relu(x); });
  unary("slice_cols", {3, 5}, [](Var x) { return slice_cols(x, 1, 4); });
  unary("select_rows", {4, 3}, [](Var x) { return select_rows(x, {3, 0, 3}); });
  unary("maxpool_rows", {5, 3}, [](Var x) { return maxpool_rows(x); });
  unary("repeat_rows", {1, 3}, [](Var x) { return repeat_rows(x, 4); });
  unary("row_sum", {3, 4}, [](Var x) { return row_sum(x); });
  unary("reshape", {3, 4}, [](Var x) { return reshape(x, {2, 6}); });

  {
    ParamStore store;
    const auto lstm = nn::LstmCell::create(store, "lstm", 3, 4, rng);
    const auto gru = nn::GruCell::create(store, "gru", 3, 4, rng);
    const Tensor xs = random_tensor({3, 3}, rng);
    auto loss = [&](Graph & g) {
      std::vector<Var> steps;
      for (int t = 0; t < 3; ++t) {
        steps.push_back(g.constant(xs));
      }
      const auto ls = lstm.unroll(g, steps, lstm.zero_state(g, 3));
      const auto gs = gru.unroll(g, steps, gru.zero_state(g, 3));
      return add(w(g, add(ls.back().h, ls.back().c)), w(g, gs.back()));
    };
    for (auto & r : check_param_gradients(loss, store, opt, [](const std::string & n) { return n.substr(0, n.find('.')); })) {
      r.group = "cell." + r.group;
      out.push_back(r);
    }
  }

  add_named(out, "env.conv2d",
            check_input_gradients(
              [&](Graph & g, std::span<const Var> in) { return w(g, nn::conv2d(in[0], in[1], in[2], 3, 2, 1)); },
              {random_tensor({2, 6, 6}, rng), random_tensor({3, 18}, rng, 0.5), random_tensor({1, 3}, rng)}, opt));
  {
    raster::RasterConfig rc;
    rc.height = rc.width = 64;
    rc.extent_h = rc.extent_w = 32.0;
    const auto geo = nn::FeatureGeometry::from_raster(rc, {0.3, -0.2, 0.0}, 8);
    nn::RoiConfig roi;
    roi.half_extent = 3.0;
    roi.bins = 2;
    std::uniform_real_distribution<double> pos(-10.0, 10.0);
    Tensor p({3, 2});
    for (auto & v : p.data()) {
      v = pos(rng);
    }
    add_named(out, "env.roi_align",
              check_input_gradients(
                [&](Graph & g, std::span<const Var> in) { return w(g, nn::roi_align(in[0], in[1], geo, roi)); },
                {random_tensor({2, 8, 8}, rng), p}, opt));
  }

  {
    const auto cfg = toy_model_config();
    model::Forecaster f(cfg, seed);
    const auto s = toy_model_sample(cfg, seed);
    std::mt19937_64 nrng(seed + 1);
    const auto z = f.draw_noise(s, nrng);
    auto loss = [&](Graph & g) { return f.loss(g, s, f.rollout(g, s, z)).loss; };
    for (auto & r : check_param_gradients(loss, f.params(), opt, group_by_prefix)) {
      r.group = "model." + r.group;
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace trajcast::verify
