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

#include <cmath>
#include <random>

#include "doctest.h"
#include "trajcast/env_net.hpp"
#include "trajcast/errors.hpp"
#include "trajcast/gradcheck.hpp"
#include "trajcast/ops.hpp"

using namespace trajcast;
using namespace trajcast::nn;

namespace
{

Tensor random_tensor(Shape shape, std::mt19937_64 & rng, double lo = -1.0, double hi = 1.0)
{
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto & v : t.data()) {
    v = d(rng);
  }
  return t;
}

Var weighted_sum(Graph & g, Var x, const Tensor & w) { return sum(mul(x, g.constant(w))); }

// Direct nested-loop convolution.
Tensor naive_conv(const Tensor & x, const Tensor & w, const Tensor & b, std::size_t k, std::size_t stride, std::size_t pad)
{
  const std::size_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2), cout = w.dim(0);
  const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (wd + 2 * pad - k) / stride + 1;
  Tensor out({cout, oh, ow});
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        double acc = b[o];
        for (std::size_t c = 0; c < cin; ++c) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
              const long iy = static_cast<long>(y * stride + ky) - static_cast<long>(pad);
              const long ix = static_cast<long>(xx * stride + kx) - static_cast<long>(pad);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(wd)) {
                continue;
              }
              acc += w.at(o, (c * k + ky) * k + kx) * x.at(c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
            }
          }
        }
        out.at(o, y, xx) = acc;
      }
    }
  }
  return out;
}

// Dense tent-kernel sampler: sum over every cell of F * max(0, 1-|dy|) * max(0, 1-|dx|).
double dense_bilinear(const Tensor & fm, std::size_t ch, double y, double x)
{
  double acc = 0.0;
  for (std::size_t r = 0; r < fm.dim(1); ++r) {
    for (std::size_t c = 0; c < fm.dim(2); ++c) {
      const double wy = std::max(0.0, 1.0 - std::abs(y - static_cast<double>(r)));
      const double wx = std::max(0.0, 1.0 - std::abs(x - static_cast<double>(c)));
      acc += fm.at(ch, r, c) * wy * wx;
    }
  }
  return acc;
}

// A geometry with one feature cell per meter along both axes, ego cell at (origin, origin).
FeatureGeometry unit_geometry(double origin)
{
  FeatureGeometry geo;
  geo.origin_row = origin;
  geo.origin_col = origin;
  geo.cells_per_meter_row = 1.0;
  geo.cells_per_meter_col = 1.0;
  geo.jacobian = {0.0, -1.0, 1.0, 0.0};
  return geo;
}

}  // namespace

TEST_CASE("conv2d")
{
  std::mt19937_64 rng(3);
  SUBCASE("matches direct convolution")
  {
    for (auto [k, stride, pad] : {std::tuple{3, 2, 1}, std::tuple{3, 1, 1}, std::tuple{2, 1, 0}, std::tuple{3, 2, 0}}) {
      const Tensor x = random_tensor({2, 9, 7}, rng);
      const Tensor w = random_tensor({3, 2 * static_cast<std::size_t>(k * k)}, rng);
      const Tensor b = random_tensor({1, 3}, rng);
      Graph g;
      const Var y = conv2d(g.constant(x), g.constant(w), g.constant(b), k, stride, pad);
      CHECK(max_abs_diff(y.value(), naive_conv(x, w, b, k, stride, pad)) < 1e-12);
    }
  }
  SUBCASE("gradients")
  {
    const Tensor wts = random_tensor({3, 4, 3}, rng);
    auto loss = [&](Graph & g, std::span<const Var> in) { return weighted_sum(g, conv2d(in[0], in[1], in[2], 3, 2, 1), wts); };
    for (const auto & r : check_input_gradients(loss, {random_tensor({2, 7, 6}, rng), random_tensor({3, 18}, rng), random_tensor({1, 3}, rng)}, {}, {"x", "w", "b"})) {
      CAPTURE(r.group);
      CHECK(r.passed());
    }
  }
  SUBCASE("shape errors")
  {
    Graph g;
    CHECK_THROWS_AS(conv2d(g.constant(Tensor::zeros({1, 4, 4})), g.constant(Tensor::zeros({2, 4})), g.constant(Tensor::zeros({1, 2})), 3, 1, 1), DimensionError);
    CHECK_THROWS_AS(conv2d(g.constant(Tensor::zeros({4, 4})), g.constant(Tensor::zeros({2, 9})), g.constant(Tensor::zeros({1, 2})), 3, 1, 1), DimensionError);
  }
}

TEST_CASE("conv encoder")
{
  std::mt19937_64 rng(5);
  ParamStore store;
  const ConvEncoder enc = ConvEncoder::create(store, "env_cnn", 1, {8, 16, 32}, rng);
  CHECK(store.contains("env_cnn.conv1.weight"));
  CHECK(store.get("env_cnn.conv3.weight").value.shape() == Shape{32, 144});

  Graph g;
  const Var out = enc.encode(g, g.constant(random_tensor({1, 224, 224}, rng, 0.0, 1.0)));
  CHECK(out.shape() == Shape{32, 28, 28});
  CHECK_THROWS_AS(enc.encode(g, g.constant(Tensor::zeros({1, 20, 24}))), DimensionError);
  CHECK_THROWS_AS(enc.encode(g, g.constant(Tensor::zeros({2, 16, 16}))), DimensionError);

  SUBCASE("zero image with zero biases encodes to zero")
  {
    for (auto & [name, p] : store) {
      if (name.find(".bias") != std::string::npos) {
        p.value.fill(0.0);
      }
    }
    Graph g2;
    const Var z = enc.encode(g2, g2.constant(Tensor::zeros({1, 224, 224})));
    for (double v : z.value().data()) {
      CHECK(v == 0.0);
    }
  }

  SUBCASE("first-stage kernel gradient on an 8x8 image")
  {
    const Tensor image = random_tensor({1, 8, 8}, rng, 0.0, 1.0);
    ParamStore only_first;
    only_first.add("env_cnn.conv1.weight", store.get("env_cnn.conv1.weight").value);
    auto loss = [&](Graph & g2) {
      const Var w1 = g2.param(only_first.get("env_cnn.conv1.weight"));
      Var x = relu(conv2d(g2.constant(image), w1, g2.param(store.get("env_cnn.conv1.bias")), 3, 2, 1));
      x = relu(conv2d(x, g2.param(store.get("env_cnn.conv2.weight")), g2.param(store.get("env_cnn.conv2.bias")), 3, 2, 1));
      x = relu(conv2d(x, g2.param(store.get("env_cnn.conv3.weight")), g2.param(store.get("env_cnn.conv3.bias")), 3, 2, 1));
      return sum(x);
    };
    for (const auto & r : check_param_gradients(loss, only_first)) {
      CHECK(r.checked == 72);
      CHECK(r.passed());
    }
    store.zero_grad();
  }
}

TEST_CASE("roi align")
{
  std::mt19937_64 rng(11);
  const RoiConfig cfg{2.0, 3, 1};

  SUBCASE("constant map")
  {
    Graph g;
    const Var fm = g.constant(Tensor({2, 28, 28}, 0.75));
    const Var pos = g.constant(Tensor::matrix({{0.0, 0.0}, {3.2, -1.1}}));
    const Var out = roi_align(fm, pos, unit_geometry(14.0), cfg);
    CHECK(out.shape() == Shape{2, 18});
    for (double v : out.value().data()) {
      CHECK(v == doctest::Approx(0.75).epsilon(1e-14));
    }
  }

  SUBCASE("single bin between four cells")
  {
    Tensor fm({1, 4, 4}, 0.0);
    fm.at(0, 2, 2) = 4.0;
    Graph g;
    // center at cells (1.5, 1.5): x = 1.5 - origin, row = origin - y
    const Var out = roi_align(g.constant(fm), g.constant(Tensor::matrix({{-0.5, 0.5}})), unit_geometry(2.0), {0.5, 1, 1});
    CHECK(out.value()[0] == 1.0);
  }

  SUBCASE("1000 random boxes match a dense bilinear sampler")
  {
    std::uniform_real_distribution<double> pos(-18.0, 18.0), half(0.3, 8.0);
    std::uniform_int_distribution<std::size_t> bins(1, 4);
    const FeatureGeometry geo = unit_geometry(14.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Tensor fm = random_tensor({4, 28, 28}, rng);
      const RoiConfig rc{half(rng), bins(rng), 1};
      const double px = pos(rng), py = pos(rng);
      Graph g;
      const Var out = roi_align(g.constant(fm), g.constant(Tensor::matrix({{px, py}})), geo, rc);
      const double side = 2.0 * rc.half_extent;
      const double top = 14.0 - py - side / 2.0, left = 14.0 + px - side / 2.0;
      for (std::size_t ch = 0; ch < 4; ++ch) {
        for (std::size_t a = 0; a < rc.bins; ++a) {
          for (std::size_t b = 0; b < rc.bins; ++b) {
            const double y = top + (a + 0.5) * side / rc.bins;
            const double x = left + (b + 0.5) * side / rc.bins;
            const double expect = dense_bilinear(fm, ch, y, x);
            worst = std::max(worst, std::abs(out.value().at(0, (ch * rc.bins + a) * rc.bins + b) - expect));
          }
        }
      }
    }
    CHECK(worst <= 1e-12);
  }

  SUBCASE("linear in the feature map")
  {
    const Tensor f1 = random_tensor({3, 28, 28}, rng), f2 = random_tensor({3, 28, 28}, rng);
    const Tensor p = random_tensor({4, 2}, rng, -20.0, 20.0);
    Tensor mix(f1.shape());
    for (std::size_t i = 0; i < mix.size(); ++i) {
      mix[i] = 0.5 * f1[i] - 2.0 * f2[i];
    }
    Graph g;
    const FeatureGeometry geo = FeatureGeometry::from_raster({}, {}, 8);
    const RoiConfig rc;
    const Tensor & a = roi_align(g.constant(f1), g.constant(p), geo, rc).value();
    const Tensor & b = roi_align(g.constant(f2), g.constant(p), geo, rc).value();
    const Tensor & m = roi_align(g.constant(mix), g.constant(p), geo, rc).value();
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(std::abs(m[i] - (0.5 * a[i] - 2.0 * b[i])) < 1e-12);
    }
  }

  SUBCASE("one-cell shift on a constant-gradient map")
  {
    // 256 px over 128 m with stride 8: 0.25 cells per meter, so one cell is 4 m.
    raster::RasterConfig rc;
    rc.height = rc.width = 256;
    rc.extent_h = rc.extent_w = 128.0;
    const FeatureGeometry geo = FeatureGeometry::from_raster(rc, {}, 8);
    Tensor fm({1, 32, 32});
    for (std::size_t r = 0; r < 32; ++r) {
      for (std::size_t c = 0; c < 32; ++c) {
        fm.at(0, r, c) = 0.5 * static_cast<double>(r) - 0.25 * static_cast<double>(c);
      }
    }
    const RoiConfig roi{8.0, 3, 1};
    Graph g;
    const Var base = roi_align(g.constant(fm), g.constant(Tensor::matrix({{1.5, -2.5}})), geo, roi);
    const Var east = roi_align(g.constant(fm), g.constant(Tensor::matrix({{5.5, -2.5}})), geo, roi);
    const Var north = roi_align(g.constant(fm), g.constant(Tensor::matrix({{1.5, 1.5}})), geo, roi);
    for (std::size_t i = 0; i < 9; ++i) {
      CHECK(east.value()[i] - base.value()[i] == doctest::Approx(-0.25).epsilon(1e-12));
      CHECK(north.value()[i] - base.value()[i] == doctest::Approx(-0.5).epsilon(1e-12));
    }
  }

  SUBCASE("gradients with respect to map and positions")
  {
    const FeatureGeometry geo = FeatureGeometry::from_raster({}, {}, 8);
    const RoiConfig rc{20.0, 3, 2};
    const Tensor wts = random_tensor({3, 2 * 9}, rng);
    auto loss = [&](Graph & g, std::span<const Var> in) { return weighted_sum(g, roi_align(in[0], in[1], geo, rc), wts); };
    const auto results = check_input_gradients(loss, {random_tensor({2, 28, 28}, rng), random_tensor({3, 2}, rng, -30.0, 30.0)}, {}, {"map", "positions"});
    for (const auto & r : results) {
      CAPTURE(r.group);
      CHECK(r.passed());
    }
  }

  SUBCASE("agents off the map read zero")
  {
    Graph g;
    const Var out = roi_align(g.constant(Tensor({1, 28, 28}, 1.0)), g.constant(Tensor::matrix({{500.0, 0.0}})), FeatureGeometry::from_raster({}, {}, 8), {});
    for (double v : out.value().data()) {
      CHECK(v == 0.0);
    }
  }
}

TEST_CASE("roi embedding")
{
  std::mt19937_64 rng(17);
  ParamStore store;
  const Linear embed = Linear::create(store, "env_embed", 4 * 9, 64, rng);

  SUBCASE("zero features with zero bias")
  {
    store.get("env_embed.bias").value.fill(0.0);
    Graph g;
    const Var v = embed(g, g.constant(Tensor::zeros({2, 36})));
    CHECK(v.shape() == Shape{2, 64});
    for (double x : v.value().data()) {
      CHECK(x == 0.0);
    }
  }

  SUBCASE("selector rows copy chosen entries")
  {
    Tensor & w = store.get("env_embed.weight").value;
    w.fill(0.0);
    store.get("env_embed.bias").value.fill(0.0);
    for (std::size_t r = 0; r < 64; ++r) {
      w.at(r, (r * 7) % 36) = 1.0;
    }
    const Tensor gfeat = random_tensor({1, 36}, rng);
    Graph g;
    const Var v = embed(g, g.constant(gfeat));
    for (std::size_t r = 0; r < 64; ++r) {
      CHECK(v.value()[r] == gfeat[(r * 7) % 36]);
    }
  }

  SUBCASE("end-to-end gradient reaches the convolution kernels")
  {
    ParamStore net;
    ConvEncoder enc = ConvEncoder::create(net, "env_cnn", 1, {2, 3, 4}, rng);
    Linear emb = Linear::create(net, "env_embed", 4 * 4, 5, rng);
    // 32x32 image over 16 m; the stride-8 map is 4x4 cells of 4 m.
    raster::RasterConfig rc;
    rc.height = rc.width = 32;
    rc.extent_h = rc.extent_w = 16.0;
    const FeatureGeometry geo = FeatureGeometry::from_raster(rc, {}, 8);
    const RoiConfig roi{3.0, 2, 1};
    const Tensor image = random_tensor({1, 32, 32}, rng, 0.0, 1.0);
    const Tensor pos = Tensor::matrix({{0.7, -1.3}, {-2.2, 2.9}});
    const Tensor wts = random_tensor({2, 5}, rng);
    auto loss = [&](Graph & g) {
      const Var fm = enc.encode(g, g.constant(image));
      return weighted_sum(g, emb(g, roi_align(fm, g.constant(pos), geo, roi)), wts);
    };
    const auto results = check_param_gradients(loss, net, {}, group_by_prefix);
    REQUIRE(results.size() == 4);
    for (const auto & r : results) {
      CAPTURE(r.group);
      CHECK(r.passed());
    }
    Graph g;
    const Var l = loss(g);
    g.backward(l);
    g.accumulate_param_grads();
    double norm = 0.0;
    for (double v : net.get("env_cnn.conv1.weight").grad.data()) {
      norm += v * v;
    }
    CHECK(norm > 0.0);
  }
}
