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

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "trajcast/adam.hpp"
#include "trajcast/errors.hpp"
#include "trajcast/gradcheck.hpp"
#include "trajcast/model.hpp"
#include "trajcast/ops.hpp"

using namespace trajcast;
using namespace trajcast::model;

namespace
{

ModelConfig toy_config(std::size_t modalities = 2)
{
  ModelConfig c;
  c.modalities = modalities;
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

HdMap straight_map(double y)
{
  HdMap m;
  m.centerlines.push_back({{-30.0, y}, {30.0, y}});
  m.centerlines.push_back({{0.0, -30.0}, {2.0, 30.0}});
  return m;
}

/// Ego (id 7) driving east with a plan, a pedestrian (id 3) and a cyclist (id 5).
scene::Scenario toy_scenario(int t_obs = 3, int t_pred = 5)
{
  scene::Scenario s;
  s.id = "toy";
  s.t_obs = t_obs;
  s.t_pred = t_pred;
  s.ego_id = 7;
  scene::AgentTrack ego{7, {}, "vehicle"}, ped{3, {}, ""}, cyc{5, {}, ""};
  for (int t = 1; t <= t_pred; ++t) {
    const double td = t;
    ego.points.push_back({t, -6.0 + 1.5 * td, 0.2 * std::sin(td)});
    ped.points.push_back({t, 2.0 + 0.1 * td * td, -4.0 + 0.8 * td});
    cyc.points.push_back({t, 5.0 - 1.1 * td, 3.0 + 0.3 * std::cos(td)});
  }
  for (int t = t_obs + 1; t <= t_pred; ++t) {
    s.ego_plan.push_back(ego.points[static_cast<std::size_t>(t - 1)]);
  }
  s.tracks = {ego, ped, cyc};
  s.map = straight_map(0.5);
  return s;
}

std::vector<Tensor> noise_for(const Forecaster & f, const Sample & s, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  return f.draw_noise(s, rng);
}

bool any_nonzero(const Tensor & t)
{
  return std::any_of(t.data().begin(), t.data().end(), [](double v) { return v != 0.0; });
}

}  // namespace

TEST_CASE("attention gates the interaction feature")
{
  ParamStore store;
  std::mt19937_64 rng(1);
  const nn::PredictionNet net = nn::PredictionNet::create(store, {3, 12, 3, 2}, rng);
  std::normal_distribution<double> d(0.0, 2.0);
  Tensor p({4, 2}), fst({1, 12});
  for (auto & v : p.data()) {
    v = d(rng);
  }
  for (auto & v : fst.data()) {
    v = d(rng);
  }
  Graph g;
  const Tensor q = net.attention(g, g.constant(p), g.constant(fst)).value();
  CHECK(q.shape() == Shape{4, 12});
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t c = 0; c < 12; ++c) {
      CHECK(std::abs(q.at(i, c)) <= std::abs(fst.at(0, c)));
    }
  }
  CHECK_FALSE(any_nonzero(net.attention(g, g.constant(p), g.constant(Tensor::zeros({1, 12}))).value()));
  store.get("pred.attn.weight").value.fill(0.0);
  store.get("pred.attn.bias").value.fill(0.0);
  Graph g2;
  const Tensor half = net.attention(g2, g2.constant(p), g2.constant(fst)).value();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t c = 0; c < 12; ++c) {
      CHECK(half.at(i, c) == 0.5 * fst.at(0, c));
    }
  }
  CHECK_THROWS_AS(net.attention(g, g.constant(p), g.constant(Tensor::zeros({1, 11}))), DimensionError);
}

TEST_CASE("encoder shares weights across agents and differentiates to the displacement embedding")
{
  ParamStore store;
  std::mt19937_64 rng(2);
  const nn::PredictionNet net = nn::PredictionNet::create(store, {3, 12, 3, 2}, rng);
  const Tensor disp = Tensor::matrix({{0.3, -0.2}, {0.3, -0.2}, {1.0, 0.5}});
  const Tensor v({3, 3}, 0.1), q({3, 12}, -0.2);
  auto run = [&](Graph & g) {
    nn::LstmState s = net.encoder().zero_state(g, 3);
    for (int t = 0; t < 3; ++t) {
      s = net.encode_step(g, net.displacement_embed(g, g.constant(disp)), g.constant(v), g.constant(q), s);
    }
    return s;
  };
  Graph g;
  const Tensor h = run(g).h.value();
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(h.at(0, c) == h.at(1, c));
  }
  Graph g2;
  CHECK(run(g2).h.value() == h);
  const auto results = check_param_gradients([&](Graph & gg) { return sum(run(gg).h); }, store, {},
                                             [](const std::string & n) { return n; });
  for (const auto & r : results) {
    if (r.group.rfind("pred.disp", 0) == 0) {
      CHECK_MESSAGE(r.passed(), r.group << " worst " << r.worst_rel_error);
      CHECK(r.checked > 0);
    }
  }
}

TEST_CASE("decoder initialisation maps the encoder state")
{
  ParamStore store;
  std::mt19937_64 rng(3);
  const nn::PredictionNet net = nn::PredictionNet::create(store, {3, 12, 3, 2}, rng);
  Tensor & w = store.get("pred.noise.weight").value;
  w.fill(0.0);
  for (std::size_t k = 0; k < 3; ++k) {
    w.at(k, k) = 1.0;
  }
  store.get("pred.noise.bias").value.fill(0.0);
  const Tensor he = Tensor::matrix({{0.1, -0.4, 0.9}, {2.0, 0.0, -1.0}});
  Graph g;
  const auto s = net.init_decoder(g, g.constant(he), g.constant(Tensor::zeros({2, 2})));
  CHECK(s.h.value() == he);
  CHECK_FALSE(any_nonzero(s.c.value()));
}

TEST_CASE("rollout contracts")
{
  const ModelConfig cfg = toy_config();
  Forecaster f(cfg, 4);
  auto sc = toy_scenario();
  const Sample s = make_sample(sc, cfg);
  Graph g;
  CHECK_THROWS_AS(f.rollout(g, s, {}), ContractError);
  CHECK_THROWS_AS(f.rollout(g, s, {Tensor::zeros({3, 2}), Tensor::zeros({2, 2})}), DimensionError);

  auto no_plan = sc;
  no_plan.ego_plan.clear();
  const Sample s2 = make_sample(no_plan, cfg);
  CHECK_THROWS_AS(f.rollout(g, s2, noise_for(f, s2, 1)), ContractError);

  auto no_ego = sc;
  no_ego.ego_id.reset();
  no_ego.ego_plan.clear();
  const Sample s3 = make_sample(no_ego, cfg);
  CHECK_THROWS_AS(f.rollout(g, s3, noise_for(f, s3, 1)), ContractError);

  ModelConfig cv = cfg;
  cv.toggles.emf = cv.toggles.etf = false;
  Forecaster f3(cv, 4);
  CHECK_NOTHROW(f3.rollout(g, s3, noise_for(f3, s3, 1)));
}

TEST_CASE("rollouts are deterministic and equal noise gives equal modalities")
{
  const ModelConfig cfg = toy_config(3);
  Forecaster f(cfg, 5);
  const Sample s = make_sample(toy_scenario(), cfg);
  auto z = noise_for(f, s, 9);
  const auto a = f.predict(s, z);
  const auto b = f.predict(s, z);
  for (std::size_t h = 0; h < 3; ++h) {
    CHECK(a.modalities[h] == b.modalities[h]);
  }
  CHECK(a.modalities[0] != a.modalities[1]);
  z[2] = z[0];
  CHECK(f.predict(s, z).modalities[2] == a.modalities[0]);
}

TEST_CASE("output head controls integration")
{
  const ModelConfig cfg = toy_config(1);
  Forecaster f(cfg, 6);
  const Sample s = make_sample(toy_scenario(3, 7), cfg);
  const auto z = noise_for(f, s, 2);
  const Tensor & last = s.positions[2];
  f.params().get("pred.head.weight").value.fill(0.0);
  f.params().get("pred.head.bias").value.fill(0.0);
  const auto frozen = f.predict(s, z).modalities[0];
  for (std::size_t row : s.scored) {
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(frozen.at(row, k, 0) == last.at(row, 0));
      CHECK(frozen.at(row, k, 1) == last.at(row, 1));
    }
  }
  f.params().get("pred.head.bias").value.at(0, 0) = 1.0;
  const auto east = f.predict(s, z).modalities[0];
  for (std::size_t row : s.scored) {
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(std::abs(east.at(row, k, 0) - (last.at(row, 0) + static_cast<double>(k + 1))) <= 1e-12);
      CHECK(east.at(row, k, 1) == last.at(row, 1));
    }
  }
  // The ego follows its plan while the plan feature is on.
  const std::size_t ego = *s.ego_row;
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(east.at(ego, k, 0) == s.plan[k].x);
  }
}

TEST_CASE("predicted positions telescope over emitted displacements")
{
  const ModelConfig cfg = toy_config(2);
  Forecaster f(cfg, 7);
  const Sample s = make_sample(toy_scenario(3, 9), cfg);
  Graph g;
  const Rollout r = f.rollout(g, s, noise_for(f, s, 3));
  for (std::size_t h = 0; h < 2; ++h) {
    for (std::size_t row : s.scored) {
      for (std::size_t c = 0; c < 2; ++c) {
        double acc = s.positions[2].at(row, c), total = 0.0;
        for (const Var & d : r.deltas[h]) {
          acc += d.value().at(row, c);
          total += d.value().at(row, c);
        }
        CHECK(acc == r.positions[h].back().value().at(row, c));
        CHECK(std::abs((r.positions[h].back().value().at(row, c) - s.positions[2].at(row, c)) - total) <= 1e-12);
      }
    }
  }
}

TEST_CASE("agent order permutes outputs")
{
  const ModelConfig cfg = toy_config(2);
  Forecaster f(cfg, 8);
  const auto sc = toy_scenario();
  auto perm_sc = sc;
  perm_sc.tracks = {sc.tracks[2], sc.tracks[0], sc.tracks[1]};
  const std::vector<std::size_t> where{1, 2, 0};  // original row -> permuted row
  const Sample a = make_sample(sc, cfg), b = make_sample(perm_sc, cfg);
  const auto za = noise_for(f, a, 4);
  std::vector<Tensor> zb;
  for (const auto & z : za) {
    Tensor p(z.shape());
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t c = 0; c < z.dim(1); ++c) {
        p.at(where[i], c) = z.at(i, c);
      }
    }
    zb.push_back(p);
  }
  const auto pa = f.predict(a, za), pb = f.predict(b, zb);
  double worst = 0.0;
  for (std::size_t h = 0; h < 2; ++h) {
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t c = 0; c < 2; ++c) {
          worst = std::max(worst, std::abs(pa.modalities[h].at(i, k, c) - pb.modalities[h].at(where[i], k, c)));
        }
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("disabled features isolate their inputs")
{
  const auto sc = toy_scenario(3, 6);
  auto other_map = sc;
  other_map.map = straight_map(-3.0);
  auto other_plan = sc;
  for (auto & p : other_plan.ego_plan) {
    p.y += 2.0;
  }
  const ModelConfig full = toy_config(2);
  const Sample base = make_sample(sc, full), moved_map = make_sample(other_map, full),
               moved_plan = make_sample(other_plan, full);
  REQUIRE(*base.image != *moved_map.image);

  auto scored_rows_equal = [](const PredictionSet & a, const PredictionSet & b) {
    for (std::size_t h = 0; h < a.modalities.size(); ++h) {
      for (std::size_t row : a.scored) {
        for (std::size_t k = 0; k < a.modalities[h].dim(1); ++k) {
          if (a.modalities[h].at(row, k, 0) != b.modalities[h].at(row, k, 0) ||
              a.modalities[h].at(row, k, 1) != b.modalities[h].at(row, k, 1)) {
            return false;
          }
        }
      }
    }
    return true;
  };

  Forecaster on(full, 9);
  const auto z = noise_for(on, base, 5);
  CHECK_FALSE(scored_rows_equal(on.predict(base, z), on.predict(moved_map, z)));
  CHECK_FALSE(scored_rows_equal(on.predict(base, z), on.predict(moved_plan, z)));

  ModelConfig no_ef = full;
  no_ef.toggles.ef = false;
  Forecaster f1(no_ef, 9);
  CHECK(scored_rows_equal(f1.predict(base, z), f1.predict(moved_map, z)));

  ModelConfig no_etf = full;
  no_etf.toggles.etf = false;
  Forecaster f2(no_etf, 9);
  CHECK(scored_rows_equal(f2.predict(base, z), f2.predict(moved_plan, z)));

  // Without the pooled and ego features each agent only sees its own history.
  ModelConfig solo = full;
  solo.toggles = Toggles::all_off();
  Forecaster f3(solo, 9);
  auto shifted = sc;
  for (auto & p : shifted.tracks[2].points) {
    p.x += 4.0;
  }
  const Sample s_shift = make_sample(shifted, solo), s_base = make_sample(sc, solo);
  const auto pa = f3.predict(s_base, z), pb = f3.predict(s_shift, z);
  for (std::size_t h = 0; h < 2; ++h) {
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(pa.modalities[h].at(1, k, 0) == pb.modalities[h].at(1, k, 0));
    }
    CHECK(pa.modalities[h].at(2, 0, 0) != pb.modalities[h].at(2, 0, 0));
  }
}

TEST_CASE("full model gradients match finite differences")
{
  const ModelConfig cfg = toy_config(2);
  Forecaster f(cfg, 10);
  auto sc = toy_scenario(3, 5);
  sc.tracks.pop_back();  // ego plus one scored agent
  const Sample s = make_sample(sc, cfg);
  REQUIRE(s.scored.size() == 1);
  const auto z = noise_for(f, s, 6);
  const auto results = check_param_gradients(
    [&](Graph & g) {
      const Rollout r = f.rollout(g, s, z);
      return f.loss(g, s, r).loss;
    },
    f.params(), {}, group_by_prefix);
  std::vector<std::string> groups;
  for (const auto & r : results) {
    groups.push_back(r.group);
    CHECK_MESSAGE(r.passed(), r.group << " worst " << r.worst_rel_error << " failures " << r.failures);
  }
  for (const auto & expected : {"env_cnn.conv1", "env_cnn.conv3", "env_embed", "ain.pos", "ain.track",
                                "ain.motion", "ain.plan", "ain.gru", "ain.proj", "pred.attn", "pred.disp",
                                "pred.head", "pred.noise", "enc_lstm", "dec_lstm"}) {
    CHECK_MESSAGE(std::find(groups.begin(), groups.end(), expected) != groups.end(), std::string(expected));
  }

  Graph g;
  const Rollout r = f.rollout(g, s, z);
  g.backward(f.loss(g, s, r).loss);
  g.accumulate_param_grads();
  for (const auto & [name, p] : f.params()) {
    CHECK_MESSAGE(any_nonzero(p.grad), name);
  }
}

TEST_CASE("variety loss")
{
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d(0.0, 1.0);
  auto random_steps = [&](std::size_t n, std::size_t T) {
    std::vector<Tensor> out;
    for (std::size_t k = 0; k < T; ++k) {
      Tensor t({n, 2});
      for (auto & v : t.data()) {
        v = d(rng);
      }
      out.push_back(t);
    }
    return out;
  };
  const std::vector<std::size_t> scored{0, 2};

  SUBCASE("one modality is the mean squared error")
  {
    const auto pred = random_steps(3, 4), truth = random_steps(3, 4);
    Graph g;
    std::vector<Var> traj;
    for (const auto & p : pred) {
      traj.push_back(g.constant(p));
    }
    double mse = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      for (std::size_t row : scored) {
        for (std::size_t c = 0; c < 2; ++c) {
          mse += std::pow(pred[k].at(row, c) - truth[k].at(row, c), 2);
        }
      }
    }
    mse /= 8.0;
    for (auto mode : {nn::VarietyMin::scene, nn::VarietyMin::agent}) {
      const auto l = nn::variety_loss(g, {traj}, truth, scored, mode);
      CHECK(std::abs(l.loss.value().item() - mse) <= 1e-12);
      CHECK(std::abs(l.value - mse) <= 1e-12);
    }
  }

  SUBCASE("an exact modality wins with zero loss")
  {
    const auto truth = random_steps(3, 4);
    Graph g;
    std::vector<std::vector<Var>> preds(3);
    for (std::size_t h = 0; h < 3; ++h) {
      const auto src = h == 1 ? truth : random_steps(3, 4);
      for (const auto & p : src) {
        preds[h].push_back(g.constant(p));
      }
    }
    const auto l = nn::variety_loss(g, preds, truth, scored, nn::VarietyMin::scene);
    CHECK(l.value == 0.0);
    CHECK(l.winners == std::vector<std::size_t>{1});
  }

  SUBCASE("contract errors")
  {
    Graph g;
    const auto truth = random_steps(3, 4);
    std::vector<Var> short_traj{g.constant(truth[0])};
    CHECK_THROWS_AS(nn::variety_loss(g, {short_traj}, truth, scored, nn::VarietyMin::scene), ContractError);
    CHECK_THROWS_AS(nn::variety_loss(g, {}, truth, scored, nn::VarietyMin::scene), ContractError);
  }

  SUBCASE("only the winning modality receives gradient")
  {
    const ModelConfig cfg = toy_config(2);
    Forecaster f(cfg, 12);
    const Sample s = make_sample(toy_scenario(3, 6), cfg);
    Graph g2;
    const Rollout r = f.rollout(g2, s, noise_for(f, s, 7));
    const auto l = f.loss(g2, s, r);
    g2.backward(l.loss);
    REQUIRE(l.winners.size() == 1);
    const std::size_t win = l.winners[0], lose = 1 - win;
    for (std::size_t k = 0; k < r.positions[lose].size(); ++k) {
      const Tensor * gl = g2.grad(r.positions[lose][k]);
      CHECK((gl == nullptr || !any_nonzero(*gl)));
      const Tensor * gw = g2.grad(r.positions[win][k]);
      REQUIRE(gw != nullptr);
      CHECK(any_nonzero(*gw));
    }
  }
}

TEST_CASE("distinct noise draws give distinct trajectories after toy training")
{
  const ModelConfig cfg = toy_config(3);
  Forecaster f(cfg, 13);
  const Sample s = make_sample(toy_scenario(3, 6), cfg);
  AdamState adam;
  adam.learning_rate = 1e-2;
  std::mt19937_64 rng(8);
  for (int step = 0; step < 30; ++step) {
    f.params().zero_grad();
    Graph g;
    const auto r = f.rollout(g, s, f.draw_noise(s, rng));
    g.backward(f.loss(g, s, r).loss);
    g.accumulate_param_grads();
    adam_step(f.params(), adam);
  }
  const auto p = f.predict(s, f.draw_noise(s, rng));
  double spread = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = a + 1; b < 3; ++b) {
      spread = std::max(spread, max_abs_diff(p.modalities[a], p.modalities[b]));
    }
  }
  CHECK(spread > 0.0);
}
