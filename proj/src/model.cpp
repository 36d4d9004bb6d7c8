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

#include "trajcast/model.hpp"

#include <cmath>

#include "trajcast/errors.hpp"
#include "trajcast/ops.hpp"

namespace trajcast::model
{

void ModelConfig::validate() const
{
  if (modalities < 1) {
    throw ConfigError("model: modalities must be >= 1");
  }
  if (noise_dim < 1 || embed < 1 || gru_hidden < 1 || lstm_hidden < 1) {
    throw ConfigError("model: layer widths must be positive");
  }
  for (std::size_t w : conv_widths) {
    if (w < 1) {
      throw ConfigError("model: convolution widths must be positive");
    }
  }
  raster.validate();
  if (raster.height % nn::ConvEncoder::kDownsample != 0 || raster.width % nn::ConvEncoder::kDownsample != 0) {
    throw ConfigError("model: raster height and width must be divisible by 8");
  }
  roi.validate();
}

ModelConfig vanilla_lstm_config(ModelConfig base)
{
  base.toggles = Toggles::all_off();
  base.modalities = 1;
  base.use_noise = false;
  return base;
}

ModelConfig noise_lstm_config(std::size_t modalities, ModelConfig base)
{
  base.toggles = Toggles::all_off();
  base.modalities = modalities;
  base.use_noise = true;
  return base;
}

std::vector<Tensor> Sample::future() const
{
  return {positions.begin() + t_obs, positions.end()};
}

Sample make_sample(const scene::Scenario & sc, const ModelConfig & cfg)
{
  sc.validate();
  if (sc.tracks.empty()) {
    throw ContractError("scenario '" + sc.id + "' has no agents");
  }
  Sample s;
  s.id = sc.id;
  s.t_obs = sc.t_obs;
  s.t_pred = sc.t_pred;
  s.origin = sc.origin;
  const std::size_t n = sc.tracks.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto & tr = sc.tracks[i];
    s.agent_ids.push_back(tr.agent_id);
    if (sc.ego_id && tr.agent_id == *sc.ego_id) {
      s.ego_row = i;
    }
    s.has_future.push_back(tr.covers(sc.t_obs + 1, sc.t_pred));
  }
  for (int t = 1; t <= sc.t_pred; ++t) {
    Tensor p({n, 2});
    for (std::size_t i = 0; i < n; ++i) {
      const auto & tr = sc.tracks[i];
      const scene::TrackPoint * pt = s.has_future[i] ? tr.at(t) : tr.at(std::min(t, sc.t_obs));
      p.at(i, 0) = pt->x;
      p.at(i, 1) = pt->y;
    }
    s.positions.push_back(std::move(p));
  }
  for (const auto & wp : sc.ego_plan) {
    s.plan.push_back(wp.pos());
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (s.has_future[i] && !(s.ego_row == i && !s.plan.empty())) {
      s.scored.push_back(i);
    }
  }

  if (cfg.toggles.ef) {
    const Tensor & at_obs = s.positions[static_cast<std::size_t>(sc.t_obs - 1)];
    raster::EgoPose pose;
    if (s.ego_row) {
      pose.x = at_obs.at(*s.ego_row, 0);
      pose.y = at_obs.at(*s.ego_row, 1);
      if (sc.t_obs >= 2) {
        const Tensor & before = s.positions[static_cast<std::size_t>(sc.t_obs - 2)];
        const double dx = pose.x - before.at(*s.ego_row, 0), dy = pose.y - before.at(*s.ego_row, 1);
        pose.heading = (dx == 0.0 && dy == 0.0) ? 0.0 : std::atan2(dy, dx);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        pose.x += at_obs.at(i, 0) / static_cast<double>(n);
        pose.y += at_obs.at(i, 1) / static_cast<double>(n);
      }
    }
    s.raster_pose = pose;
    s.image = raster::rasterize(sc.map ? *sc.map : HdMap{}, pose, cfg.raster).pixels;
  }
  return s;
}

Forecaster::Forecaster(const ModelConfig & cfg, std::uint64_t init_seed) : cfg_(cfg)
{
  cfg_.validate();
  std::mt19937_64 rng(init_seed);
  encoder_ = nn::ConvEncoder::create(store_, "env_cnn", 1, cfg_.conv_widths, rng);
  const std::size_t roi_width = cfg_.conv_widths[2] * cfg_.roi.bins * cfg_.roi.bins;
  env_embed_ = nn::Linear::create(store_, "env_embed", roi_width, cfg_.embed, rng);
  ain_ = nn::InteractionNet::create(store_, "ain", cfg_.interaction_dims(), rng);
  pred_ = nn::PredictionNet::create(store_, cfg_.prediction_dims(), rng);
}

std::vector<Tensor> Forecaster::draw_noise(const Sample & s, std::mt19937_64 & rng) const
{
  std::vector<Tensor> out;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t h = 0; h < cfg_.modalities; ++h) {
    Tensor z({s.agents(), cfg_.noise_dim});
    if (cfg_.use_noise) {
      for (auto & v : z.data()) {
        v = normal(rng);
      }
    }
    out.push_back(std::move(z));
  }
  return out;
}

namespace
{

Tensor row_difference(const Tensor & a, const Tensor & b)
{
  Tensor d(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = a[i] - b[i];
  }
  return d;
}

}  // namespace

Rollout Forecaster::rollout(Graph & g, const Sample & s, const std::vector<Tensor> & noise) const
{
  const Toggles & tg = cfg_.toggles;
  const std::size_t n = s.agents();
  const std::size_t E = cfg_.embed;
  const auto t_obs = static_cast<std::size_t>(s.t_obs);
  const auto t_pred = static_cast<std::size_t>(s.t_pred);
  if (n == 0 || s.positions.size() != t_pred) {
    throw ContractError("rollout: malformed sample '" + s.id + "'");
  }
  if (noise.size() != cfg_.modalities) {
    throw ContractError("rollout: expected " + std::to_string(cfg_.modalities) + " noise draws");
  }
  for (const auto & z : noise) {
    if (z.shape() != Shape{n, cfg_.noise_dim}) {
      throw DimensionError("rollout: noise must be " + to_string(Shape{n, cfg_.noise_dim}) + ", got " + to_string(z.shape()));
    }
  }
  if ((tg.emf || tg.etf) && !s.ego_row) {
    throw ContractError("scenario '" + s.id + "' has no ego agent but the ego features are enabled");
  }
  if (tg.etf && s.plan.empty()) {
    throw ContractError("scenario '" + s.id + "' has no ego plan but the ego trajectory feature is enabled");
  }
  const bool plan_used = tg.etf;
  const bool fused = tg.pf || tg.tf || tg.emf;

  Var fm;
  nn::FeatureGeometry geo;
  if (tg.ef) {
    if (!s.image) {
      throw ContractError("sample '" + s.id + "' was built without a map image");
    }
    fm = encoder_.encode(g, g.constant(*s.image));
    geo = nn::FeatureGeometry::from_raster(cfg_.raster, s.raster_pose, nn::ConvEncoder::kDownsample);
  }

  std::vector<std::size_t> pool_rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (cfg_.include_ego_in_pooling || s.ego_row != i) {
      pool_rows.push_back(i);
    }
  }
  if (pool_rows.empty()) {
    pool_rows.push_back(0);
  }
  const bool pool_all = pool_rows.size() == n;
  auto pooled = [&](Var x) { return pool_all ? x : select_rows(x, pool_rows); };

  const Var zero_embed = g.constant(Tensor::zeros({1, E}));
  const Var zero_st = g.constant(Tensor::zeros({1, 3 * E}));
  const Var zero_rows = g.constant(Tensor::zeros({n, E}));

  // Remaining ego waypoints after frame t: observed positions up to t_obs, plan after.
  auto waypoints_after = [&](std::size_t t) {
    const std::size_t k = t_pred - t;
    Tensor w({k, 2});
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t frame = t + 1 + j;
      if (frame <= t_obs) {
        w.at(j, 0) = s.positions[frame - 1].at(*s.ego_row, 0);
        w.at(j, 1) = s.positions[frame - 1].at(*s.ego_row, 1);
      } else {
        w.at(j, 0) = s.plan[frame - t_obs - 1].x;
        w.at(j, 1) = s.plan[frame - t_obs - 1].y;
      }
    }
    return w;
  };

  struct StepInput
  {
    Var e_p, v, q;
  };
  // Features at frame t from positions P, per-agent displacement D and the hidden
  // states of the cells about to be stepped.
  auto step_input = [&](std::size_t t, Var P, Var D, Var hidden, Var & h_gru) {
    Var st = zero_st;
    if (fused) {
      const Var o = tg.pf ? ain_.position_feature(g, pooled(P)) : zero_embed;
      const Var r = tg.tf ? ain_.tracking_feature(g, pooled(hidden)) : zero_embed;
      const Var m = tg.emf ? ain_.ego_motion_feature(g, select_rows(D, {*s.ego_row})) : zero_embed;
      const auto out = ain_.fuse(g, o, r, m, h_gru);
      st = out.st;
      h_gru = out.h_gru;
    }
    const Var f = tg.etf ? ain_.ego_plan_feature(g, g.constant(waypoints_after(t))) : zero_embed;
    const Var fst = nn::InteractionNet::assemble_fst(f, st);
    StepInput in;
    in.q = pred_.attention(g, P, fst);
    in.v = tg.ef ? env_embed_(g, nn::roi_align(fm, P, geo, cfg_.roi)) : zero_rows;
    in.e_p = pred_.displacement_embed(g, D);
    return in;
  };

  Rollout out;
  Var h_gru = ain_.zero_state(g);
  nn::LstmState enc = pred_.encoder().zero_state(g, n);
  StepInput last{};
  for (std::size_t t = 1; t <= t_obs; ++t) {
    const Var P = g.constant(s.positions[t - 1]);
    const Var D = g.constant(t == 1 ? Tensor::zeros({n, 2}) : row_difference(s.positions[t - 1], s.positions[t - 2]));
    last = step_input(t, P, D, enc.h, h_gru);
    enc = pred_.encode_step(g, last.e_p, last.v, last.q, enc);
  }
  out.encoder_hidden = enc.h;

  // The ego row follows the plan during decoding when the plan feature is on.
  Var keep_mask;
  std::vector<Var> plan_rows;
  if (plan_used) {
    Tensor mask({n, 2}, 1.0);
    mask.at(*s.ego_row, 0) = mask.at(*s.ego_row, 1) = 0.0;
    keep_mask = g.constant(std::move(mask));
    for (const auto & wp : s.plan) {
      Tensor p({n, 2}, 0.0);
      p.at(*s.ego_row, 0) = wp.x;
      p.at(*s.ego_row, 1) = wp.y;
      plan_rows.push_back(g.constant(std::move(p)));
    }
  }

  const Var obs_last = g.constant(s.positions[t_obs - 1]);
  const Var obs_prev = t_obs >= 2 ? g.constant(s.positions[t_obs - 2]) : obs_last;
  for (std::size_t h = 0; h < cfg_.modalities; ++h) {
    nn::LstmState dec = pred_.init_decoder(g, enc.h, g.constant(noise[h]));
    Var gru_state = h_gru;
    Var current = obs_last, previous = obs_prev;
    std::vector<Var> traj, deltas;
    for (std::size_t t = t_obs; t < t_pred; ++t) {
      StepInput in = last;
      if (t > t_obs) {
        in = step_input(t, current, sub(current, previous), dec.h, gru_state);
      }
      const auto step = pred_.decode_step(g, in.e_p, in.v, in.q, dec, current);
      dec = step.state;
      Var next = step.next;
      if (plan_used) {
        next = add(mul(next, keep_mask), plan_rows[t - t_obs]);
      }
      previous = current;
      current = next;
      traj.push_back(next);
      deltas.push_back(step.delta);
    }
    out.positions.push_back(std::move(traj));
    out.deltas.push_back(std::move(deltas));
  }
  return out;
}

nn::VarietyLoss Forecaster::loss(Graph & g, const Sample & s, const Rollout & r) const
{
  return nn::variety_loss(g, r.positions, s.future(), s.scored, cfg_.variety_min);
}

PredictionSet Forecaster::predict(const Sample & s, const std::vector<Tensor> & noise) const
{
  Graph g;
  const Rollout r = rollout(g, s, noise);
  PredictionSet set;
  set.scenario_id = s.id;
  set.agent_ids = s.agent_ids;
  set.scored = s.scored;
  const std::size_t n = s.agents(), T = s.future_steps();
  for (const auto & traj : r.positions) {
    Tensor m({n, T, 2});
    for (std::size_t k = 0; k < T; ++k) {
      const Tensor & p = traj[k].value();
      for (std::size_t i = 0; i < n; ++i) {
        m.at(i, k, 0) = p.at(i, 0);
        m.at(i, k, 1) = p.at(i, 1);
      }
    }
    set.modalities.push_back(std::move(m));
  }
  return set;
}

}  // namespace trajcast::model
