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

#include "trajcast/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "trajcast/errors.hpp"

namespace trajcast::scene
{

Template parse_template(const std::string & name)
{
  if (name == "crossing_pedestrians" || name == "crossing") {
    return Template::crossing_pedestrians;
  }
  if (name == "lane_following_vehicle" || name == "lane_following" || name == "lane") {
    return Template::lane_following_vehicle;
  }
  if (name == "ego_with_plan" || name == "ego") {
    return Template::ego_with_plan;
  }
  throw ConfigError("unknown scenario template '" + name +
                    "' (expected crossing_pedestrians, lane_following_vehicle or ego_with_plan)");
}

std::string template_name(Template t)
{
  switch (t) {
    case Template::crossing_pedestrians:
      return "crossing_pedestrians";
    case Template::lane_following_vehicle:
      return "lane_following_vehicle";
    case Template::ego_with_plan:
      return "ego_with_plan";
  }
  return "unknown";
}

std::vector<std::vector<Point2>> simulate_social_force(
  std::vector<Walker> walkers, const SocialForceParams & p, int frames,
  const std::vector<std::vector<Point2>> & movers)
{
  if (p.substeps < 1 || p.dt <= 0.0 || p.relaxation_time <= 0.0 || p.range <= 0.0 || p.vehicle_range <= 0.0) {
    throw ConfigError("social force: dt, relaxation_time, ranges and substeps must be positive");
  }
  for (const auto & m : movers) {
    if (static_cast<int>(m.size()) < frames) {
      throw ContractError("social force: mover track shorter than the episode");
    }
  }
  const std::size_t n = walkers.size();
  std::vector<std::vector<Point2>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].reserve(static_cast<std::size_t>(frames));
    out[i].push_back(walkers[i].pos);
  }
  const double h = p.dt / p.substeps;
  std::vector<Point2> acc(n);
  for (int f = 1; f < frames; ++f) {
    for (int s = 0; s < p.substeps; ++s) {
      const double alpha = static_cast<double>(s) / p.substeps;
      for (std::size_t i = 0; i < n; ++i) {
        const Walker & wi = walkers[i];
        Point2 a = (1.0 / p.relaxation_time) * (wi.desired_vel - wi.vel);
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) {
            continue;
          }
          const Point2 d = wi.pos - walkers[j].pos;
          const double dist = std::hypot(d.x, d.y);
          if (dist > 0.0) {
            a = a + (p.repulsion * std::exp(-dist / p.range) / dist) * d;
          }
        }
        for (const auto & m : movers) {
          const Point2 mp = m[f - 1] + alpha * (m[f] - m[f - 1]);
          const Point2 d = wi.pos - mp;
          const double dist = std::hypot(d.x, d.y);
          if (dist > 0.0) {
            a = a + (p.vehicle_repulsion * std::exp(-dist / p.vehicle_range) / dist) * d;
          }
        }
        acc[i] = a;
      }
      for (std::size_t i = 0; i < n; ++i) {
        walkers[i].vel = walkers[i].vel + h * acc[i];
        walkers[i].pos = walkers[i].pos + h * walkers[i].vel;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      out[i].push_back(walkers[i].pos);
    }
  }
  return out;
}

namespace
{

using Rng = std::mt19937_64;

double uniform(Rng & rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Point2 heading_vec(double theta) { return {std::cos(theta), std::sin(theta)}; }

// Straight run, circular arc of `turn` radians (sign gives direction), straight run.
Polyline make_lane(Point2 start, double heading, double straight1, double turn, double radius, double straight2)
{
  Polyline line{start};
  Point2 p = start + straight1 * heading_vec(heading);
  line.push_back(p);
  if (std::abs(turn) > 1e-9) {
    const double sign = turn > 0 ? 1.0 : -1.0;
    const Point2 center = p + radius * heading_vec(heading + sign * std::numbers::pi / 2);
    const int pieces = std::max(2, static_cast<int>(std::ceil(std::abs(turn) / (3.0 * std::numbers::pi / 180.0))));
    const double start_angle = heading - sign * std::numbers::pi / 2;
    for (int k = 1; k <= pieces; ++k) {
      const double ang = start_angle + turn * k / pieces;
      p = center + radius * heading_vec(ang);
      line.push_back(p);
    }
    heading += turn;
  }
  line.push_back(p + straight2 * heading_vec(heading));
  return line;
}

struct LaneAgent
{
  Polyline lane;
  std::vector<Point2> positions;  // frames 1..t_pred
};

// Constant-speed travel along a lane that bends somewhere near the end of the
// observation window.
LaneAgent lane_vehicle(Rng & rng, const SyntheticSpec & spec, Point2 area_center, double area_half)
{
  const double speed = uniform(rng, 4.0, 8.0);
  const double s0 = uniform(rng, 0.0, 5.0);
  const double obs_travel = speed * spec.social.dt * (spec.t_obs - 1);
  const double straight1 = s0 + obs_travel + uniform(rng, 0.0, 10.0);
  const double turn_mag = uniform(rng, std::numbers::pi / 6, std::numbers::pi / 2);
  const double turn = uniform(rng, 0.0, 1.0) < 0.5 ? -turn_mag : turn_mag;
  const double radius = uniform(rng, 8.0, 20.0);
  const Point2 start{area_center.x + uniform(rng, -area_half, area_half), area_center.y + uniform(rng, -area_half, area_half)};
  const double heading = uniform(rng, -std::numbers::pi, std::numbers::pi);
  const double total = speed * spec.social.dt * spec.t_pred;
  LaneAgent a;
  a.lane = make_lane(start, heading, straight1, turn, radius, total + 20.0);
  for (int t = 1; t <= spec.t_pred; ++t) {
    a.positions.push_back(point_at_arc_length(a.lane, s0 + speed * spec.social.dt * (t - 1)));
  }
  return a;
}

void add_noise(Rng & rng, std::vector<Point2> & pts, double sigma)
{
  if (sigma <= 0.0) {
    return;
  }
  std::normal_distribution<double> n(0.0, sigma);
  for (auto & p : pts) {
    p.x += n(rng);
    p.y += n(rng);
  }
}

AgentTrack make_track(int id, const std::vector<Point2> & pts, std::string kind)
{
  AgentTrack tr;
  tr.agent_id = id;
  tr.kind = std::move(kind);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    tr.points.push_back({static_cast<int>(k + 1), pts[k].x, pts[k].y});
  }
  return tr;
}

void attach_plan(Scenario & s)
{
  const AgentTrack & ego = s.ego();
  for (const auto & p : ego.points) {
    if (p.t > s.t_obs) {
      s.ego_plan.push_back(p);
    }
  }
}

Scenario crossing(Rng & rng, const SyntheticSpec & spec)
{
  Scenario s;
  const double dt = spec.social.dt;
  const double mid = 0.5 * (spec.t_pred - 1) * dt;
  const Point2 center{uniform(rng, -50.0, 50.0), uniform(rng, -50.0, 50.0)};
  std::vector<Walker> walkers;
  for (std::size_t i = 0; i < spec.pedestrians; ++i) {
    const double dir = uniform(rng, -std::numbers::pi, std::numbers::pi);
    const double speed = uniform(rng, 1.0, 1.5);
    const Point2 v = speed * heading_vec(dir);
    const Point2 offset{uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0)};
    walkers.push_back({center + offset - mid * v, v, v});
  }
  const auto paths = simulate_social_force(walkers, spec.social, spec.t_pred);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    s.tracks.push_back(make_track(static_cast<int>(i), paths[i], "pedestrian"));
  }
  return s;
}

Scenario lane_following(Rng & rng, const SyntheticSpec & spec)
{
  Scenario s;
  HdMap map;
  const Point2 center{uniform(rng, -50.0, 50.0), uniform(rng, -50.0, 50.0)};
  for (std::size_t i = 0; i < spec.vehicles; ++i) {
    LaneAgent a = lane_vehicle(rng, spec, center, 20.0);
    add_noise(rng, a.positions, spec.lane_noise);
    map.centerlines.push_back(std::move(a.lane));
    s.tracks.push_back(make_track(static_cast<int>(i), a.positions, "vehicle"));
  }
  s.map = std::move(map);
  return s;
}

Scenario ego_with_plan(Rng & rng, const SyntheticSpec & spec)
{
  Scenario s;
  HdMap map;
  const double dt = spec.social.dt;
  const Point2 start{uniform(rng, -50.0, 50.0), uniform(rng, -50.0, 50.0)};
  const double heading = uniform(rng, -std::numbers::pi, std::numbers::pi);

  // Ego: constant speed while observed, then a random acceleration or braking.
  const double v0 = uniform(rng, 3.0, 7.0);
  const double accel = uniform(rng, -2.5, 1.5);
  std::vector<double> arc{uniform(rng, 0.0, 5.0)};
  double v = v0;
  for (int t = 2; t <= spec.t_pred; ++t) {
    if (t > spec.t_obs) {
      v = std::max(0.0, v + accel * dt);
    }
    arc.push_back(arc.back() + v * dt);
  }
  const double bend = uniform(rng, -std::numbers::pi / 6, std::numbers::pi / 6);
  Polyline ego_lane = make_lane(start, heading, arc[spec.t_obs - 1] + uniform(rng, 5.0, 25.0), bend, 30.0, arc.back() + 40.0);
  std::vector<Point2> ego_pts;
  for (double sarc : arc) {
    ego_pts.push_back(point_at_arc_length(ego_lane, sarc));
  }
  add_noise(rng, ego_pts, spec.lane_noise);

  std::vector<std::vector<Point2>> movers{ego_pts};
  std::vector<AgentTrack> vehicle_tracks;
  const Point2 obs_pos = ego_pts[spec.t_obs - 1];
  for (std::size_t i = 0; i < spec.vehicles; ++i) {
    LaneAgent a = lane_vehicle(rng, spec, obs_pos, 25.0);
    add_noise(rng, a.positions, spec.lane_noise);
    movers.push_back(a.positions);
    map.centerlines.push_back(std::move(a.lane));
    vehicle_tracks.push_back(make_track(static_cast<int>(1 + i), a.positions, "vehicle"));
  }

  // Pedestrians cross the ego lane a little ahead of where the ego is at t_obs.
  std::vector<Walker> walkers;
  const double s_obs = arc[spec.t_obs - 1];
  for (std::size_t i = 0; i < spec.pedestrians; ++i) {
    const double sc = s_obs + uniform(rng, 3.0, 15.0);
    const Point2 c = point_at_arc_length(ego_lane, sc);
    const Point2 ahead = point_at_arc_length(ego_lane, sc + 0.5);
    Point2 tangent = ahead - c;
    const double tl = std::hypot(tangent.x, tangent.y);
    tangent = (1.0 / tl) * tangent;
    const Point2 normal{-tangent.y, tangent.x};
    const double side = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    const Point2 vdes = uniform(rng, 1.0, 1.6) * (-side * normal) + uniform(rng, -0.3, 0.3) * tangent;
    const double t_cross = uniform(rng, spec.t_obs - 2.0, static_cast<double>(spec.t_pred));
    walkers.push_back({c - ((t_cross - 1.0) * dt) * vdes, vdes, vdes});
  }
  const auto paths = simulate_social_force(walkers, spec.social, spec.t_pred, movers);

  s.tracks.push_back(make_track(0, ego_pts, "vehicle"));
  for (auto & tr : vehicle_tracks) {
    s.tracks.push_back(std::move(tr));
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    s.tracks.push_back(make_track(static_cast<int>(1 + spec.vehicles + i), paths[i], "pedestrian"));
  }
  map.centerlines.insert(map.centerlines.begin(), std::move(ego_lane));
  s.map = std::move(map);
  return s;
}

}  // namespace

std::vector<Scenario> generate_synthetic(const SyntheticSpec & spec, std::uint64_t seed)
{
  if (spec.count < 1) {
    throw ConfigError("synthetic generation needs count >= 1");
  }
  if (spec.t_obs < 1 || spec.t_obs >= spec.t_pred) {
    throw ConfigError("synthetic generation needs 1 <= t_obs < t_pred");
  }
  if (spec.kind == Template::crossing_pedestrians && spec.pedestrians < 1) {
    throw ConfigError("crossing_pedestrians needs pedestrians >= 1");
  }
  if (spec.kind == Template::lane_following_vehicle && spec.vehicles < 1) {
    throw ConfigError("lane_following_vehicle needs vehicles >= 1");
  }
  const std::string prefix = spec.id_prefix.empty() ? template_name(spec.kind) : spec.id_prefix;
  std::vector<Scenario> out;
  for (std::size_t k = 0; k < spec.count; ++k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(k)};
    Rng rng(seq);
    Scenario s;
    switch (spec.kind) {
      case Template::crossing_pedestrians:
        s = crossing(rng, spec);
        break;
      case Template::lane_following_vehicle:
        s = lane_following(rng, spec);
        break;
      case Template::ego_with_plan:
        s = ego_with_plan(rng, spec);
        break;
    }
    s.id = prefix + "_" + std::to_string(k);
    s.t_obs = spec.t_obs;
    s.t_pred = spec.t_pred;
    s.ego_id = 0;
    attach_plan(s);
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace trajcast::scene
