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

#ifndef TRAJCAST__SYNTHETIC_HPP_
#define TRAJCAST__SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trajcast/scene.hpp"

namespace trajcast::scene
{

enum class Template { crossing_pedestrians, lane_following_vehicle, ego_with_plan };

/// Accepts the full names and the short forms "crossing", "lane", "ego".
Template parse_template(const std::string & name);
std::string template_name(Template t);

struct SocialForceParams
{
  double relaxation_time = 0.5;  // s
  double repulsion = 2.0;        // m/s^2 at zero distance
  double range = 0.8;            // m
  double dt = 0.4;               // s between recorded frames
  int substeps = 8;              // integration steps per frame
  double vehicle_repulsion = 6.0;
  double vehicle_range = 1.5;
};

struct Walker
{
  Point2 pos;
  Point2 vel;
  Point2 desired_vel;
};

/// Two-term social-force integration (relaxation toward the desired velocity plus
/// exponential pairwise repulsion), semi-implicit Euler with `substeps` steps per
/// frame. `movers[k][f]` is an externally driven repulsor at frame f, linearly
/// interpolated between frames. Returns walker positions for frames 0..frames-1.
std::vector<std::vector<Point2>> simulate_social_force(
  std::vector<Walker> walkers, const SocialForceParams & params, int frames,
  const std::vector<std::vector<Point2>> & movers = {});

struct SyntheticSpec
{
  Template kind = Template::crossing_pedestrians;
  std::size_t count = 1;
  int t_obs = 8;
  int t_pred = 20;
  std::size_t pedestrians = 4;
  std::size_t vehicles = 2;
  /// Gaussian position noise in meters added to lane-following vehicles.
  double lane_noise = 0.0;
  SocialForceParams social;
  /// Scenario ids are "<prefix>_<index>"; empty means the template name.
  std::string id_prefix;
};

/// Deterministic per seed. Agent 0 is the ego in every template and carries an
/// ego plan equal to its simulated future.
std::vector<Scenario> generate_synthetic(const SyntheticSpec & spec, std::uint64_t seed);

}  // namespace trajcast::scene

#endif  // TRAJCAST__SYNTHETIC_HPP_
