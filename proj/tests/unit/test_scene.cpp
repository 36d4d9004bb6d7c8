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
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "trajcast/errors.hpp"
#include "trajcast/scene.hpp"
#include "trajcast/synthetic.hpp"

using namespace trajcast;
using namespace trajcast::scene;
namespace fs = std::filesystem;

namespace
{

fs::path scratch_dir(const std::string & name)
{
  fs::path dir = fs::temp_directory_path() / ("trajcast_test_scene_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path & path, const std::string & text)
{
  std::ofstream(path) << text;
  return path;
}

Scenario simple_scenario()
{
  Scenario s;
  s.id = "simple";
  s.t_obs = 2;
  s.t_pred = 4;
  s.ego_id = 0;
  s.tracks.push_back({0, {{1, 4.0, 5.0}, {2, 5.0, 5.0}, {3, 6.0, 5.0}, {4, 7.0, 5.0}}, "vehicle"});
  s.tracks.push_back({1, {{1, 6.0, 7.0}, {2, 6.5, 7.5}, {3, 7.0, 8.0}, {4, 7.5, 8.5}}, ""});
  s.tracks.push_back({2, {{1, -1.0, 0.0}, {2, -1.0, 0.5}}, ""});
  s.ego_plan = {{3, 6.0, 5.0}, {4, 7.0, 5.0}};
  return s;
}

}  // namespace

TEST_CASE("plain text loading")
{
  const fs::path dir = scratch_dir("plain");

  SUBCASE("two-line file gives one agent over two frames")
  {
    const auto path = write_file(dir / "two.txt", "1 0 0.0 0.0\n2 0 1.0 0.0\n");
    LoadOptions opt;
    opt.t_obs = 1;
    opt.t_pred = 2;
    const LoadResult r = load_tracks(path, TrackFormat::plain_text, opt);
    REQUIRE(r.scenarios.size() == 1);
    REQUIRE(r.scenarios[0].tracks.size() == 1);
    CHECK(r.scenarios[0].tracks[0].points.size() == 2);
    CHECK(r.scenarios[0].tracks[0].points[1] == TrackPoint{2, 1.0, 0.0});
    CHECK(r.dropped_agents == 0);
  }

  SUBCASE("agent seen only mid-window is dropped")
  {
    std::string text = "# frame agent x y\n";
    for (int f = 1; f <= 12; ++f) {
      text += std::to_string(f * 10) + " 1 " + std::to_string(f) + ".0 0.0\n";
    }
    text += "30 2 5.0 5.0\n";
    const auto path = write_file(dir / "mid.txt", text);
    LoadOptions opt;
    opt.t_obs = 8;
    opt.t_pred = 12;
    const LoadResult r = load_tracks(path, TrackFormat::plain_text, opt);
    REQUIRE(r.scenarios.size() == 1);
    CHECK(r.dropped_agents == 1);
    CHECK(r.scenarios[0].tracks.size() == 1);
    CHECK(r.scenarios[0].tracks[0].agent_id == 1);
    // sparse frame ids 10, 20, ... map onto consecutive frame indices
    CHECK(r.scenarios[0].tracks[0].points.back().t == 12);
  }

  SUBCASE("agents leaving early are dropped, agents with no future are kept")
  {
    std::string text;
    for (int f = 1; f <= 4; ++f) {
      text += std::to_string(f) + " 1 0 0\n";
      if (f <= 3) {
        text += std::to_string(f) + " 2 1 1\n";
      }
      if (f <= 2) {
        text += std::to_string(f) + " 3 2 2\n";
      }
    }
    const auto path = write_file(dir / "leave.txt", text);
    LoadOptions opt;
    opt.t_obs = 2;
    opt.t_pred = 4;
    const LoadResult r = load_tracks(path, TrackFormat::plain_text, opt);
    REQUIRE(r.scenarios.size() == 1);
    CHECK(r.dropped_agents == 1);
    CHECK(r.scenarios[0].track(1) != nullptr);
    CHECK(r.scenarios[0].track(2) == nullptr);
    CHECK(r.scenarios[0].track(3) != nullptr);
  }

  SUBCASE("malformed line reports its line number")
  {
    const auto path = write_file(dir / "bad.txt", "1 0 0 0\n# comment\n2 0 x 0\n");
    try {
      load_tracks(path, TrackFormat::plain_text, {});
      FAIL("expected a parse error");
    } catch (const ParseError & e) {
      CHECK(e.line() == 3);
    }
    const auto dup = write_file(dir / "dup.txt", "1 0 0 0\n1 0 1 1\n");
    CHECK_THROWS_AS(load_tracks(dup, TrackFormat::plain_text, {}), ParseError);
  }

  SUBCASE("empty file gives no scenarios")
  {
    const auto path = write_file(dir / "empty.txt", "");
    CHECK(load_tracks(path, TrackFormat::plain_text, {}).scenarios.empty());
  }

  SUBCASE("windows advance by the stride")
  {
    std::string text;
    for (int f = 1; f <= 10; ++f) {
      text += std::to_string(f) + " 7 " + std::to_string(f) + " 0\n";
    }
    const auto path = write_file(dir / "stride.txt", text);
    LoadOptions opt;
    opt.t_obs = 2;
    opt.t_pred = 4;
    opt.stride = 2;
    opt.ego_id = 7;
    const LoadResult r = load_tracks(path, TrackFormat::plain_text, opt);
    REQUIRE(r.scenarios.size() == 4);
    CHECK(r.scenarios[1].tracks[0].points[0].x == 3.0);
    CHECK(r.scenarios[1].ego_id == 7);
  }
  fs::remove_all(dir);
}

TEST_CASE("scenario documents round-trip")
{
  const fs::path dir = scratch_dir("roundtrip");
  SyntheticSpec spec;
  spec.kind = Template::ego_with_plan;
  spec.count = 3;
  spec.t_obs = 4;
  spec.t_pred = 9;
  spec.lane_noise = 0.05;
  auto scenarios = generate_synthetic(spec, 11);
  scenarios.push_back(simple_scenario());
  scenarios.push_back(to_relative_frame(scenarios[0]));
  scenarios.back().id = "relative";
  save_scenarios(dir, scenarios);

  const LoadResult loaded = load_scenario_dir(dir);
  REQUIRE(loaded.scenarios.size() == scenarios.size());
  for (const auto & orig : scenarios) {
    const auto it = std::find_if(loaded.scenarios.begin(), loaded.scenarios.end(), [&](const Scenario & s) { return s.id == orig.id; });
    REQUIRE(it != loaded.scenarios.end());
    Scenario copy = *it;
    copy.map_ref = orig.map_ref;
    CHECK(copy == orig);
  }
  const LoadResult single = load_tracks(dir / "simple.json", TrackFormat::scenario_json);
  CHECK(single.scenarios.at(0) == simple_scenario());

  // plain text keeps full precision as well
  save_plain_text(dir / "simple.txt", scenarios[0]);
  LoadOptions opt;
  opt.t_obs = spec.t_obs;
  opt.t_pred = spec.t_pred;
  opt.ego_id = 0;
  const LoadResult plain = load_tracks(dir / "simple.txt", TrackFormat::plain_text, opt);
  REQUIRE(plain.scenarios.size() == 1);
  REQUIRE(plain.scenarios[0].tracks.size() == scenarios[0].tracks.size());
  for (std::size_t i = 0; i < scenarios[0].tracks.size(); ++i) {
    CHECK(plain.scenarios[0].tracks[i].points == scenarios[0].tracks[i].points);
  }

  CHECK_THROWS_AS(save_scenarios(dir, {simple_scenario(), simple_scenario()}), ContractError);
  write_file(dir / "broken.json", R"({"t_obs": 3, "t_pred": 2, "tracks": []})");
  CHECK_THROWS_AS(load_tracks(dir / "broken.json", TrackFormat::scenario_json), ParseError);
  CHECK_THROWS_AS(parse_track_format("csv"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("scenario invariants")
{
  Scenario s = simple_scenario();
  CHECK_NOTHROW(s.validate());
  Scenario gap = s;
  gap.tracks[1].points.erase(gap.tracks[1].points.begin());
  CHECK_THROWS_AS(gap.validate(), ContractError);
  Scenario plan = s;
  plan.ego_plan.pop_back();
  CHECK_THROWS_AS(plan.validate(), ContractError);
  Scenario order = s;
  order.t_obs = 4;
  CHECK_THROWS_AS(order.validate(), ContractError);
}

TEST_CASE("windowing")
{
  for (auto [t_obs, t_pred] : {std::pair{6, 12}, std::pair{20, 50}, std::pair{5, 6}}) {
    Scenario s;
    s.t_obs = t_obs;
    s.t_pred = t_pred;
    AgentTrack tr{3, {}, ""};
    for (int t = 1; t <= t_pred; ++t) {
      tr.points.push_back({t, 0.5 * t, -0.25 * t});
    }
    s.tracks.push_back(tr);
    const Windowed w = window(s);
    CHECK(static_cast<int>(w.observed.size()) == t_obs);
    CHECK(static_cast<int>(w.future.size()) == t_pred - t_obs);
  }

  // partition property on generated scenes: every (agent, frame) appears exactly once
  SyntheticSpec spec;
  spec.kind = Template::ego_with_plan;
  spec.count = 4;
  spec.t_obs = 5;
  spec.t_pred = 11;
  for (const auto & s : generate_synthetic(spec, 3)) {
    const Windowed w = window(s);
    std::size_t entries = 0;
    int expected_t = 1;
    for (const auto * part : {&w.observed, &w.future}) {
      for (const auto & f : *part) {
        CHECK(f.t == expected_t++);
        entries += f.entries.size();
        for (const auto & e : f.entries) {
          const TrackPoint * p = s.track(e.agent_id)->at(f.t);
          REQUIRE(p);
          CHECK(p->x == e.x);
          CHECK(p->y == e.y);
        }
      }
    }
    std::size_t points = 0;
    for (const auto & tr : s.tracks) {
      points += tr.points.size();
    }
    CHECK(entries == points);
    CHECK(expected_t == s.t_pred + 1);
  }
}

TEST_CASE("relative frame")
{
  Scenario s = simple_scenario();
  const Scenario rel = to_relative_frame(s);
  CHECK(rel.ego().at(s.t_obs)->pos() == Point2{0.0, 0.0});
  CHECK(rel.track(1)->at(1)->pos() == Point2{1.0, 2.0});
  CHECK(rel.ego_plan[0].pos() == Point2{1.0, 0.0});
  CHECK(rel.origin == Point2{5.0, 5.0});

  const Scenario twice = to_relative_frame(rel);
  CHECK(twice.tracks == rel.tracks);
  CHECK(twice.ego_plan == rel.ego_plan);

  Scenario no_ego = s;
  no_ego.ego_id.reset();
  no_ego.ego_plan.clear();
  CHECK_THROWS_AS(to_relative_frame(no_ego), ContractError);

  // pairwise distances preserved at every frame
  SyntheticSpec spec;
  spec.kind = Template::ego_with_plan;
  spec.count = 5;
  spec.t_obs = 4;
  spec.t_pred = 8;
  for (const auto & world : generate_synthetic(spec, 19)) {
    const Scenario r = to_relative_frame(world);
    REQUIRE(r.map);
    for (int t = 1; t <= world.t_pred; ++t) {
      for (std::size_t i = 0; i < world.tracks.size(); ++i) {
        for (std::size_t j = i + 1; j < world.tracks.size(); ++j) {
          const auto * a = world.tracks[i].at(t);
          const auto * b = world.tracks[j].at(t);
          if (!a || !b) {
            continue;
          }
          const double dw = distance(a->pos(), b->pos());
          const double dr = distance(r.tracks[i].at(t)->pos(), r.tracks[j].at(t)->pos());
          CHECK(std::abs(dw - dr) <= 1e-9 * std::max(1.0, dw));
        }
      }
    }
  }
}

TEST_CASE("synthetic generation")
{
  SUBCASE("reproducible per seed")
  {
    for (auto kind : {Template::crossing_pedestrians, Template::lane_following_vehicle, Template::ego_with_plan}) {
      SyntheticSpec spec;
      spec.kind = kind;
      spec.count = 3;
      spec.lane_noise = 0.1;
      const auto a = generate_synthetic(spec, 42);
      const auto b = generate_synthetic(spec, 42);
      const auto c = generate_synthetic(spec, 43);
      CHECK(a == b);
      CHECK(a != c);
      for (const auto & s : a) {
        CHECK(s.ego_id == 0);
        CHECK(s.has_plan());
      }
    }
    CHECK_THROWS_AS(parse_template("highway"), ConfigError);
    CHECK(parse_template("crossing") == Template::crossing_pedestrians);
  }

  SUBCASE("lane following without noise stays on a centerline")
  {
    SyntheticSpec spec;
    spec.kind = Template::lane_following_vehicle;
    spec.count = 10;
    spec.vehicles = 3;
    for (const auto & s : generate_synthetic(spec, 5)) {
      REQUIRE(s.map);
      REQUIRE(s.map->centerlines.size() == s.tracks.size());
      for (std::size_t i = 0; i < s.tracks.size(); ++i) {
        for (const auto & p : s.tracks[i].points) {
          CHECK(distance_to_polyline(p.pos(), s.map->centerlines[i]) < 1e-9);
        }
      }
    }
  }

  SUBCASE("no repulsion gives straight constant-velocity lines")
  {
    SyntheticSpec spec;
    spec.kind = Template::crossing_pedestrians;
    spec.count = 5;
    spec.pedestrians = 6;
    spec.social.repulsion = 0.0;
    for (const auto & s : generate_synthetic(spec, 9)) {
      for (const auto & tr : s.tracks) {
        const Point2 v = tr.points[1].pos() - tr.points[0].pos();
        for (std::size_t k = 2; k < tr.points.size(); ++k) {
          const Point2 step = tr.points[k].pos() - tr.points[k - 1].pos();
          CHECK(std::abs(step.x - v.x) < 1e-12);
          CHECK(std::abs(step.y - v.y) < 1e-12);
        }
      }
    }
  }

  SUBCASE("head-on encounter matches a fine-timestep integration")
  {
    SocialForceParams p;
    const int frames = 20;
    const std::vector<Walker> walkers{{{-6.0, 0.0}, {1.3, 0.0}, {1.3, 0.0}}, {{6.0, 0.4}, {-1.3, 0.0}, {-1.3, 0.0}}};
    const auto paths = simulate_social_force(walkers, p, frames);
    double coarse_min = 1e300;
    for (int f = 0; f < frames; ++f) {
      coarse_min = std::min(coarse_min, distance(paths[0][f], paths[1][f]));
    }

    // Independent explicit loop with ten times smaller steps.
    double x[2][2] = {{-6.0, 0.0}, {6.0, 0.4}};
    double v[2][2] = {{1.3, 0.0}, {-1.3, 0.0}};
    const double vd[2][2] = {{1.3, 0.0}, {-1.3, 0.0}};
    const int fine = p.substeps * 10;
    const double h = p.dt / fine;
    double fine_min = std::hypot(x[0][0] - x[1][0], x[0][1] - x[1][1]);
    for (int f = 1; f < frames; ++f) {
      for (int s = 0; s < fine; ++s) {
        double a[2][2];
        for (int i = 0; i < 2; ++i) {
          const int j = 1 - i;
          const double dx = x[i][0] - x[j][0], dy = x[i][1] - x[j][1];
          const double d = std::sqrt(dx * dx + dy * dy);
          const double mag = p.repulsion * std::exp(-d / p.range);
          for (int k = 0; k < 2; ++k) {
            a[i][k] = (vd[i][k] - v[i][k]) / p.relaxation_time + mag * (k == 0 ? dx : dy) / d;
          }
        }
        for (int i = 0; i < 2; ++i) {
          for (int k = 0; k < 2; ++k) {
            v[i][k] += h * a[i][k];
            x[i][k] += h * v[i][k];
          }
        }
      }
      fine_min = std::min(fine_min, std::hypot(x[0][0] - x[1][0], x[0][1] - x[1][1]));
    }
    MESSAGE("coarse min distance " << coarse_min << ", fine " << fine_min);
    CHECK(coarse_min > 0.4);
    CHECK(std::abs(coarse_min - fine_min) <= 0.05 * fine_min);
  }
}
