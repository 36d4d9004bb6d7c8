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

#ifndef TRAJCAST__SCENE_HPP_
#define TRAJCAST__SCENE_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trajcast/hd_map.hpp"

namespace trajcast::scene
{

/// One observation of an agent. `t` is the 1-based frame index within the scenario.
struct TrackPoint
{
  int t = 0;
  double x = 0.0;
  double y = 0.0;

  Point2 pos() const { return {x, y}; }
  friend bool operator==(const TrackPoint &, const TrackPoint &) = default;
};

struct AgentTrack
{
  int agent_id = 0;
  std::vector<TrackPoint> points;
  /// Opaque label such as "pedestrian" or "vehicle"; carried through, never interpreted.
  std::string kind;

  const TrackPoint * at(int t) const;
  bool covers(int first, int last) const;
  friend bool operator==(const AgentTrack &, const AgentTrack &) = default;
};

struct Scenario
{
  std::string id;
  std::vector<AgentTrack> tracks;
  std::optional<int> ego_id;
  /// Frames t_obs+1..t_pred when present.
  std::vector<TrackPoint> ego_plan;
  /// Path of the map file as written in the source document.
  std::optional<std::string> map_ref;
  std::optional<HdMap> map;
  int t_obs = 0;
  int t_pred = 0;
  /// World offset already subtracted from every coordinate (zero in world frame).
  Point2 origin;

  const AgentTrack * track(int agent_id) const;
  const AgentTrack & ego() const;
  bool has_plan() const { return !ego_plan.empty(); }

  /// Throws ContractError when any scenario invariant is broken.
  void validate() const;
  friend bool operator==(const Scenario &, const Scenario &) = default;
};

struct FrameEntry
{
  int agent_id = 0;
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const FrameEntry &, const FrameEntry &) = default;
};

struct Frame
{
  int t = 0;
  std::vector<FrameEntry> entries;
  friend bool operator==(const Frame &, const Frame &) = default;
};

struct Windowed
{
  std::vector<Frame> observed;
  std::vector<Frame> future;
};

/// Split a scenario into frames 1..t_obs and t_obs+1..t_pred. Agents without a
/// future simply have no entries in the future frames.
Windowed window(const Scenario & s);

enum class TrackFormat { plain_text, scenario_json };

TrackFormat parse_track_format(const std::string & name);

struct LoadOptions
{
  /// Window lengths for plain-text files; scenario documents carry their own.
  int t_obs = 8;
  int t_pred = 20;
  /// Distance in distinct frames between consecutive window starts; 0 means t_pred.
  int stride = 0;
  /// Ego agent for plain-text files (which carry no ego plan).
  std::optional<int> ego_id;
};

struct LoadResult
{
  std::vector<Scenario> scenarios;
  /// Agents dropped because their observation window or future was incomplete.
  std::size_t dropped_agents = 0;
};

/// Read a whitespace-separated "frame_id agent_id x y" file or a single scenario
/// document. Frame ids in plain-text files may be sparse; consecutive distinct ids
/// form consecutive frames.
LoadResult load_tracks(const std::filesystem::path & path, TrackFormat format, const LoadOptions & options = {});

/// Load every *.json scenario document in a directory, sorted by file name.
LoadResult load_scenario_dir(const std::filesystem::path & dir);

/// Write one "<id>.json" document per scenario into `dir`, with maps under
/// "maps/<id>.json". Scenario ids must be unique and non-empty.
void save_scenarios(const std::filesystem::path & dir, const std::vector<Scenario> & scenarios);

/// Write all tracks of one scenario as plain text ("frame_id agent_id x y").
void save_plain_text(const std::filesystem::path & path, const Scenario & s);

/// Subtract the ego position at frame t_obs from every coordinate, including the
/// ego plan and the map.
Scenario to_relative_frame(const Scenario & s);

/// Named set a scenario belongs to: its id up to the last '_' ("eth-hotel_40" ->
/// "eth-hotel"), or the whole id when it has no '_'.
std::string scenario_group(const std::string & id);
/// Distinct groups in order of first appearance.
std::vector<std::string> scenario_groups(const std::vector<Scenario> & all);

struct Split
{
  std::vector<Scenario> train;
  std::vector<Scenario> test;
};
/// Scenarios of group `held_out` become the test set, all others the training set, in
/// input order. Throws ConfigError when no scenario belongs to `held_out`.
Split leave_one_set_out(const std::vector<Scenario> & all, const std::string & held_out);

}  // namespace trajcast::scene

#endif  // TRAJCAST__SCENE_HPP_
