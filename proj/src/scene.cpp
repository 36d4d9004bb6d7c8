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

#include "trajcast/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "trajcast/errors.hpp"

namespace trajcast::scene
{

const TrackPoint * AgentTrack::at(int t) const
{
  auto it = std::lower_bound(points.begin(), points.end(), t, [](const TrackPoint & p, int v) { return p.t < v; });
  return (it != points.end() && it->t == t) ? &*it : nullptr;
}

bool AgentTrack::covers(int first, int last) const
{
  for (int t = first; t <= last; ++t) {
    if (!at(t)) {
      return false;
    }
  }
  return true;
}

const AgentTrack * Scenario::track(int agent_id) const
{
  for (const auto & tr : tracks) {
    if (tr.agent_id == agent_id) {
      return &tr;
    }
  }
  return nullptr;
}

const AgentTrack & Scenario::ego() const
{
  const AgentTrack * tr = ego_id ? track(*ego_id) : nullptr;
  if (!tr) {
    throw ContractError("scenario '" + id + "' has no ego agent");
  }
  return *tr;
}

void Scenario::validate() const
{
  const std::string where = "scenario '" + id + "': ";
  if (t_obs < 1 || t_obs >= t_pred) {
    throw ContractError(where + "requires 1 <= t_obs < t_pred");
  }
  std::set<int> ids;
  for (const auto & tr : tracks) {
    if (!ids.insert(tr.agent_id).second) {
      throw ContractError(where + "duplicate agent id " + std::to_string(tr.agent_id));
    }
    for (std::size_t i = 0; i < tr.points.size(); ++i) {
      const auto & p = tr.points[i];
      if (p.t < 1 || p.t > t_pred) {
        throw ContractError(where + "agent " + std::to_string(tr.agent_id) + " has frame outside 1..t_pred");
      }
      if (i > 0 && p.t <= tr.points[i - 1].t) {
        throw ContractError(where + "agent " + std::to_string(tr.agent_id) + " frames not strictly increasing");
      }
    }
    if (!tr.covers(1, t_obs)) {
      throw ContractError(where + "agent " + std::to_string(tr.agent_id) + " lacks a complete observation window");
    }
  }
  if (ego_id && !track(*ego_id)) {
    throw ContractError(where + "ego id " + std::to_string(*ego_id) + " has no track");
  }
  if (!ego_plan.empty()) {
    if (!ego_id) {
      throw ContractError(where + "ego plan given without an ego agent");
    }
    if (static_cast<int>(ego_plan.size()) != t_pred - t_obs) {
      throw ContractError(where + "ego plan must cover frames t_obs+1..t_pred");
    }
    for (std::size_t k = 0; k < ego_plan.size(); ++k) {
      if (ego_plan[k].t != t_obs + 1 + static_cast<int>(k)) {
        throw ContractError(where + "ego plan must cover frames t_obs+1..t_pred");
      }
    }
  }
  if (map) {
    map->validate();
  }
}

Windowed window(const Scenario & s)
{
  s.validate();
  Windowed w;
  for (int t = 1; t <= s.t_pred; ++t) {
    Frame f{t, {}};
    for (const auto & tr : s.tracks) {
      if (const TrackPoint * p = tr.at(t)) {
        f.entries.push_back({tr.agent_id, p->x, p->y});
      }
    }
    (t <= s.t_obs ? w.observed : w.future).push_back(std::move(f));
  }
  return w;
}

TrackFormat parse_track_format(const std::string & name)
{
  if (name == "plain_text") {
    return TrackFormat::plain_text;
  }
  if (name == "scenario_json") {
    return TrackFormat::scenario_json;
  }
  throw ConfigError("unknown track format '" + name + "' (expected plain_text or scenario_json)");
}

namespace
{

struct RawRow
{
  long frame;
  int agent;
  double x, y;
  std::size_t line;
};

std::vector<RawRow> read_plain_rows(std::istream & in)
{
  std::vector<RawRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::istringstream ss(line);
    double frame = 0, agent = 0;
    RawRow r{};
    if (!(ss >> frame >> agent >> r.x >> r.y)) {
      throw ParseError("expected 'frame_id agent_id x y'", lineno);
    }
    std::string extra;
    if (ss >> extra) {
      throw ParseError("trailing content '" + extra + "'", lineno);
    }
    if (frame != static_cast<long>(frame) || agent != static_cast<int>(agent)) {
      throw ParseError("frame_id and agent_id must be integers", lineno);
    }
    if (!std::isfinite(r.x) || !std::isfinite(r.y)) {
      throw ParseError("non-finite coordinate", lineno);
    }
    r.frame = static_cast<long>(frame);
    r.agent = static_cast<int>(agent);
    r.line = lineno;
    rows.push_back(r);
  }
  return rows;
}

LoadResult load_plain_text(const std::filesystem::path & path, const LoadOptions & opt)
{
  if (opt.t_obs < 1 || opt.t_obs >= opt.t_pred) {
    throw ConfigError("plain-text loading requires 1 <= t_obs < t_pred");
  }
  std::ifstream in(path);
  if (!in) {
    throw MissingInputError("cannot open track file " + path.string());
  }
  const std::vector<RawRow> rows = read_plain_rows(in);

  // frame id -> agent -> row, with duplicate detection
  std::map<long, std::map<int, const RawRow *>> by_frame;
  for (const auto & r : rows) {
    if (!by_frame[r.frame].emplace(r.agent, &r).second) {
      throw ParseError("duplicate entry for agent " + std::to_string(r.agent) + " at frame " + std::to_string(r.frame), r.line);
    }
  }
  std::vector<long> frames;
  for (const auto & kv : by_frame) {
    frames.push_back(kv.first);
  }

  LoadResult result;
  const std::size_t len = static_cast<std::size_t>(opt.t_pred);
  const std::size_t stride = opt.stride > 0 ? static_cast<std::size_t>(opt.stride) : len;
  const std::string stem = path.stem().string();
  for (std::size_t start = 0; start + len <= frames.size(); start += stride) {
    std::map<int, AgentTrack> tracks;
    for (std::size_t k = 0; k < len; ++k) {
      for (const auto & [agent, row] : by_frame[frames[start + k]]) {
        auto & tr = tracks[agent];
        tr.agent_id = agent;
        tr.points.push_back({static_cast<int>(k + 1), row->x, row->y});
      }
    }
    Scenario s;
    s.t_obs = opt.t_obs;
    s.t_pred = opt.t_pred;
    s.id = stem + "_" + std::to_string(start);
    for (auto & [agent, tr] : tracks) {
      const bool full_obs = tr.covers(1, opt.t_obs);
      const auto future = static_cast<int>(tr.points.size()) - opt.t_obs;
      const bool future_ok = future == 0 || tr.covers(opt.t_obs + 1, opt.t_pred);
      if (!full_obs || !future_ok) {
        ++result.dropped_agents;
        continue;
      }
      s.tracks.push_back(std::move(tr));
    }
    if (s.tracks.empty()) {
      continue;
    }
    if (opt.ego_id && s.track(*opt.ego_id)) {
      s.ego_id = opt.ego_id;
    }
    s.validate();
    result.scenarios.push_back(std::move(s));
  }
  return result;
}

std::vector<TrackPoint> parse_points(const nlohmann::json & arr)
{
  std::vector<TrackPoint> pts;
  for (const auto & p : arr) {
    if (!p.is_array() || p.size() != 3) {
      throw ParseError("track point must be [t, x, y]");
    }
    pts.push_back({p.at(0).get<int>(), p.at(1).get<double>(), p.at(2).get<double>()});
  }
  return pts;
}

nlohmann::json points_json(const std::vector<TrackPoint> & pts)
{
  nlohmann::json arr = nlohmann::json::array();
  for (const auto & p : pts) {
    arr.push_back({p.t, p.x, p.y});
  }
  return arr;
}

Scenario load_scenario_document(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw MissingInputError("cannot open scenario file " + path.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error & e) {
    throw ParseError("invalid scenario JSON in " + path.string() + ": " + e.what());
  }
  Scenario s;
  try {
    s.id = doc.value("id", path.stem().string());
    s.t_obs = doc.at("t_obs").get<int>();
    s.t_pred = doc.at("t_pred").get<int>();
    if (doc.contains("ego_id") && !doc["ego_id"].is_null()) {
      s.ego_id = doc["ego_id"].get<int>();
    }
    for (const auto & tr : doc.at("tracks")) {
      AgentTrack track;
      track.agent_id = tr.at("id").get<int>();
      track.kind = tr.value("kind", std::string{});
      track.points = parse_points(tr.at("points"));
      s.tracks.push_back(std::move(track));
    }
    if (doc.contains("ego_plan")) {
      s.ego_plan = parse_points(doc["ego_plan"]);
    }
    if (doc.contains("origin")) {
      s.origin = {doc["origin"].at(0).get<double>(), doc["origin"].at(1).get<double>()};
    }
    if (doc.contains("map") && !doc["map"].is_null()) {
      s.map_ref = doc["map"].get<std::string>();
      std::filesystem::path map_path(*s.map_ref);
      if (map_path.is_relative()) {
        map_path = path.parent_path() / map_path;
      }
      s.map = load_map(map_path);
    }
  } catch (const nlohmann::json::exception & e) {
    throw ParseError("malformed scenario document " + path.string() + ": " + e.what());
  }
  try {
    s.validate();
  } catch (const ContractError & e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return s;
}

}  // namespace

LoadResult load_tracks(const std::filesystem::path & path, TrackFormat format, const LoadOptions & options)
{
  if (format == TrackFormat::plain_text) {
    return load_plain_text(path, options);
  }
  LoadResult r;
  r.scenarios.push_back(load_scenario_document(path));
  return r;
}

LoadResult load_scenario_dir(const std::filesystem::path & dir)
{
  if (!std::filesystem::is_directory(dir)) {
    throw MissingInputError("scenario directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto & entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  LoadResult r;
  for (const auto & f : files) {
    r.scenarios.push_back(load_scenario_document(f));
  }
  return r;
}

void save_scenarios(const std::filesystem::path & dir, const std::vector<Scenario> & scenarios)
{
  std::filesystem::create_directories(dir);
  std::set<std::string> seen;
  for (const auto & s : scenarios) {
    if (s.id.empty() || !seen.insert(s.id).second) {
      throw ContractError("scenario ids must be unique and non-empty to save ('" + s.id + "')");
    }
    nlohmann::json doc;
    doc["id"] = s.id;
    doc["t_obs"] = s.t_obs;
    doc["t_pred"] = s.t_pred;
    doc["ego_id"] = s.ego_id ? nlohmann::json(*s.ego_id) : nlohmann::json(nullptr);
    nlohmann::json tracks = nlohmann::json::array();
    for (const auto & tr : s.tracks) {
      nlohmann::json t{{"id", tr.agent_id}, {"points", points_json(tr.points)}};
      if (!tr.kind.empty()) {
        t["kind"] = tr.kind;
      }
      tracks.push_back(std::move(t));
    }
    doc["tracks"] = std::move(tracks);
    if (s.has_plan()) {
      doc["ego_plan"] = points_json(s.ego_plan);
    }
    if (s.origin != Point2{}) {
      doc["origin"] = {s.origin.x, s.origin.y};
    }
    if (s.map) {
      std::filesystem::create_directories(dir / "maps");
      const std::string ref = "maps/" + s.id + ".json";
      save_map(dir / ref, *s.map);
      doc["map"] = ref;
    }
    std::ofstream out(dir / (s.id + ".json"));
    if (!out) {
      throw std::runtime_error("cannot write scenario " + s.id + " into " + dir.string());
    }
    out << doc.dump() << '\n';
  }
}

void save_plain_text(const std::filesystem::path & path, const Scenario & s)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "# frame_id agent_id x y\n";
  char buf[96];
  for (int t = 1; t <= s.t_pred; ++t) {
    for (const auto & tr : s.tracks) {
      if (const TrackPoint * p = tr.at(t)) {
        std::snprintf(buf, sizeof(buf), "%d %d %.17g %.17g\n", t, tr.agent_id, p->x, p->y);
        out << buf;
      }
    }
  }
}

Scenario to_relative_frame(const Scenario & s)
{
  const AgentTrack & ego = s.ego();
  const TrackPoint * anchor = ego.at(s.t_obs);
  if (!anchor) {
    throw ContractError("ego agent of scenario '" + s.id + "' has no position at t_obs");
  }
  const Point2 shift = anchor->pos();
  Scenario out = s;
  for (auto & tr : out.tracks) {
    for (auto & p : tr.points) {
      p.x -= shift.x;
      p.y -= shift.y;
    }
  }
  for (auto & p : out.ego_plan) {
    p.x -= shift.x;
    p.y -= shift.y;
  }
  if (out.map) {
    out.map = out.map->translated(Point2{} - shift);
  }
  out.origin = s.origin + shift;
  return out;
}

std::string scenario_group(const std::string & id)
{
  const auto cut = id.rfind('_');
  return cut == std::string::npos ? id : id.substr(0, cut);
}

std::vector<std::string> scenario_groups(const std::vector<Scenario> & all)
{
  std::vector<std::string> out;
  for (const auto & s : all) {
    const std::string g = scenario_group(s.id);
    if (std::find(out.begin(), out.end(), g) == out.end()) {
      out.push_back(g);
    }
  }
  return out;
}

Split leave_one_set_out(const std::vector<Scenario> & all, const std::string & held_out)
{
  Split split;
  for (const auto & s : all) {
    (scenario_group(s.id) == held_out ? split.test : split.train).push_back(s);
  }
  if (split.test.empty()) {
    std::string known;
    for (const auto & g : scenario_groups(all)) {
      known += (known.empty() ? "" : ", ") + g;
    }
    throw ConfigError("held-out set '" + held_out + "' not found (known: " + known + ")");
  }
  return split;
}

}  // namespace trajcast::scene
