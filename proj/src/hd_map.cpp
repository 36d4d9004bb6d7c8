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

#include "trajcast/hd_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "trajcast/errors.hpp"

namespace trajcast
{

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double distance_to_segment(Point2 p, Point2 a, Point2 b)
{
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  }
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

double distance_to_polyline(Point2 p, const Polyline & line)
{
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    best = std::min(best, distance_to_segment(p, line[i], line[i + 1]));
  }
  if (line.size() == 1) {
    best = distance(p, line[0]);
  }
  return best;
}

double polyline_length(const Polyline & line)
{
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    s += distance(line[i], line[i + 1]);
  }
  return s;
}

Point2 point_at_arc_length(const Polyline & line, double s)
{
  if (line.empty()) {
    throw ContractError("point_at_arc_length on an empty polyline");
  }
  if (s <= 0.0) {
    return line.front();
  }
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const double seg = distance(line[i], line[i + 1]);
    if (s <= seg) {
      const double t = s / seg;
      return {line[i].x + t * (line[i + 1].x - line[i].x), line[i].y + t * (line[i + 1].y - line[i].y)};
    }
    s -= seg;
  }
  return line.back();
}

void HdMap::validate() const
{
  for (std::size_t k = 0; k < centerlines.size(); ++k) {
    const auto & line = centerlines[k];
    if (line.size() < 2) {
      throw ContractError("centerline " + std::to_string(k) + " has fewer than 2 points");
    }
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      if (line[i] == line[i + 1]) {
        throw ContractError("centerline " + std::to_string(k) + " repeats point " + std::to_string(i));
      }
    }
  }
}

HdMap HdMap::translated(Point2 offset) const
{
  HdMap out = *this;
  for (auto & line : out.centerlines) {
    for (auto & p : line) {
      p = p + offset;
    }
  }
  return out;
}

HdMap load_map(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw MissingInputError("cannot open map file " + path.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error & e) {
    throw ParseError("invalid map JSON in " + path.string() + ": " + e.what());
  }
  HdMap map;
  try {
    for (const auto & line : doc.at("centerlines")) {
      Polyline pl;
      for (const auto & pt : line) {
        if (pt.size() != 2) {
          throw ParseError("map point must be [x, y] in " + path.string());
        }
        pl.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
      }
      map.centerlines.push_back(std::move(pl));
    }
  } catch (const nlohmann::json::exception & e) {
    throw ParseError("malformed map document " + path.string() + ": " + e.what());
  }
  map.validate();
  return map;
}

void save_map(const std::filesystem::path & path, const HdMap & map)
{
  nlohmann::json lines = nlohmann::json::array();
  for (const auto & line : map.centerlines) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto & p : line) {
      pts.push_back({p.x, p.y});
    }
    lines.push_back(std::move(pts));
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write map file " + path.string());
  }
  out << nlohmann::json{{"centerlines", lines}}.dump() << '\n';
}

}  // namespace trajcast
