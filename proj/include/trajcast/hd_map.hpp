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

#ifndef TRAJCAST__HD_MAP_HPP_
#define TRAJCAST__HD_MAP_HPP_

#include <filesystem>
#include <vector>

namespace trajcast
{

/// A point in world meters (x east, y north).
struct Point2
{
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2 &, const Point2 &) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }

double distance(Point2 a, Point2 b);
/// Euclidean distance from `p` to the closed segment [a, b].
double distance_to_segment(Point2 p, Point2 a, Point2 b);

using Polyline = std::vector<Point2>;

double distance_to_polyline(Point2 p, const Polyline & line);
double polyline_length(const Polyline & line);
/// Point at arc length `s` along the polyline, clamped to its ends.
Point2 point_at_arc_length(const Polyline & line, double s);

/// Road centerlines in world meters.
struct HdMap
{
  std::vector<Polyline> centerlines;

  /// Throws ContractError unless every polyline has >= 2 points and no repeated
  /// consecutive point.
  void validate() const;
  HdMap translated(Point2 offset) const;

  friend bool operator==(const HdMap &, const HdMap &) = default;
};

/// JSON document {"centerlines": [[[x, y], ...], ...]}.
HdMap load_map(const std::filesystem::path & path);
void save_map(const std::filesystem::path & path, const HdMap & map);

}  // namespace trajcast

#endif  // TRAJCAST__HD_MAP_HPP_
