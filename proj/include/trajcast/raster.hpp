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

#ifndef TRAJCAST__RASTER_HPP_
#define TRAJCAST__RASTER_HPP_

#include <cstddef>
#include <filesystem>

#include "trajcast/hd_map.hpp"
#include "trajcast/tensor.hpp"

namespace trajcast::raster
{

struct RasterConfig
{
  std::size_t height = 224;  // pixels
  std::size_t width = 224;
  double extent_h = 100.0;   // meters covered vertically
  double extent_w = 100.0;
  double half_width = 1.75;  // centerline band half-width in meters
  /// Rotate the image so the ego heading points along +col. Off by default.
  bool align_heading = false;

  /// Throws ConfigError on non-positive sizes.
  void validate() const;
};

struct EgoPose
{
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, counter-clockwise from +x; used only with align_heading
};

/// Continuous pixel coordinates; pixel (r, c) has its center at (r, c).
struct PixelCoord
{
  double row = 0.0;
  double col = 0.0;
};

PixelCoord world_to_pixel(const RasterConfig & cfg, const EgoPose & ego, Point2 p);
Point2 pixel_to_world(const RasterConfig & cfg, const EgoPose & ego, PixelCoord px);

struct SemanticImage
{
  RasterConfig config;
  EgoPose ego;
  /// Shape [1 x height x width], values in {0, 1}.
  Tensor pixels;
};

/// A pixel is 1 when its center lies within `half_width` meters of any centerline
/// segment. An empty map gives an all-zero image.
SemanticImage rasterize(const HdMap & map, const EgoPose & ego, const RasterConfig & cfg = {});

/// Binary portable graymap (P5) of the first channel, 255 for set pixels.
void write_pgm(const std::filesystem::path & path, const SemanticImage & img);

}  // namespace trajcast::raster

#endif  // TRAJCAST__RASTER_HPP_
