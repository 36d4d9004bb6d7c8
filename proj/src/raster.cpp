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

#include "trajcast/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "trajcast/errors.hpp"

namespace trajcast::raster
{

void RasterConfig::validate() const
{
  if (height == 0 || width == 0 || !(extent_h > 0.0) || !(extent_w > 0.0) || !(half_width >= 0.0)) {
    throw ConfigError("raster: height, width and extents must be positive, half_width non-negative");
  }
}

namespace
{

// Offset from the ego expressed in image-aligned meters (x toward +col, y toward -row).
Point2 to_image_frame(const RasterConfig & cfg, const EgoPose & ego, Point2 d)
{
  if (!cfg.align_heading) {
    return d;
  }
  const double c = std::cos(ego.heading), s = std::sin(ego.heading);
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

Point2 from_image_frame(const RasterConfig & cfg, const EgoPose & ego, Point2 d)
{
  if (!cfg.align_heading) {
    return d;
  }
  const double c = std::cos(ego.heading), s = std::sin(ego.heading);
  return {c * d.x - s * d.y, s * d.x + c * d.y};
}

}  // namespace

PixelCoord world_to_pixel(const RasterConfig & cfg, const EgoPose & ego, Point2 p)
{
  const Point2 d = to_image_frame(cfg, ego, {p.x - ego.x, p.y - ego.y});
  return {static_cast<double>(cfg.height) / 2.0 - d.y * static_cast<double>(cfg.height) / cfg.extent_h,
          static_cast<double>(cfg.width) / 2.0 + d.x * static_cast<double>(cfg.width) / cfg.extent_w};
}

Point2 pixel_to_world(const RasterConfig & cfg, const EgoPose & ego, PixelCoord px)
{
  const Point2 d{(px.col - static_cast<double>(cfg.width) / 2.0) * cfg.extent_w / static_cast<double>(cfg.width),
                 (static_cast<double>(cfg.height) / 2.0 - px.row) * cfg.extent_h / static_cast<double>(cfg.height)};
  const Point2 w = from_image_frame(cfg, ego, d);
  return {ego.x + w.x, ego.y + w.y};
}

SemanticImage rasterize(const HdMap & map, const EgoPose & ego, const RasterConfig & cfg)
{
  cfg.validate();
  map.validate();
  SemanticImage img{cfg, ego, Tensor::zeros({1, cfg.height, cfg.width})};
  double * px = img.pixels.data().data();
  const double H = static_cast<double>(cfg.height), W = static_cast<double>(cfg.width);
  const double row_m = cfg.extent_h / H, col_m = cfg.extent_w / W;
  for (const auto & line : map.centerlines) {
    for (std::size_t k = 0; k + 1 < line.size(); ++k) {
      // Segment endpoints relative to the ego, so that a common translation of map
      // and ego cancels before any pixel test.
      const Point2 a = to_image_frame(cfg, ego, {line[k].x - ego.x, line[k].y - ego.y});
      const Point2 b = to_image_frame(cfg, ego, {line[k + 1].x - ego.x, line[k + 1].y - ego.y});
      const double r_lo = H / 2.0 - (std::max(a.y, b.y) + cfg.half_width) / row_m;
      const double r_hi = H / 2.0 - (std::min(a.y, b.y) - cfg.half_width) / row_m;
      const double c_lo = W / 2.0 + (std::min(a.x, b.x) - cfg.half_width) / col_m;
      const double c_hi = W / 2.0 + (std::max(a.x, b.x) + cfg.half_width) / col_m;
      const long r0 = std::max(0L, static_cast<long>(std::floor(r_lo)) - 1);
      const long r1 = std::min(static_cast<long>(cfg.height) - 1, static_cast<long>(std::ceil(r_hi)) + 1);
      const long c0 = std::max(0L, static_cast<long>(std::floor(c_lo)) - 1);
      const long c1 = std::min(static_cast<long>(cfg.width) - 1, static_cast<long>(std::ceil(c_hi)) + 1);
      for (long r = r0; r <= r1; ++r) {
        const double py = (H / 2.0 - static_cast<double>(r)) * row_m;
        for (long c = c0; c <= c1; ++c) {
          double & v = px[static_cast<std::size_t>(r) * cfg.width + static_cast<std::size_t>(c)];
          if (v != 0.0) {
            continue;
          }
          const Point2 p{(static_cast<double>(c) - W / 2.0) * col_m, py};
          if (distance_to_segment(p, a, b) <= cfg.half_width) {
            v = 1.0;
          }
        }
      }
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path & path, const SemanticImage & img)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write image " + path.string());
  }
  const std::size_t H = img.config.height, W = img.config.width;
  out << "P5\n" << W << ' ' << H << "\n255\n";
  const auto & d = img.pixels.data();
  for (std::size_t i = 0; i < H * W; ++i) {
    const double v = std::clamp(d[i], 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
}

}  // namespace trajcast::raster
