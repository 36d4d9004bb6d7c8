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

#ifndef TRAJCAST__ENV_NET_HPP_
#define TRAJCAST__ENV_NET_HPP_

#include <array>
#include <random>
#include <string>
#include <vector>

#include "trajcast/graph.hpp"
#include "trajcast/layers.hpp"
#include "trajcast/raster.hpp"

namespace trajcast::nn
{

/**
 * @brief 2-D convolution of a single image.
 *
 * x [C_in x H x W], weight [C_out x C_in*k*k] (rows in (channel, ky, kx) order),
 * bias [1 x C_out] -> [C_out x OH x OW] with OH = (H + 2*pad - k) / stride + 1.
 * Zero padding. The input gradient is computed only when x requires one.
 */
Var conv2d(Var x, Var weight, Var bias, std::size_t kernel, std::size_t stride, std::size_t pad);

/// Maps positions in meters to continuous feature-map coordinates (row, col).
struct FeatureGeometry
{
  double origin_row = 0.0;  // feature-map coordinates of the raster ego position
  double origin_col = 0.0;
  Point2 ego;               // raster ego position in meters
  /// d(row, col) / d(x, y): row-major 2x2.
  std::array<double, 4> jacobian{};
  double cells_per_meter_row = 0.0;  // box side scale along rows
  double cells_per_meter_col = 0.0;
  std::size_t downsample = 8;

  /// Geometry of a map encoded by a stack with total stride `downsample` from `cfg`.
  static FeatureGeometry from_raster(const raster::RasterConfig & cfg, const raster::EgoPose & ego,
                                     std::size_t downsample);
  raster::PixelCoord to_cells(Point2 p) const;
};

struct RoiConfig
{
  double half_extent = 20.0;  // meters from the agent to the box edge
  std::size_t bins = 3;       // K
  std::size_t samples = 1;    // bilinear samples per bin side, averaged
  void validate() const;
};

/**
 * @brief ROIAlign around every agent.
 *
 * fm [C x Hf x Wf], positions [n x 2] meters -> [n x C*K*K] (flattened per agent in
 * (channel, bin row, bin col) order). Each box spans 2*half_extent meters; bins are
 * sampled bilinearly at their centers, and corners outside the map read 0.
 * Differentiable with respect to the feature map and the positions.
 */
Var roi_align(Var fm, Var positions, const FeatureGeometry & geo, const RoiConfig & cfg);

/// Three stride-2 3x3 convolutions with ReLU; parameters `<prefix>.conv{1,2,3}.{weight,bias}`.
class ConvEncoder
{
public:
  static constexpr std::size_t kDownsample = 8;

  ConvEncoder() = default;
  static ConvEncoder create(ParamStore & store, const std::string & prefix, std::size_t in_channels,
                            std::array<std::size_t, 3> widths, std::mt19937_64 & rng);
  static ConvEncoder bind(ParamStore & store, const std::string & prefix, std::size_t in_channels,
                          std::array<std::size_t, 3> widths);

  /// image [C x H x W] with H, W divisible by 8 -> [widths[2] x H/8 x W/8].
  Var encode(Graph & g, Var image) const;
  std::size_t out_channels() const { return widths_[2]; }

private:
  std::size_t in_channels_ = 0;
  std::array<std::size_t, 3> widths_{};
  std::array<Parameter *, 3> weights_{};
  std::array<Parameter *, 3> biases_{};
};

}  // namespace trajcast::nn

#endif  // TRAJCAST__ENV_NET_HPP_
