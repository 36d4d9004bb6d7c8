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

#include "trajcast/env_net.hpp"

#include <cmath>
#include <memory>

#include "kernels.hpp"
#include "trajcast/errors.hpp"
#include "trajcast/ops.hpp"

namespace trajcast::nn
{

namespace
{

struct ConvDims
{
  std::size_t cin, h, w, cout, k, stride, pad, oh, ow;
  std::size_t rows() const { return cin * k * k; }
  std::size_t pixels() const { return oh * ow; }
};

void im2col(const double * x, const ConvDims & d, double * cols)
{
  const std::size_t P = d.pixels();
  for (std::size_t c = 0; c < d.cin; ++c) {
    for (std::size_t ky = 0; ky < d.k; ++ky) {
      for (std::size_t kx = 0; kx < d.k; ++kx) {
        double * row = cols + ((c * d.k + ky) * d.k + kx) * P;
        for (std::size_t oy = 0; oy < d.oh; ++oy) {
          const long iy = static_cast<long>(oy * d.stride + ky) - static_cast<long>(d.pad);
          double * dst = row + oy * d.ow;
          if (iy < 0 || iy >= static_cast<long>(d.h)) {
            std::fill(dst, dst + d.ow, 0.0);
            continue;
          }
          const double * src = x + (c * d.h + static_cast<std::size_t>(iy)) * d.w;
          for (std::size_t ox = 0; ox < d.ow; ++ox) {
            const long ix = static_cast<long>(ox * d.stride + kx) - static_cast<long>(d.pad);
            dst[ox] = (ix < 0 || ix >= static_cast<long>(d.w)) ? 0.0 : src[ix];
          }
        }
      }
    }
  }
}

void col2im_add(const double * cols, const ConvDims & d, double * dx)
{
  const std::size_t P = d.pixels();
  for (std::size_t c = 0; c < d.cin; ++c) {
    for (std::size_t ky = 0; ky < d.k; ++ky) {
      for (std::size_t kx = 0; kx < d.k; ++kx) {
        const double * row = cols + ((c * d.k + ky) * d.k + kx) * P;
        for (std::size_t oy = 0; oy < d.oh; ++oy) {
          const long iy = static_cast<long>(oy * d.stride + ky) - static_cast<long>(d.pad);
          if (iy < 0 || iy >= static_cast<long>(d.h)) {
            continue;
          }
          double * dst = dx + (c * d.h + static_cast<std::size_t>(iy)) * d.w;
          for (std::size_t ox = 0; ox < d.ow; ++ox) {
            const long ix = static_cast<long>(ox * d.stride + kx) - static_cast<long>(d.pad);
            if (ix >= 0 && ix < static_cast<long>(d.w)) {
              dst[ix] += row[oy * d.ow + ox];
            }
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(Var x, Var weight, Var bias, std::size_t kernel, std::size_t stride, std::size_t pad)
{
  if (x.value().rank() != 3) {
    throw DimensionError("conv2d: expected a [C x H x W] input, got " + to_string(x.shape()));
  }
  if (kernel == 0 || stride == 0) {
    throw DimensionError("conv2d: kernel and stride must be positive");
  }
  ConvDims d{};
  d.cin = x.shape()[0];
  d.h = x.shape()[1];
  d.w = x.shape()[2];
  d.k = kernel;
  d.stride = stride;
  d.pad = pad;
  if (weight.value().rank() != 2 || weight.cols() != d.rows()) {
    throw DimensionError("conv2d: weight " + to_string(weight.shape()) + " does not match input " +
                         to_string(x.shape()) + " with kernel " + std::to_string(kernel));
  }
  d.cout = weight.rows();
  if (bias.shape() != Shape{1, d.cout}) {
    throw DimensionError("conv2d: bias " + to_string(bias.shape()) + " does not match weight " + to_string(weight.shape()));
  }
  if (d.h + 2 * pad < kernel || d.w + 2 * pad < kernel) {
    throw DimensionError("conv2d: input " + to_string(x.shape()) + " smaller than the kernel");
  }
  d.oh = (d.h + 2 * pad - kernel) / stride + 1;
  d.ow = (d.w + 2 * pad - kernel) / stride + 1;

  auto cols = std::make_shared<std::vector<double>>(d.rows() * d.pixels());
  im2col(x.value().ptr(), d, cols->data());
  Tensor out({d.cout, d.oh, d.ow});
  const std::size_t P = d.pixels();
  for (std::size_t o = 0; o < d.cout; ++o) {
    std::fill(out.ptr() + o * P, out.ptr() + (o + 1) * P, bias.value()[o]);
  }
  kernels::gemm_nn(d.cout, P, d.rows(), weight.value().ptr(), cols->data(), out.ptr());

  return x.graph()->record(std::move(out), {x, weight, bias}, [x, weight, bias, d, cols](Graph & g, const Tensor &, const Tensor & dy) {
    const std::size_t P = d.pixels();
    if (weight.requires_grad()) {
      kernels::gemm_nt(d.cout, d.rows(), P, dy.ptr(), cols->data(), g.grad_buffer(weight).ptr());
    }
    if (bias.requires_grad()) {
      Tensor & db = g.grad_buffer(bias);
      for (std::size_t o = 0; o < d.cout; ++o) {
        const double * row = dy.ptr() + o * P;
        double s = 0.0;
        for (std::size_t i = 0; i < P; ++i) {
          s += row[i];
        }
        db[o] += s;
      }
    }
    if (x.requires_grad()) {
      std::vector<double> dcols(d.rows() * P, 0.0);
      kernels::gemm_tn(d.rows(), P, d.cout, weight.value().ptr(), dy.ptr(), dcols.data());
      col2im_add(dcols.data(), d, g.grad_buffer(x).ptr());
    }
  });
}

FeatureGeometry FeatureGeometry::from_raster(const raster::RasterConfig & cfg, const raster::EgoPose & ego,
                                             std::size_t downsample)
{
  cfg.validate();
  if (downsample == 0) {
    throw ConfigError("feature geometry: downsample must be positive");
  }
  FeatureGeometry geo;
  const double ds = static_cast<double>(downsample);
  geo.downsample = downsample;
  geo.ego = {ego.x, ego.y};
  geo.origin_row = static_cast<double>(cfg.height) / 2.0 / ds;
  geo.origin_col = static_cast<double>(cfg.width) / 2.0 / ds;
  geo.cells_per_meter_row = static_cast<double>(cfg.height) / cfg.extent_h / ds;
  geo.cells_per_meter_col = static_cast<double>(cfg.width) / cfg.extent_w / ds;
  const double c = cfg.align_heading ? std::cos(ego.heading) : 1.0;
  const double s = cfg.align_heading ? std::sin(ego.heading) : 0.0;
  geo.jacobian = {s * geo.cells_per_meter_row, -c * geo.cells_per_meter_row, c * geo.cells_per_meter_col,
                  s * geo.cells_per_meter_col};
  return geo;
}

raster::PixelCoord FeatureGeometry::to_cells(Point2 p) const
{
  const double dx = p.x - ego.x, dy = p.y - ego.y;
  return {origin_row + jacobian[0] * dx + jacobian[1] * dy, origin_col + jacobian[2] * dx + jacobian[3] * dy};
}

void RoiConfig::validate() const
{
  if (!(half_extent > 0.0) || bins == 0 || samples == 0) {
    throw ConfigError("roi: half_extent, bins and samples must be positive");
  }
}

namespace
{

struct Bilinear
{
  long y0, x0;
  double ly, lx;
};

Bilinear bilinear_at(double y, double x)
{
  const double fy = std::floor(y), fx = std::floor(x);
  return {static_cast<long>(fy), static_cast<long>(fx), y - fy, x - fx};
}

}  // namespace

Var roi_align(Var fm, Var positions, const FeatureGeometry & geo, const RoiConfig & cfg)
{
  cfg.validate();
  if (fm.value().rank() != 3) {
    throw DimensionError("roi_align: expected a [C x H x W] feature map, got " + to_string(fm.shape()));
  }
  if (positions.value().rank() != 2 || positions.cols() != 2) {
    throw DimensionError("roi_align: positions must be [n x 2], got " + to_string(positions.shape()));
  }
  const std::size_t C = fm.shape()[0], Hf = fm.shape()[1], Wf = fm.shape()[2];
  const std::size_t n = positions.rows(), K = cfg.bins, S = cfg.samples;
  const std::size_t width = C * K * K;
  const double side_r = 2.0 * cfg.half_extent * geo.cells_per_meter_row;
  const double side_c = 2.0 * cfg.half_extent * geo.cells_per_meter_col;
  const double inv = 1.0 / static_cast<double>(S * S);

  // Sample locations, shared by forward and backward.
  auto samples = std::make_shared<std::vector<Bilinear>>();
  samples->reserve(n * K * K * S * S);
  for (std::size_t i = 0; i < n; ++i) {
    const raster::PixelCoord c = geo.to_cells({positions.value().at(i, 0), positions.value().at(i, 1)});
    for (std::size_t a = 0; a < K; ++a) {
      for (std::size_t b = 0; b < K; ++b) {
        for (std::size_t u = 0; u < S; ++u) {
          for (std::size_t v = 0; v < S; ++v) {
            const double y = c.row - side_r / 2.0 + (static_cast<double>(a) + (u + 0.5) / S) * side_r / K;
            const double x = c.col - side_c / 2.0 + (static_cast<double>(b) + (v + 0.5) / S) * side_c / K;
            samples->push_back(bilinear_at(y, x));
          }
        }
      }
    }
  }
  const double * F = fm.value().ptr();
  auto read = [F, Hf, Wf](std::size_t ch, long y, long x) {
    if (y < 0 || x < 0 || y >= static_cast<long>(Hf) || x >= static_cast<long>(Wf)) {
      return 0.0;
    }
    return F[(ch * Hf + static_cast<std::size_t>(y)) * Wf + static_cast<std::size_t>(x)];
  };

  Tensor out({n, width});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < C; ++ch) {
      for (std::size_t bin = 0; bin < K * K; ++bin) {
        double acc = 0.0;
        for (std::size_t q = 0; q < S * S; ++q) {
          const Bilinear & s = (*samples)[(i * K * K + bin) * S * S + q];
          acc += (1 - s.ly) * ((1 - s.lx) * read(ch, s.y0, s.x0) + s.lx * read(ch, s.y0, s.x0 + 1)) +
                 s.ly * ((1 - s.lx) * read(ch, s.y0 + 1, s.x0) + s.lx * read(ch, s.y0 + 1, s.x0 + 1));
        }
        out.at(i, ch * K * K + bin) = acc * inv;
      }
    }
  }

  return fm.graph()->record(std::move(out), {fm, positions}, [fm, positions, geo, samples, n, C, K, S, Hf, Wf, inv](Graph & g, const Tensor &, const Tensor & dy) {
    auto inside = [Hf, Wf](long y, long x) {
      return y >= 0 && x >= 0 && y < static_cast<long>(Hf) && x < static_cast<long>(Wf);
    };
    const double * F = fm.value().ptr();
    double * dF = fm.requires_grad() ? g.grad_buffer(fm).ptr() : nullptr;
    double * dP = positions.requires_grad() ? g.grad_buffer(positions).ptr() : nullptr;
    for (std::size_t i = 0; i < n; ++i) {
      double d_row = 0.0, d_col = 0.0;
      for (std::size_t ch = 0; ch < C; ++ch) {
        for (std::size_t bin = 0; bin < K * K; ++bin) {
          const double go = dy.at(i, ch * K * K + bin) * inv;
          if (go == 0.0) {
            continue;
          }
          for (std::size_t q = 0; q < S * S; ++q) {
            const Bilinear & s = (*samples)[(i * K * K + bin) * S * S + q];
            const long ys[2] = {s.y0, s.y0 + 1};
            const long xs[2] = {s.x0, s.x0 + 1};
            const double wy[2] = {1 - s.ly, s.ly};
            const double wx[2] = {1 - s.lx, s.lx};
            double f[2][2];
            for (int a = 0; a < 2; ++a) {
              for (int b = 0; b < 2; ++b) {
                const bool ok = inside(ys[a], xs[b]);
                const std::size_t idx = ok ? (ch * Hf + static_cast<std::size_t>(ys[a])) * Wf + static_cast<std::size_t>(xs[b]) : 0;
                f[a][b] = ok ? F[idx] : 0.0;
                if (dF && ok) {
                  dF[idx] += go * wy[a] * wx[b];
                }
              }
            }
            d_row += go * (wx[0] * (f[1][0] - f[0][0]) + wx[1] * (f[1][1] - f[0][1]));
            d_col += go * (wy[0] * (f[0][1] - f[0][0]) + wy[1] * (f[1][1] - f[1][0]));
          }
        }
      }
      if (dP) {
        dP[2 * i] += d_row * geo.jacobian[0] + d_col * geo.jacobian[2];
        dP[2 * i + 1] += d_row * geo.jacobian[1] + d_col * geo.jacobian[3];
      }
    }
  });
}

ConvEncoder ConvEncoder::create(ParamStore & store, const std::string & prefix, std::size_t in_channels,
                                std::array<std::size_t, 3> widths, std::mt19937_64 & rng)
{
  std::size_t cin = in_channels;
  for (std::size_t s = 0; s < 3; ++s) {
    const std::size_t fan_in = cin * 9;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    const std::string name = prefix + ".conv" + std::to_string(s + 1);
    store.add(name + ".weight", uniform_tensor({widths[s], fan_in}, bound, rng));
    store.add(name + ".bias", uniform_tensor({1, widths[s]}, bound, rng));
    cin = widths[s];
  }
  return bind(store, prefix, in_channels, widths);
}

ConvEncoder ConvEncoder::bind(ParamStore & store, const std::string & prefix, std::size_t in_channels,
                              std::array<std::size_t, 3> widths)
{
  ConvEncoder enc;
  enc.in_channels_ = in_channels;
  enc.widths_ = widths;
  std::size_t cin = in_channels;
  for (std::size_t s = 0; s < 3; ++s) {
    const std::string name = prefix + ".conv" + std::to_string(s + 1);
    enc.weights_[s] = &bind_param(store, name + ".weight", {widths[s], cin * 9});
    enc.biases_[s] = &bind_param(store, name + ".bias", {1, widths[s]});
    cin = widths[s];
  }
  return enc;
}

Var ConvEncoder::encode(Graph & g, Var image) const
{
  if (!weights_[0]) {
    throw ContractError("ConvEncoder used before create/bind");
  }
  const Shape & s = image.shape();
  if (s.size() != 3 || s[0] != in_channels_ || s[1] % kDownsample != 0 || s[2] % kDownsample != 0) {
    throw DimensionError("conv encoder: expected [" + std::to_string(in_channels_) +
                         " x H x W] with H, W divisible by 8, got " + to_string(s));
  }
  Var x = image;
  for (std::size_t k = 0; k < 3; ++k) {
    x = relu(conv2d(x, g.param(*weights_[k]), g.param(*biases_[k]), 3, 2, 1));
  }
  return x;
}

}  // namespace trajcast::nn
