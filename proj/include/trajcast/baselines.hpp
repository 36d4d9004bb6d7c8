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

#ifndef TRAJCAST__BASELINES_HPP_
#define TRAJCAST__BASELINES_HPP_

#include <Eigen/Core>
#include <vector>

#include "trajcast/model.hpp"

namespace trajcast::baselines
{

/// x(t) = x0 + vx * t, y(t) = y0 + vy * t over frame indices t = 1, 2, ...
struct LineFit
{
  double x0 = 0.0, vx = 0.0;
  double y0 = 0.0, vy = 0.0;
  Point2 at(double t) const { return {x0 + vx * t, y0 + vy * t}; }
};

/// Least-squares line through observed[k] at t = k + 1. Needs >= 2 points.
LineFit fit_line(const std::vector<Point2> & observed);
/// Evaluates the fitted line at t = T_obs+1 .. T_obs+horizon.
std::vector<Point2> linear_extrapolate(const std::vector<Point2> & observed, std::size_t horizon);

struct KalmanParams
{
  double process_noise = 0.1;      // white-acceleration spectral density
  double observation_noise = 0.05; // position std dev in meters
  double dt = 1.0;                 // time between frames
};

/**
 * @brief Linear Kalman filter with a constant-velocity model; state [x, y, vx, vy].
 *
 * Initialised from the first observation with zero velocity and a broad velocity
 * prior, or from the first two observations (position and finite-difference velocity)
 * when a second one is available. Covariance updates use the Joseph form.
 */
class KalmanCV
{
public:
  using Vec4 = Eigen::Matrix<double, 4, 1>;
  using Mat4 = Eigen::Matrix<double, 4, 4>;

  explicit KalmanCV(const KalmanParams & params = {});

  void init_single(Point2 z);
  void init_pair(Point2 z1, Point2 z2);
  void predict();
  void update(Point2 z);

  const Vec4 & state() const { return x_; }
  const Mat4 & covariance() const { return p_; }
  Mat4 transition() const;
  Mat4 process_covariance() const;

private:
  KalmanParams params_;
  Vec4 x_ = Vec4::Zero();
  Mat4 p_ = Mat4::Identity();
};

/// Filters the observations (frames 1..T_obs) then predicts open loop for `horizon` frames.
std::vector<Point2> kalman_predict(const std::vector<Point2> & observed, std::size_t horizon,
                                   const KalmanParams & params = {});

/// Observed positions of `row` for frames 1..t_obs.
std::vector<Point2> observed_track(const model::Sample & s, std::size_t row);

/// Single-modality prediction sets in the same layout as the learned model's output.
model::PredictionSet predict_linear(const model::Sample & s);
model::PredictionSet predict_kalman(const model::Sample & s, const KalmanParams & params = {});

}  // namespace trajcast::baselines

#endif  // TRAJCAST__BASELINES_HPP_
