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

#include "trajcast/baselines.hpp"

#include <Eigen/Dense>

#include "trajcast/errors.hpp"

namespace trajcast::baselines
{

LineFit fit_line(const std::vector<Point2> & observed)
{
  if (observed.size() < 2) {
    throw ContractError("linear extrapolation needs at least 2 observed points");
  }
  // Centred sums keep the normal equations well conditioned.
  const double n = static_cast<double>(observed.size());
  const double t_mean = (n + 1.0) / 2.0;
  double x_mean = 0.0, y_mean = 0.0;
  for (const auto & p : observed) {
    x_mean += p.x / n;
    y_mean += p.y / n;
  }
  double stt = 0.0, stx = 0.0, sty = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double dt = static_cast<double>(k + 1) - t_mean;
    stt += dt * dt;
    stx += dt * (observed[k].x - x_mean);
    sty += dt * (observed[k].y - y_mean);
  }
  LineFit f;
  f.vx = stx / stt;
  f.vy = sty / stt;
  f.x0 = x_mean - f.vx * t_mean;
  f.y0 = y_mean - f.vy * t_mean;
  return f;
}

std::vector<Point2> linear_extrapolate(const std::vector<Point2> & observed, std::size_t horizon)
{
  const LineFit f = fit_line(observed);
  std::vector<Point2> out;
  for (std::size_t k = 1; k <= horizon; ++k) {
    out.push_back(f.at(static_cast<double>(observed.size() + k)));
  }
  return out;
}

KalmanCV::KalmanCV(const KalmanParams & params) : params_(params) {}

KalmanCV::Mat4 KalmanCV::transition() const
{
  Mat4 f = Mat4::Identity();
  f(0, 2) = f(1, 3) = params_.dt;
  return f;
}

KalmanCV::Mat4 KalmanCV::process_covariance() const
{
  const double dt = params_.dt, q = params_.process_noise;
  Mat4 m = Mat4::Zero();
  for (int a = 0; a < 2; ++a) {
    m(a, a) = q * dt * dt * dt / 3.0;
    m(a, a + 2) = m(a + 2, a) = q * dt * dt / 2.0;
    m(a + 2, a + 2) = q * dt;
  }
  return m;
}

void KalmanCV::init_single(Point2 z)
{
  const double r = params_.observation_noise * params_.observation_noise;
  x_ << z.x, z.y, 0.0, 0.0;
  p_ = Mat4::Zero();
  p_(0, 0) = p_(1, 1) = r;
  p_(2, 2) = p_(3, 3) = 100.0;
}

void KalmanCV::init_pair(Point2 z1, Point2 z2)
{
  const double r = params_.observation_noise * params_.observation_noise, dt = params_.dt;
  x_ << z2.x, z2.y, (z2.x - z1.x) / dt, (z2.y - z1.y) / dt;
  p_ = Mat4::Zero();
  for (int a = 0; a < 2; ++a) {
    p_(a, a) = r;
    p_(a, a + 2) = p_(a + 2, a) = r / dt;
    p_(a + 2, a + 2) = 2.0 * r / (dt * dt);
  }
}

void KalmanCV::predict()
{
  const Mat4 f = transition();
  x_ = f * x_;
  p_ = f * p_ * f.transpose() + process_covariance();
}

void KalmanCV::update(Point2 z)
{
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = h(1, 1) = 1.0;
  const double r = params_.observation_noise * params_.observation_noise;
  const Eigen::Matrix2d rm = Eigen::Matrix2d::Identity() * r;
  const Eigen::Matrix2d s = h * p_ * h.transpose() + rm;
  const Eigen::Matrix<double, 4, 2> k = p_ * h.transpose() * s.inverse();
  const Eigen::Vector2d innov(z.x - x_(0), z.y - x_(1));
  x_ += k * innov;
  const Mat4 a = Mat4::Identity() - k * h;
  p_ = a * p_ * a.transpose() + k * rm * k.transpose();
  p_ = 0.5 * (p_ + p_.transpose());
}

std::vector<Point2> kalman_predict(const std::vector<Point2> & observed, std::size_t horizon, const KalmanParams & params)
{
  if (observed.empty()) {
    throw ContractError("kalman prediction needs at least 1 observed point");
  }
  KalmanCV kf(params);
  if (observed.size() == 1) {
    kf.init_single(observed[0]);
  } else {
    kf.init_pair(observed[0], observed[1]);
    for (std::size_t k = 2; k < observed.size(); ++k) {
      kf.predict();
      kf.update(observed[k]);
    }
  }
  std::vector<Point2> out;
  for (std::size_t k = 0; k < horizon; ++k) {
    kf.predict();
    out.push_back({kf.state()(0), kf.state()(1)});
  }
  return out;
}

std::vector<Point2> observed_track(const model::Sample & s, std::size_t row)
{
  std::vector<Point2> out;
  for (int t = 0; t < s.t_obs; ++t) {
    const Tensor & p = s.positions[static_cast<std::size_t>(t)];
    out.push_back({p.at(row, 0), p.at(row, 1)});
  }
  return out;
}

namespace
{

template <typename Fn>
model::PredictionSet predict_each(const model::Sample & s, Fn fn)
{
  model::PredictionSet set;
  set.scenario_id = s.id;
  set.agent_ids = s.agent_ids;
  set.scored = s.scored;
  const std::size_t n = s.agents(), T = s.future_steps();
  Tensor m({n, T, 2});
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<Point2> fut = fn(observed_track(s, i), T);
    for (std::size_t k = 0; k < T; ++k) {
      m.at(i, k, 0) = fut[k].x;
      m.at(i, k, 1) = fut[k].y;
    }
  }
  set.modalities.push_back(std::move(m));
  return set;
}

}  // namespace

model::PredictionSet predict_linear(const model::Sample & s)
{
  return predict_each(s, [](const std::vector<Point2> & obs, std::size_t T) { return linear_extrapolate(obs, T); });
}

model::PredictionSet predict_kalman(const model::Sample & s, const KalmanParams & params)
{
  return predict_each(s, [&](const std::vector<Point2> & obs, std::size_t T) { return kalman_predict(obs, T, params); });
}

}  // namespace trajcast::baselines
