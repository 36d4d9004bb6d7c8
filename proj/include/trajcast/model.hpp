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

#ifndef TRAJCAST__MODEL_HPP_
#define TRAJCAST__MODEL_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "trajcast/env_net.hpp"
#include "trajcast/interaction.hpp"
#include "trajcast/prediction.hpp"
#include "trajcast/raster.hpp"
#include "trajcast/scene.hpp"

namespace trajcast::model
{

/// Feature switches. A disabled feature is replaced by a zero block of the same width.
struct Toggles
{
  bool pf = true;   // pooled position feature
  bool tf = true;   // pooled tracking feature
  bool emf = true;  // ego motion feature
  bool etf = true;  // ego future-trajectory (plan) feature
  bool ef = true;   // environment (map) feature

  static Toggles all_off() { return {false, false, false, false, false}; }
  friend bool operator==(const Toggles &, const Toggles &) = default;
};

struct ModelConfig
{
  Toggles toggles;
  std::size_t modalities = 5;  // H
  std::size_t noise_dim = 16;
  /// Draw standard-normal noise per (agent, modality); when false the noise input is zero.
  bool use_noise = true;
  std::size_t embed = 64;
  std::size_t gru_hidden = 128;
  std::size_t lstm_hidden = 64;
  std::array<std::size_t, 3> conv_widths{8, 16, 32};
  raster::RasterConfig raster;
  nn::RoiConfig roi;
  bool include_ego_in_pooling = true;
  nn::VarietyMin variety_min = nn::VarietyMin::scene;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
  nn::InteractionDims interaction_dims() const { return {embed, gru_hidden, lstm_hidden}; }
  nn::PredictionDims prediction_dims() const { return {embed, 4 * embed, lstm_hidden, noise_dim}; }
};

/// Plain LSTM encoder/decoder: every feature off, one modality, no noise.
ModelConfig vanilla_lstm_config(ModelConfig base = {});
/// LSTM encoder/decoder with noise-conditioned decoding over `modalities` samples.
ModelConfig noise_lstm_config(std::size_t modalities, ModelConfig base = {});

/// A scenario laid out as dense per-frame matrices, one row per agent.
struct Sample
{
  std::string id;
  int t_obs = 0;
  int t_pred = 0;
  std::vector<int> agent_ids;
  std::optional<std::size_t> ego_row;
  /// positions[t-1] is [n x 2] at frame t. Agents without a future repeat their last
  /// observed position there (never scored).
  std::vector<Tensor> positions;
  std::vector<bool> has_future;
  /// Ego plan for frames t_obs+1..t_pred (empty when absent).
  std::vector<Point2> plan;
  /// Rows entering the loss and the metrics: agents with a future, minus the ego when
  /// it has a plan.
  std::vector<std::size_t> scored;
  /// Semantic image [channels x H x W]; present when the map feature is enabled.
  std::optional<Tensor> image;
  raster::EgoPose raster_pose;
  /// World offset already subtracted from every coordinate.
  Point2 origin;

  std::size_t agents() const { return agent_ids.size(); }
  std::size_t future_steps() const { return static_cast<std::size_t>(t_pred - t_obs); }
  /// Ground-truth future [n x 2] per step.
  std::vector<Tensor> future() const;
};

/// Builds a sample; the map is rasterized around the ego at t_obs (or the agents'
/// centroid when there is no ego) only when the map feature is enabled.
Sample make_sample(const scene::Scenario & s, const ModelConfig & cfg);

struct Rollout
{
  /// positions[h][k]: modality h at frame t_obs+1+k, [n x 2].
  std::vector<std::vector<Var>> positions;
  std::vector<std::vector<Var>> deltas;
  /// Encoder hidden state at t_obs, [n x lstm_hidden].
  Var encoder_hidden;
};

/// Predicted futures: modalities[h] has shape [n x steps x 2].
struct PredictionSet
{
  std::string scenario_id;
  std::vector<int> agent_ids;
  std::vector<std::size_t> scored;
  std::vector<Tensor> modalities;
};

/**
 * @brief The full forecaster: map encoder, interaction net and prediction net.
 *
 * All parameters exist regardless of the toggles, so checkpoints from any ablation
 * share one layout.
 */
class Forecaster
{
public:
  Forecaster(const ModelConfig & cfg, std::uint64_t init_seed);
  Forecaster(const Forecaster &) = delete;
  Forecaster & operator=(const Forecaster &) = delete;

  const ModelConfig & config() const { return cfg_; }
  ParamStore & params() { return store_; }
  const ParamStore & params() const { return store_; }

  /// One [n x noise_dim] draw per modality; zeros when noise is disabled.
  std::vector<Tensor> draw_noise(const Sample & s, std::mt19937_64 & rng) const;
  Rollout rollout(Graph & g, const Sample & s, const std::vector<Tensor> & noise) const;
  nn::VarietyLoss loss(Graph & g, const Sample & s, const Rollout & r) const;
  PredictionSet predict(const Sample & s, const std::vector<Tensor> & noise) const;

private:
  ModelConfig cfg_;
  ParamStore store_;
  nn::ConvEncoder encoder_;
  nn::Linear env_embed_;
  nn::InteractionNet ain_;
  nn::PredictionNet pred_;
};

}  // namespace trajcast::model

#endif  // TRAJCAST__MODEL_HPP_
