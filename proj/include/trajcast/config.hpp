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

#ifndef TRAJCAST__CONFIG_HPP_
#define TRAJCAST__CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trajcast/metrics.hpp"
#include "trajcast/model.hpp"

namespace trajcast::train
{

enum class CoordinateFrame { world, relative };

CoordinateFrame parse_frame(const std::string & name);
std::string frame_name(CoordinateFrame f);

struct DataConfig
{
  /// Directory of scenario documents, a plain-text track file, or a directory of them.
  std::string train;
  /// Optional separate evaluation data; when empty, `held_out` or the training data is used.
  std::string test;
  /// auto | plain_text | scenario_json
  std::string format = "auto";
  /// Group name held out of training (leave-one-set-out).
  std::string held_out;
  CoordinateFrame frame = CoordinateFrame::relative;
  /// Window lengths for plain-text input.
  int t_obs = 8;
  int t_pred = 20;
  int stride = 0;
  std::optional<int> ego_id;
};

struct OptimConfig
{
  std::size_t batch_size = 8;
  std::uint64_t steps = 20000;
  double learning_rate = 5e-4;
  std::uint64_t seed = 1;
  /// Write ckpt_<step>.bin every this many steps; 0 disables intermediate checkpoints.
  std::uint64_t checkpoint_every = 0;
  /// Worker threads for the per-scenario forward/backward passes of a batch.
  std::size_t threads = 1;
};

struct EvalConfig
{
  /// Seeds the noise draws of every evaluation run.
  std::uint64_t seed = 7;
  metrics::Metric metric = metrics::Metric::l2;
};

/**
 * @brief Everything a training or evaluation run depends on.
 *
 * JSON layout: top-level "toggles" {PF, TF, EMF, ETF, EF}, "model", "train", "data",
 * "eval". Unknown keys and wrongly typed values are rejected with ConfigError.
 */
struct TrainConfig
{
  model::ModelConfig model;
  OptimConfig train;
  DataConfig data;
  EvalConfig eval;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig & cfg);
TrainConfig from_json(const nlohmann::json & doc);

/// Applies "a.b.c=value" to `doc`. The value is parsed as JSON when possible
/// (numbers, booleans, arrays) and taken as a string otherwise.
void apply_override(nlohmann::json & doc, const std::string & assignment);

/// Reads `path` (or the defaults when empty), applies the overrides in order and
/// validates. MissingInputError for an absent file, ConfigError for bad content.
TrainConfig load_config(const std::filesystem::path & path, const std::vector<std::string> & overrides = {});

}  // namespace trajcast::train

#endif  // TRAJCAST__CONFIG_HPP_
