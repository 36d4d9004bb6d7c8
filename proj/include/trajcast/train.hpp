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

#ifndef TRAJCAST__TRAIN_HPP_
#define TRAJCAST__TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "trajcast/adam.hpp"
#include "trajcast/config.hpp"
#include "trajcast/metrics.hpp"
#include "trajcast/model.hpp"

namespace trajcast::train
{

/// Loads every scenario under `path` (see DataConfig::train for the accepted layouts).
std::vector<scene::Scenario> load_dataset(const std::filesystem::path & path, const DataConfig & data);

/// Converts to samples, moving each scenario into its ego-relative frame first when asked.
std::vector<model::Sample> build_samples(const std::vector<scene::Scenario> & scenarios,
                                         const model::ModelConfig & cfg, CoordinateFrame frame);

/// Training and evaluation scenarios for a config: held-out group, separate test path, or
/// the training data itself.
scene::Split load_split(const TrainConfig & cfg);

struct StepRecord
{
  std::uint64_t step = 0;
  /// Mean loss over the batch.
  double loss = 0.0;
  /// How often each modality won within the batch (scene mode: one vote per scenario).
  std::vector<std::size_t> winners;
  double grad_norm = 0.0;
  double wall_seconds = 0.0;
};

struct BatchResult
{
  double loss_sum = 0.0;
  std::vector<std::size_t> winners;
};

/**
 * @brief Forward and backward passes of `batch`, summing gradients into the parameters.
 *
 * noise[k] belongs to batch[k]. Each scenario gets its own graph; with threads > 1 the
 * passes run concurrently and their gradients are still added in batch order.
 */
BatchResult accumulate_batch(model::Forecaster & f, const std::vector<const model::Sample *> & batch,
                             const std::vector<std::vector<Tensor>> & noise, std::size_t threads = 1);

/**
 * @brief Deterministic training loop: shuffled epochs, fresh noise every step, one Adam
 * update per batch.
 *
 * Throws NumericError naming the step and the parameter group with the largest gradient
 * norm when the loss or a gradient stops being finite.
 */
class Trainer
{
public:
  Trainer(model::Forecaster & f, const std::vector<model::Sample> & samples, const OptimConfig & opt);

  StepRecord step();
  std::uint64_t steps_done() const { return adam_.step; }

private:
  std::vector<const model::Sample *> next_batch();

  model::Forecaster & f_;
  const std::vector<model::Sample> & samples_;
  OptimConfig opt_;
  AdamState adam_;
  std::mt19937_64 order_rng_;
  std::mt19937_64 noise_rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// Model initialisation seed derived from the run seed.
std::uint64_t init_seed(std::uint64_t run_seed);

/// Predictions of every sample with noise drawn from one stream seeded by `eval_seed`.
std::vector<model::PredictionSet> predict_all(const model::Forecaster & f, const std::vector<model::Sample> & samples,
                                              std::uint64_t eval_seed);
/// Scored agents of one prediction set, converted for the metric code.
metrics::ScenarioPrediction to_scenario_prediction(const model::PredictionSet & p, const model::Sample & s);
metrics::MetricReport evaluate_predictions(const std::vector<model::PredictionSet> & preds,
                                           const std::vector<model::Sample> & samples, metrics::Metric m);
metrics::MetricReport evaluate_model(const model::Forecaster & f, const std::vector<model::Sample> & samples,
                                     std::uint64_t eval_seed, metrics::Metric m);

/// CSV with header scenario_id,agent_id,modality,t,x,y in world coordinates; rows ordered
/// by scenario, agent, modality, frame.
void write_predictions_csv(const std::filesystem::path & path, const std::vector<model::PredictionSet> & preds,
                           const std::vector<model::Sample> & samples);

struct RunSummary
{
  std::uint64_t steps = 0;
  double final_loss = 0.0;
  metrics::MetricReport train_report;
  std::uint64_t checksum = 0;
};

/**
 * @brief Trains a fresh model and writes the run directory: config.snapshot, log.csv,
 * ckpt_<step>.bin per cadence, final.bin and summary.json.
 *
 * `progress`, when given, receives one line per `progress_every` steps.
 */
RunSummary run_training(const TrainConfig & cfg, const std::vector<model::Sample> & train_samples,
                        const std::filesystem::path & out_dir, std::ostream * progress = nullptr,
                        std::uint64_t progress_every = 100);

struct AblationRow
{
  std::string name;
  model::Toggles toggles;
};

/// Baseline, Our-v1 (PF), Our-v2 (+TF), Our-v3 (+EMF), Our-v4 (+ETF), Our-full (+EF).
std::vector<AblationRow> ablation_rows();
/// The model config of one row. The baseline row is the plain LSTM encoder/decoder.
model::ModelConfig ablation_model(const model::ModelConfig & base, const AblationRow & row);

}  // namespace trajcast::train

#endif  // TRAJCAST__TRAIN_HPP_
