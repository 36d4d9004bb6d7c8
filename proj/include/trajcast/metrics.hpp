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

#ifndef TRAJCAST__METRICS_HPP_
#define TRAJCAST__METRICS_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "trajcast/hd_map.hpp"

namespace trajcast::metrics
{

/// l2: mean Euclidean distance (default). mse: mean squared distance.
enum class Metric { l2, mse };

Metric parse_metric(const std::string & name);
std::string metric_name(Metric m);

using Trajectory = std::vector<Point2>;

/// Mean per-step displacement. Throws ContractError on empty or unequal lengths.
double ade(const Trajectory & pred, const Trajectory & truth, Metric m = Metric::l2);
/// Displacement at the last step.
double fde(const Trajectory & pred, const Trajectory & truth, Metric m = Metric::l2);

struct AgentScore
{
  int agent_id = 0;
  std::size_t best_modality = 0;
  double ade = 0.0;
  double fde = 0.0;
};

/// Picks the modality with the lowest ADE (ties: lowest index) and reports its FDE.
AgentScore best_of_k(const std::vector<Trajectory> & modalities, const Trajectory & truth, Metric m = Metric::l2);

struct AgentPrediction
{
  int agent_id = 0;
  std::vector<Trajectory> modalities;
  Trajectory truth;
};

struct ScenarioPrediction
{
  std::string scenario_id;
  std::vector<AgentPrediction> agents;
};

struct ScenarioReport
{
  std::string scenario_id;
  std::vector<AgentScore> agents;
  double ade = 0.0;
  double fde = 0.0;
};

struct MetricReport
{
  std::vector<ScenarioReport> scenarios;
  /// Means over every scored agent of every scenario. `k` and `frames` are the largest
  /// modality count and horizon seen.
  double ade = 0.0;
  double fde = 0.0;
  std::size_t agents = 0;
  std::size_t k = 1;
  bool best_of_k = false;
  std::size_t frames = 0;
  Metric metric = Metric::l2;
};

/// Per-agent best-of-K over every scenario, aggregated in input order.
MetricReport evaluate(const std::vector<ScenarioPrediction> & predictions, Metric m = Metric::l2);

/// "0.39/0.79"
std::string format_cell(double ade, double fde, int decimals = 2);

struct TableRow
{
  std::string name;
  std::vector<std::string> cells;
};

/// Aligned plain-text table with a header row.
std::string format_table(const std::vector<std::string> & header, const std::vector<TableRow> & rows);
/// The same rows as CSV.
void write_table_csv(const std::filesystem::path & path, const std::vector<std::string> & header,
                     const std::vector<TableRow> & rows);

/// scenario_id,agent_id,best_modality,ade,fde per agent followed by an aggregate row.
void write_report_csv(const std::filesystem::path & path, const MetricReport & report);

}  // namespace trajcast::metrics

#endif  // TRAJCAST__METRICS_HPP_
