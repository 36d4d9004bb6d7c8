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

#include "trajcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trajcast/errors.hpp"

namespace trajcast::metrics
{

Metric parse_metric(const std::string & name)
{
  if (name == "l2") {
    return Metric::l2;
  }
  if (name == "mse") {
    return Metric::mse;
  }
  throw ConfigError("unknown metric '" + name + "' (expected l2 or mse)");
}

std::string metric_name(Metric m) { return m == Metric::l2 ? "l2" : "mse"; }

namespace
{

void check_pair(const Trajectory & pred, const Trajectory & truth)
{
  if (pred.empty() || pred.size() != truth.size()) {
    throw ContractError("metric: trajectory lengths " + std::to_string(pred.size()) + " and " +
                        std::to_string(truth.size()) + " must be equal and non-zero");
  }
}

double step_error(Point2 a, Point2 b, Metric m)
{
  const double dx = a.x - b.x, dy = a.y - b.y;
  return m == Metric::l2 ? std::sqrt(dx * dx + dy * dy) : dx * dx + dy * dy;
}

}  // namespace

double ade(const Trajectory & pred, const Trajectory & truth, Metric m)
{
  check_pair(pred, truth);
  double s = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    s += step_error(pred[k], truth[k], m);
  }
  return s / static_cast<double>(pred.size());
}

double fde(const Trajectory & pred, const Trajectory & truth, Metric m)
{
  check_pair(pred, truth);
  return step_error(pred.back(), truth.back(), m);
}

AgentScore best_of_k(const std::vector<Trajectory> & modalities, const Trajectory & truth, Metric m)
{
  if (modalities.empty()) {
    throw ContractError("best_of_k: no modalities");
  }
  AgentScore best;
  for (std::size_t h = 0; h < modalities.size(); ++h) {
    const double a = ade(modalities[h], truth, m);
    if (h == 0 || a < best.ade) {
      best.best_modality = h;
      best.ade = a;
      best.fde = fde(modalities[h], truth, m);
    }
  }
  return best;
}

MetricReport evaluate(const std::vector<ScenarioPrediction> & predictions, Metric m)
{
  MetricReport report;
  report.metric = m;
  double ade_sum = 0.0, fde_sum = 0.0;
  for (const auto & sp : predictions) {
    ScenarioReport sr;
    sr.scenario_id = sp.scenario_id;
    for (const auto & ap : sp.agents) {
      AgentScore s = best_of_k(ap.modalities, ap.truth, m);
      s.agent_id = ap.agent_id;
      report.k = std::max(report.k, ap.modalities.size());
      report.frames = std::max(report.frames, ap.truth.size());
      sr.ade += s.ade;
      sr.fde += s.fde;
      ade_sum += s.ade;
      fde_sum += s.fde;
      sr.agents.push_back(s);
    }
    if (!sr.agents.empty()) {
      sr.ade /= static_cast<double>(sr.agents.size());
      sr.fde /= static_cast<double>(sr.agents.size());
    }
    report.agents += sr.agents.size();
    report.scenarios.push_back(std::move(sr));
  }
  if (report.agents > 0) {
    report.ade = ade_sum / static_cast<double>(report.agents);
    report.fde = fde_sum / static_cast<double>(report.agents);
  }
  report.best_of_k = report.k > 1;
  return report;
}

std::string format_cell(double ade_value, double fde_value, int decimals)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f/%.*f", decimals, ade_value, decimals, fde_value);
  return buf;
}

std::string format_table(const std::vector<std::string> & header, const std::vector<TableRow> & rows)
{
  std::vector<std::size_t> width(header.size(), 0);
  auto widen = [&](std::size_t col, const std::string & s) {
    if (col >= width.size()) {
      width.resize(col + 1, 0);
    }
    width[col] = std::max(width[col], s.size());
  };
  for (std::size_t c = 0; c < header.size(); ++c) {
    widen(c, header[c]);
  }
  for (const auto & r : rows) {
    widen(0, r.name);
    for (std::size_t c = 0; c < r.cells.size(); ++c) {
      widen(c + 1, r.cells[c]);
    }
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string> & cols) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out << cols[c];
      if (c + 1 < cols.size()) {
        out << std::string(width[c] - cols[c].size() + 2, ' ');
      }
    }
    out << '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (std::size_t w : width) {
    total += w + 2;
  }
  out << std::string(total > 2 ? total - 2 : 0, '-') << '\n';
  for (const auto & r : rows) {
    std::vector<std::string> cols{r.name};
    cols.insert(cols.end(), r.cells.begin(), r.cells.end());
    emit(cols);
  }
  return out.str();
}

void write_table_csv(const std::filesystem::path & path, const std::vector<std::string> & header,
                     const std::vector<TableRow> & rows)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << header[c] << (c + 1 < header.size() ? "," : "\n");
  }
  for (const auto & r : rows) {
    out << r.name;
    for (const auto & cell : r.cells) {
      out << ',' << cell;
    }
    out << '\n';
  }
}

void write_report_csv(const std::filesystem::path & path, const MetricReport & report)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  char buf[64];
  out << "scenario_id,agent_id,best_modality,ade,fde\n";
  for (const auto & s : report.scenarios) {
    for (const auto & a : s.agents) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g", a.ade, a.fde);
      out << s.scenario_id << ',' << a.agent_id << ',' << a.best_modality << ',' << buf << '\n';
    }
  }
  std::snprintf(buf, sizeof(buf), "%.17g,%.17g", report.ade, report.fde);
  out << "ALL,,," << buf << '\n';
}

}  // namespace trajcast::metrics
