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

#include "trajcast/train.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <thread>

#include "trajcast/checkpoint.hpp"
#include "trajcast/errors.hpp"
#include "trajcast/gradcheck.hpp"

namespace trajcast::train
{

namespace fs = std::filesystem;

namespace
{

scene::LoadOptions load_options(const DataConfig & data)
{
  scene::LoadOptions o;
  o.t_obs = data.t_obs;
  o.t_pred = data.t_pred;
  o.stride = data.stride;
  o.ego_id = data.ego_id;
  return o;
}

void append(std::vector<scene::Scenario> & out, scene::LoadResult && r)
{
  for (auto & s : r.scenarios) {
    out.push_back(std::move(s));
  }
}

}  // namespace

std::vector<scene::Scenario> load_dataset(const fs::path & path, const DataConfig & data)
{
  if (path.empty()) {
    throw ConfigError("no data path configured");
  }
  if (!fs::exists(path)) {
    throw MissingInputError("data path not found: " + path.string());
  }
  const auto opts = load_options(data);
  std::vector<scene::Scenario> out;
  if (fs::is_directory(path)) {
    std::vector<fs::path> json_files, text_files;
    for (const auto & e : fs::directory_iterator(path)) {
      if (!e.is_regular_file()) {
        continue;
      }
      (e.path().extension() == ".json" ? json_files : text_files).push_back(e.path());
    }
    const bool as_json = data.format == "auto" ? !json_files.empty() : scene::parse_track_format(data.format) ==
                                                                         scene::TrackFormat::scenario_json;
    if (as_json) {
      append(out, scene::load_scenario_dir(path));
    } else {
      std::sort(text_files.begin(), text_files.end());
      for (const auto & f : text_files) {
        append(out, scene::load_tracks(f, scene::TrackFormat::plain_text, opts));
      }
    }
  } else {
    scene::TrackFormat fmt = path.extension() == ".json" ? scene::TrackFormat::scenario_json
                                                         : scene::TrackFormat::plain_text;
    if (data.format != "auto") {
      fmt = scene::parse_track_format(data.format);
    }
    append(out, scene::load_tracks(path, fmt, opts));
  }
  if (out.empty()) {
    throw MissingInputError("no scenarios found under " + path.string());
  }
  return out;
}

std::vector<model::Sample> build_samples(const std::vector<scene::Scenario> & scenarios,
                                         const model::ModelConfig & cfg, CoordinateFrame frame)
{
  std::vector<model::Sample> out;
  out.reserve(scenarios.size());
  for (const auto & s : scenarios) {
    out.push_back(model::make_sample(frame == CoordinateFrame::relative ? scene::to_relative_frame(s) : s, cfg));
  }
  return out;
}

scene::Split load_split(const TrainConfig & cfg)
{
  auto all = load_dataset(cfg.data.train, cfg.data);
  if (!cfg.data.held_out.empty()) {
    return scene::leave_one_set_out(all, cfg.data.held_out);
  }
  scene::Split split;
  split.test = cfg.data.test.empty() ? all : load_dataset(cfg.data.test, cfg.data);
  split.train = std::move(all);
  return split;
}

BatchResult accumulate_batch(model::Forecaster & f, const std::vector<const model::Sample *> & batch,
                             const std::vector<std::vector<Tensor>> & noise, std::size_t threads)
{
  if (noise.size() != batch.size()) {
    throw ContractError("accumulate_batch: one noise set per batch entry required");
  }
  BatchResult out;
  out.winners.assign(f.config().modalities, 0);
  auto record = [&](const nn::VarietyLoss & l) {
    out.loss_sum += l.value;
    for (std::size_t w : l.winners) {
      ++out.winners[w];
    }
  };

  if (threads <= 1 || batch.size() <= 1) {
    for (std::size_t k = 0; k < batch.size(); ++k) {
      Graph g;
      const auto r = f.rollout(g, *batch[k], noise[k]);
      const auto l = f.loss(g, *batch[k], r);
      g.backward(l.loss);
      g.accumulate_param_grads();
      record(l);
    }
    return out;
  }

  std::vector<std::unique_ptr<Graph>> graphs(batch.size());
  std::vector<nn::VarietyLoss> losses(batch.size());
  std::vector<std::exception_ptr> errors(batch.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < batch.size(); k = next++) {
      try {
        graphs[k] = std::make_unique<Graph>();
        const auto r = f.rollout(*graphs[k], *batch[k], noise[k]);
        losses[k] = f.loss(*graphs[k], *batch[k], r);
        graphs[k]->backward(losses[k].loss);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, batch.size()); ++t) {
    pool.emplace_back(worker);
  }
  for (auto & t : pool) {
    t.join();
  }
  for (std::size_t k = 0; k < batch.size(); ++k) {
    if (errors[k]) {
      std::rethrow_exception(errors[k]);
    }
    graphs[k]->accumulate_param_grads();
    record(losses[k]);
  }
  return out;
}

Trainer::Trainer(model::Forecaster & f, const std::vector<model::Sample> & samples, const OptimConfig & opt)
: f_(f), samples_(samples), opt_(opt)
{
  if (samples_.empty()) {
    throw ContractError("training needs at least one scenario");
  }
  adam_.learning_rate = opt.learning_rate;
  std::seed_seq order_seed{opt.seed, std::uint64_t{1}};
  std::seed_seq noise_seed{opt.seed, std::uint64_t{2}};
  order_rng_.seed(order_seed);
  noise_rng_.seed(noise_seed);
  order_.resize(samples_.size());
  cursor_ = order_.size();
}

std::vector<const model::Sample *> Trainer::next_batch()
{
  std::vector<const model::Sample *> batch;
  while (batch.size() < opt_.batch_size) {
    if (cursor_ == order_.size()) {
      for (std::size_t i = 0; i < order_.size(); ++i) {
        order_[i] = i;
      }
      std::shuffle(order_.begin(), order_.end(), order_rng_);
      cursor_ = 0;
    }
    batch.push_back(&samples_[order_[cursor_++]]);
  }
  return batch;
}

StepRecord Trainer::step()
{
  const auto batch = next_batch();
  std::vector<std::vector<Tensor>> noise;
  for (const auto * s : batch) {
    noise.push_back(f_.draw_noise(*s, noise_rng_));
  }
  f_.params().zero_grad();
  const BatchResult res = accumulate_batch(f_, batch, noise, opt_.threads);

  StepRecord rec;
  rec.step = adam_.step + 1;
  rec.loss = res.loss_sum / static_cast<double>(batch.size());
  rec.winners = res.winners;

  std::map<std::string, double> group_sq;
  double total = 0.0;
  bool grads_finite = true;
  for (const auto & [name, p] : f_.params()) {
    double sq = 0.0;
    for (double v : p.grad.data()) {
      sq += v * v;
    }
    grads_finite = grads_finite && std::isfinite(sq);
    group_sq[group_by_prefix(name)] += sq;
    total += sq;
  }
  rec.grad_norm = std::sqrt(total);
  if (!std::isfinite(rec.loss) || !grads_finite) {
    std::string worst;
    double worst_sq = -1.0;
    for (const auto & [group, sq] : group_sq) {
      if (!std::isfinite(sq) || sq > worst_sq) {
        worst = group;
        worst_sq = sq;
        if (!std::isfinite(sq)) {
          break;
        }
      }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", std::sqrt(worst_sq));
    throw NumericError("non-finite " + std::string(std::isfinite(rec.loss) ? "gradient" : "loss") + " at step " +
                       std::to_string(rec.step) + "; largest gradient norm in parameter group '" + worst +
                       "' (" + buf + ")");
  }
  adam_step(f_.params(), adam_);
  return rec;
}

std::uint64_t init_seed(std::uint64_t run_seed) { return run_seed; }

std::vector<model::PredictionSet> predict_all(const model::Forecaster & f, const std::vector<model::Sample> & samples,
                                              std::uint64_t eval_seed)
{
  std::mt19937_64 rng(eval_seed);
  std::vector<model::PredictionSet> out;
  out.reserve(samples.size());
  for (const auto & s : samples) {
    out.push_back(f.predict(s, f.draw_noise(s, rng)));
  }
  return out;
}

metrics::ScenarioPrediction to_scenario_prediction(const model::PredictionSet & p, const model::Sample & s)
{
  if (p.scenario_id != s.id || p.agent_ids != s.agent_ids) {
    throw ContractError("prediction set does not belong to scenario '" + s.id + "'");
  }
  const auto truth = s.future();
  const std::size_t T = s.future_steps();
  metrics::ScenarioPrediction sp;
  sp.scenario_id = s.id;
  for (std::size_t row : s.scored) {
    metrics::AgentPrediction ap;
    ap.agent_id = s.agent_ids[row];
    for (const auto & m : p.modalities) {
      metrics::Trajectory tr;
      for (std::size_t k = 0; k < T; ++k) {
        tr.push_back({m.at(row, k, 0), m.at(row, k, 1)});
      }
      ap.modalities.push_back(std::move(tr));
    }
    for (std::size_t k = 0; k < T; ++k) {
      ap.truth.push_back({truth[k].at(row, 0), truth[k].at(row, 1)});
    }
    sp.agents.push_back(std::move(ap));
  }
  return sp;
}

metrics::MetricReport evaluate_predictions(const std::vector<model::PredictionSet> & preds,
                                           const std::vector<model::Sample> & samples, metrics::Metric m)
{
  if (preds.size() != samples.size()) {
    throw ContractError("one prediction set per sample required");
  }
  std::vector<metrics::ScenarioPrediction> sp;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    sp.push_back(to_scenario_prediction(preds[i], samples[i]));
  }
  return metrics::evaluate(sp, m);
}

metrics::MetricReport evaluate_model(const model::Forecaster & f, const std::vector<model::Sample> & samples,
                                     std::uint64_t eval_seed, metrics::Metric m)
{
  return evaluate_predictions(predict_all(f, samples, eval_seed), samples, m);
}

void write_predictions_csv(const fs::path & path, const std::vector<model::PredictionSet> & preds,
                           const std::vector<model::Sample> & samples)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "scenario_id,agent_id,modality,t,x,y\n";
  char buf[128];
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto & p = preds[i];
    const auto & s = samples.at(i);
    for (std::size_t a = 0; a < p.agent_ids.size(); ++a) {
      for (std::size_t h = 0; h < p.modalities.size(); ++h) {
        for (std::size_t k = 0; k < p.modalities[h].dim(1); ++k) {
          std::snprintf(buf, sizeof buf, "%.10g,%.10g", p.modalities[h].at(a, k, 0) + s.origin.x,
                        p.modalities[h].at(a, k, 1) + s.origin.y);
          out << p.scenario_id << ',' << p.agent_ids[a] << ',' << h << ',' << s.t_obs + 1 + static_cast<int>(k)
              << ',' << buf << '\n';
        }
      }
    }
  }
}

namespace
{

std::string hex64(std::uint64_t v)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

RunSummary run_training(const TrainConfig & cfg, const std::vector<model::Sample> & train_samples,
                        const fs::path & out_dir, std::ostream * progress, std::uint64_t progress_every)
{
  cfg.validate();
  fs::create_directories(out_dir);
  {
    std::ofstream snap(out_dir / "config.snapshot");
    snap << to_json(cfg).dump(2) << '\n';
  }
  model::Forecaster f(cfg.model, init_seed(cfg.train.seed));
  Trainer trainer(f, train_samples, cfg.train);

  std::ofstream log(out_dir / "log.csv");
  log << "step,loss,winners,grad_norm,wall_seconds\n";
  nlohmann::json checkpoints = nlohmann::json::array();
  const auto start = std::chrono::steady_clock::now();
  RunSummary summary;
  char buf[160];
  for (std::uint64_t k = 0; k < cfg.train.steps; ++k) {
    StepRecord rec = trainer.step();
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string winners;
    for (std::size_t w : rec.winners) {
      winners += (winners.empty() ? "" : "|") + std::to_string(w);
    }
    char nums[96];
    std::snprintf(nums, sizeof nums, "%.17g", rec.loss);
    log << rec.step << ',' << nums << ',' << winners;
    std::snprintf(nums, sizeof nums, ",%.17g,%.3f", rec.grad_norm, rec.wall_seconds);
    log << nums << '\n';
    summary.final_loss = rec.loss;
    if (cfg.train.checkpoint_every > 0 && rec.step % cfg.train.checkpoint_every == 0) {
      const std::string name = "ckpt_" + std::to_string(rec.step) + ".bin";
      save_checkpoint(out_dir / name, f.params());
      checkpoints.push_back({{"step", rec.step}, {"file", name}, {"checksum", hex64(f.params().checksum())}});
    }
    if (progress && progress_every > 0 && rec.step % progress_every == 0) {
      std::snprintf(buf, sizeof buf, "step %llu  loss %.5f  (%.1f s)\n", static_cast<unsigned long long>(rec.step),
                    rec.loss, rec.wall_seconds);
      *progress << buf << std::flush;
    }
  }
  log.close();
  save_checkpoint(out_dir / "final.bin", f.params());
  summary.steps = cfg.train.steps;
  summary.checksum = f.params().checksum();
  summary.train_report = evaluate_model(f, train_samples, cfg.eval.seed, cfg.eval.metric);

  nlohmann::json doc;
  doc["steps"] = summary.steps;
  doc["final_loss"] = summary.final_loss;
  doc["final_train_ade"] = summary.train_report.ade;
  doc["final_train_fde"] = summary.train_report.fde;
  doc["scored_agents"] = summary.train_report.agents;
  doc["eval_seed"] = cfg.eval.seed;
  doc["metric"] = metrics::metric_name(cfg.eval.metric);
  doc["eval_best_of_k"] = "per_agent";
  doc["k"] = cfg.model.modalities;
  doc["variety_min"] = cfg.model.variety_min == nn::VarietyMin::scene ? "scene" : "agent";
  doc["loss_normalizer"] = "scored agents x future steps; the ego is excluded when its plan is given";
  doc["checksum"] = hex64(summary.checksum);
  doc["checkpoints"] = checkpoints;
  std::ofstream(out_dir / "summary.json") << doc.dump(2) << '\n';
  return summary;
}

std::vector<AblationRow> ablation_rows()
{
  using model::Toggles;
  return {
    {"Baseline", Toggles::all_off()},
    {"Our-v1", {true, false, false, false, false}},
    {"Our-v2", {true, true, false, false, false}},
    {"Our-v3", {true, true, true, false, false}},
    {"Our-v4", {true, true, true, true, false}},
    {"Our-full", {true, true, true, true, true}},
  };
}

model::ModelConfig ablation_model(const model::ModelConfig & base, const AblationRow & row)
{
  if (row.toggles == model::Toggles::all_off()) {
    return model::vanilla_lstm_config(base);
  }
  model::ModelConfig c = base;
  c.toggles = row.toggles;
  return c;
}

}  // namespace trajcast::train
