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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "trajcast/checkpoint.hpp"
#include "trajcast/errors.hpp"
#include "trajcast/synthetic.hpp"
#include "trajcast/train.hpp"

using namespace trajcast;
using namespace trajcast::train;
namespace fs = std::filesystem;

namespace
{

fs::path scratch_dir(const std::string & name)
{
  fs::path dir = fs::temp_directory_path() / ("trajcast_test_train_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

model::ModelConfig small_model()
{
  model::ModelConfig m;
  m.modalities = 2;
  m.noise_dim = 4;
  m.embed = 8;
  m.gru_hidden = 8;
  m.lstm_hidden = 8;
  m.conv_widths = {2, 4, 4};
  m.raster.height = m.raster.width = 32;
  m.raster.extent_h = m.raster.extent_w = 60.0;
  m.roi.half_extent = 8.0;
  m.roi.bins = 2;
  return m;
}

std::vector<scene::Scenario> small_scenarios(std::size_t count, std::uint64_t seed)
{
  scene::SyntheticSpec spec;
  spec.kind = scene::Template::ego_with_plan;
  spec.count = count;
  spec.t_obs = 4;
  spec.t_pred = 8;
  spec.vehicles = 1;
  spec.pedestrians = 2;
  return scene::generate_synthetic(spec, seed);
}

std::vector<double> loss_trace(const model::ModelConfig & m, const std::vector<model::Sample> & samples,
                               OptimConfig opt, std::size_t steps)
{
  model::Forecaster f(m, init_seed(opt.seed));
  Trainer t(f, samples, opt);
  std::vector<double> out;
  for (std::size_t k = 0; k < steps; ++k) {
    out.push_back(t.step().loss);
  }
  return out;
}

std::string strip_last_column(const fs::path & csv)
{
  std::ifstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    out += line.substr(0, line.rfind(',')) + "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("config defaults, round trip and overrides")
{
  const TrainConfig d;
  CHECK(d.train.batch_size == 8);
  CHECK(d.train.steps == 20000);
  CHECK(d.train.learning_rate == 0.0005);
  CHECK(d.model.modalities == 5);
  CHECK(d.model.toggles == model::Toggles{});
  CHECK(d.data.frame == CoordinateFrame::relative);

  const auto doc = to_json(d);
  CHECK(to_json(from_json(doc)) == doc);
  CHECK(doc["toggles"].contains("EMF"));

  nlohmann::json patch = nlohmann::json::object();
  apply_override(patch, "toggles.EF=false");
  apply_override(patch, "train.steps=12");
  apply_override(patch, "data.train=some/dir");
  apply_override(patch, "model.variety_min=agent");
  const TrainConfig c = from_json(patch);
  CHECK_FALSE(c.model.toggles.ef);
  CHECK(c.model.toggles.pf);
  CHECK(c.train.steps == 12);
  CHECK(c.data.train == "some/dir");
  CHECK(c.model.variety_min == nn::VarietyMin::agent);

  CHECK_THROWS_AS(from_json(nlohmann::json{{"toggles", {{"XF", true}}}}), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json{{"training", {}}}), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json{{"train", {{"steps", "many"}}}}), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json{{"train", {{"steps", -3}}}}), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json{{"model", {{"variety_min", "both"}}}}), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json{{"data", {{"t_obs", 9}, {"t_pred", 9}}}}), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json{{"model", {{"raster", {{"height", 100}}}}}}), ConfigError);
  nlohmann::json bad = nlohmann::json::object();
  CHECK_THROWS_AS(apply_override(bad, "novalue"), ConfigError);

  const fs::path dir = scratch_dir("config");
  std::ofstream(dir / "cfg.json") << R"({"toggles": {"EF": true}, "train": {"steps": 3}})";
  const TrainConfig loaded = load_config(dir / "cfg.json", {"toggles.EF=false"});
  CHECK_FALSE(loaded.model.toggles.ef);
  CHECK(loaded.train.steps == 3);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), MissingInputError);
  std::ofstream(dir / "broken.json") << "{ nope";
  CHECK_THROWS_AS(load_config(dir / "broken.json"), ConfigError);
}

TEST_CASE("leave one set out")
{
  std::vector<scene::Scenario> all;
  const std::vector<std::string> groups{"eth-univ", "eth-hotel", "ucy-zara01", "ucy-zara02", "ucy-univ"};
  for (int k = 0; k < 4; ++k) {
    for (const auto & g : groups) {
      scene::Scenario s;
      s.id = g + "_" + std::to_string(k * 20);
      all.push_back(s);
    }
  }
  CHECK(scene::scenario_groups(all) == groups);
  const auto split = scene::leave_one_set_out(all, "eth-hotel");
  CHECK(split.test.size() == 4);
  CHECK(scene::scenario_groups(split.train).size() == 4);
  for (const auto & s : split.test) {
    CHECK(scene::scenario_group(s.id) == "eth-hotel");
  }
  std::multiset<std::string> before, after;
  for (const auto & s : all) {
    before.insert(s.id);
  }
  for (const auto * part : {&split.train, &split.test}) {
    for (const auto & s : *part) {
      after.insert(s.id);
    }
  }
  CHECK(before == after);
  CHECK_THROWS_AS(scene::leave_one_set_out(all, "eth"), ConfigError);
  CHECK_THROWS_AS(scene::leave_one_set_out(all, "sdd"), ConfigError);
}

TEST_CASE("batch gradients are the sum of per-scenario gradients")
{
  const auto m = small_model();
  const auto samples = build_samples(small_scenarios(2, 3), m, CoordinateFrame::relative);
  model::Forecaster f(m, 5);
  std::mt19937_64 rng(1);
  const std::vector<std::vector<Tensor>> noise{f.draw_noise(samples[0], rng), f.draw_noise(samples[1], rng)};

  std::map<std::string, Tensor> singles;
  for (const auto & [name, p] : f.params()) {
    singles[name] = Tensor::zeros(p.value.shape());
  }
  for (std::size_t k = 0; k < 2; ++k) {
    f.params().zero_grad();
    accumulate_batch(f, {&samples[k]}, {noise[k]});
    for (const auto & [name, p] : f.params()) {
      for (std::size_t i = 0; i < p.grad.size(); ++i) {
        singles[name][i] += p.grad[i];
      }
    }
  }
  f.params().zero_grad();
  accumulate_batch(f, {&samples[0], &samples[1]}, noise);
  double worst = 0.0;
  for (const auto & [name, p] : f.params()) {
    worst = std::max(worst, max_abs_diff(p.grad, singles[name]));
  }
  CHECK(worst <= 1e-10);

  std::map<std::string, Tensor> serial;
  for (const auto & [name, p] : f.params()) {
    serial[name] = p.grad;
  }
  f.params().zero_grad();
  accumulate_batch(f, {&samples[0], &samples[1]}, noise, 2);
  for (const auto & [name, p] : f.params()) {
    CHECK_MESSAGE(p.grad == serial[name], name);
  }
}

TEST_CASE("training is deterministic and threads do not change it")
{
  const auto m = small_model();
  const auto samples = build_samples(small_scenarios(3, 4), m, CoordinateFrame::relative);
  OptimConfig opt;
  opt.batch_size = 4;
  opt.seed = 11;
  const auto a = loss_trace(m, samples, opt, 15);
  const auto b = loss_trace(m, samples, opt, 15);
  CHECK(a == b);
  opt.threads = 3;
  CHECK(loss_trace(m, samples, opt, 15) == a);
  opt.threads = 1;
  opt.seed = 12;
  CHECK(loss_trace(m, samples, opt, 15) != a);
}

TEST_CASE("all toggles off trains exactly like the plain LSTM")
{
  model::ModelConfig manual = small_model();
  manual.toggles = model::Toggles::all_off();
  manual.modalities = 1;
  manual.use_noise = false;
  const auto vanilla = model::vanilla_lstm_config(small_model());
  const auto rows = ablation_rows();
  const auto from_row = ablation_model(small_model(), rows.front());
  const auto samples = build_samples(small_scenarios(3, 5), manual, CoordinateFrame::relative);
  OptimConfig opt;
  opt.batch_size = 2;
  const auto a = loss_trace(manual, samples, opt, 10);
  CHECK(loss_trace(vanilla, samples, opt, 10) == a);
  CHECK(loss_trace(from_row, samples, opt, 10) == a);
}

TEST_CASE("ablation rows follow the toggle ladder")
{
  const auto rows = ablation_rows();
  REQUIRE(rows.size() == 6);
  CHECK(rows.front().name == "Baseline");
  CHECK(rows.front().toggles == model::Toggles::all_off());
  CHECK(rows.back().name == "Our-full");
  CHECK(rows.back().toggles == model::Toggles{});
  CHECK(rows[2].toggles == model::Toggles{true, true, false, false, false});
  const auto base = ablation_model(model::ModelConfig{}, rows.front());
  CHECK(base.modalities == 1);
  CHECK_FALSE(base.use_noise);
  CHECK(ablation_model(model::ModelConfig{}, rows[3]).modalities == 5);
}

TEST_CASE("non-finite values abort with the step and the offending group")
{
  const auto m = small_model();
  const auto samples = build_samples(small_scenarios(1, 6), m, CoordinateFrame::relative);
  model::Forecaster f(m, 1);
  OptimConfig opt;
  opt.batch_size = 1;
  Trainer t(f, samples, opt);
  t.step();
  f.params().get("pred.head.bias").value[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    t.step();
    FAIL("expected NumericError");
  } catch (const NumericError & e) {
    const std::string msg = e.what();
    CHECK(msg.find("step 2") != std::string::npos);
    CHECK(msg.find("'") != std::string::npos);
  }
}

TEST_CASE("constant-velocity tracks are learned")
{
  scene::Scenario s;
  s.id = "cv_0";
  s.t_obs = 8;
  s.t_pred = 20;
  for (int a = 0; a < 2; ++a) {
    scene::AgentTrack tr{a, {}, ""};
    for (int t = 1; t <= 20; ++t) {
      tr.points.push_back({t, 0.5 * t - 5.0, a * 2.0 + 0.25 * t});
    }
    s.tracks.push_back(tr);
  }
  const std::vector<scene::Scenario> data(4, s);
  const auto m = model::vanilla_lstm_config();
  const auto samples = build_samples(data, m, CoordinateFrame::world);
  model::Forecaster f(m, 2);
  OptimConfig opt;
  opt.batch_size = 2;
  Trainer t(f, samples, opt);
  double loss = 1e9;
  std::uint64_t step = 0;
  while (step < 2000 && loss >= 1e-3) {
    loss = t.step().loss;
    ++step;
  }
  MESSAGE("constant velocity loss " << loss << " after " << step << " steps");
  CHECK(loss < 1e-3);
}

TEST_CASE("run directory, evaluation consistency and checkpoint round trip")
{
  TrainConfig cfg;
  cfg.model = small_model();
  cfg.train.steps = 6;
  cfg.train.batch_size = 2;
  cfg.train.checkpoint_every = 3;
  const auto samples = build_samples(small_scenarios(3, 7), cfg.model, cfg.data.frame);
  const fs::path dir = scratch_dir("run");
  const RunSummary sum = run_training(cfg, samples, dir / "a");
  run_training(cfg, samples, dir / "b");
  for (const auto * name : {"config.snapshot", "log.csv", "ckpt_3.bin", "ckpt_6.bin", "final.bin", "summary.json"}) {
    CHECK_MESSAGE(fs::exists(dir / "a" / name), name);
  }
  CHECK(strip_last_column(dir / "a" / "log.csv") == strip_last_column(dir / "b" / "log.csv"));
  {
    std::ifstream in(dir / "a" / "log.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "step,loss,winners,grad_norm,wall_seconds");
  }
  std::ifstream snap(dir / "a" / "config.snapshot");
  CHECK(nlohmann::json::parse(snap) == to_json(cfg));

  model::Forecaster f(cfg.model, 999);
  load_checkpoint(dir / "a" / "final.bin", f.params());
  CHECK(f.params().checksum() == sum.checksum);
  const auto report = evaluate_model(f, samples, cfg.eval.seed, cfg.eval.metric);
  CHECK(std::abs(report.ade - sum.train_report.ade) <= 1e-9);
  std::ifstream sj(dir / "a" / "summary.json");
  const auto summary = nlohmann::json::parse(sj);
  CHECK(std::abs(summary["final_train_ade"].get<double>() - report.ade) <= 1e-9);

  // Bitwise-identical forward outputs after a save/load cycle.
  model::Forecaster g(cfg.model, 1234);
  load_checkpoint(dir / "a" / "ckpt_6.bin", g.params());
  std::mt19937_64 r1(3), r2(3);
  for (const auto & s : samples) {
    const auto pa = f.predict(s, f.draw_noise(s, r1));
    const auto pb = g.predict(s, g.draw_noise(s, r2));
    for (std::size_t h = 0; h < pa.modalities.size(); ++h) {
      CHECK(pa.modalities[h] == pb.modalities[h]);
    }
  }

  // A checkpoint of a different architecture is rejected by name.
  model::ModelConfig wider = cfg.model;
  wider.embed = 9;
  model::Forecaster w(wider, 1);
  CHECK_THROWS_AS(load_checkpoint(dir / "a" / "final.bin", w.params()), CheckpointError);

  const auto preds = predict_all(f, samples, 7);
  write_predictions_csv(dir / "pred.csv", preds, samples);
  std::ifstream pc(dir / "pred.csv");
  std::string line;
  std::getline(pc, line);
  CHECK(line == "scenario_id,agent_id,modality,t,x,y");
  std::size_t rows = 0;
  while (std::getline(pc, line)) {
    ++rows;
  }
  std::size_t expected = 0;
  for (const auto & s : samples) {
    expected += s.agents() * cfg.model.modalities * s.future_steps();
  }
  CHECK(rows == expected);
}

TEST_CASE("datasets load from plain text directories and scenario documents")
{
  const fs::path dir = scratch_dir("data");
  fs::create_directories(dir / "txt");
  for (const auto * name : {"alpha", "beta"}) {
    std::ofstream out(dir / "txt" / (std::string(name) + ".txt"));
    for (int t = 0; t < 24; ++t) {
      out << t * 10 << " 1 " << 0.4 * t << " 1.0\n" << t * 10 << " 2 " << 3.0 << " " << -0.3 * t << "\n";
    }
  }
  DataConfig data;
  data.t_obs = 4;
  data.t_pred = 12;
  const auto txt = load_dataset(dir / "txt", data);
  CHECK(txt.size() == 4);
  CHECK(scene::scenario_groups(txt) == std::vector<std::string>{"alpha", "beta"});

  scene::save_scenarios(dir / "json", small_scenarios(2, 8));
  CHECK(load_dataset(dir / "json", data).size() == 2);
  CHECK_THROWS_AS(load_dataset(dir / "nothing", data), MissingInputError);

  TrainConfig cfg;
  cfg.data = data;
  cfg.data.train = (dir / "txt").string();
  cfg.data.held_out = "beta";
  const auto split = load_split(cfg);
  CHECK(split.train.size() == 2);
  CHECK(split.test.size() == 2);
  cfg.data.held_out = "gamma";
  CHECK_THROWS_AS(load_split(cfg), ConfigError);
}
