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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trajcast/baselines.hpp"
#include "trajcast/checkpoint.hpp"
#include "trajcast/config.hpp"
#include "trajcast/errors.hpp"
#include "trajcast/graph.hpp"
#include "trajcast/metrics.hpp"
#include "trajcast/raster.hpp"
#include "trajcast/synthetic.hpp"
#include "trajcast/train.hpp"
#include "trajcast/verify.hpp"

using namespace trajcast;
namespace fs = std::filesystem;

namespace
{

enum Exit : int { ok = 0, failure = 1, missing_input = 2, config_error = 3, checkpoint_mismatch = 4, verification = 5 };

/// Flags shared by every command that reads a run configuration.
struct CommonFlags
{
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App * cmd, CommonFlags & f, const std::string & out_help, const std::string & out_default)
{
  cmd->add_option("-c,--config", f.config, "JSON run configuration");
  cmd->add_option("--set", f.sets, "Override a config value, e.g. --set toggles.EF=false (repeatable)");
  cmd->add_option("--seed", f.seed, "Run seed (overrides train.seed)");
  f.out = out_default;
  cmd->add_option("--out", f.out, out_help)->capture_default_str();
}

train::TrainConfig resolve(const CommonFlags & f, const std::string & fallback_config = {})
{
  std::vector<std::string> sets = f.sets;
  if (f.seed) {
    sets.push_back("train.seed=" + std::to_string(*f.seed));
  }
  const std::string path = f.config.empty() ? fallback_config : f.config;
  return train::load_config(path, sets);
}

void write_json(const fs::path & path, const nlohmann::json & doc)
{
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream(path) << doc.dump(2) << '\n';
}

std::vector<model::Sample> samples_for(const train::TrainConfig & cfg, const std::vector<scene::Scenario> & sc)
{
  return train::build_samples(sc, cfg.model, cfg.data.frame);
}

// ---------------------------------------------------------------- gen

struct GenFlags
{
  std::string kind = "ego_with_plan";
  std::size_t count = 10;
  std::uint64_t seed = 1;
  int t_obs = 8;
  int t_pred = 20;
  std::size_t pedestrians = 4;
  std::size_t vehicles = 2;
  double lane_noise = 0.0;
  std::string prefix;
  std::string format = "scenario_json";
  std::string out = "data";
};

int cmd_gen(const GenFlags & f)
{
  scene::SyntheticSpec spec;
  spec.kind = scene::parse_template(f.kind);
  spec.count = f.count;
  spec.t_obs = f.t_obs;
  spec.t_pred = f.t_pred;
  spec.pedestrians = f.pedestrians;
  spec.vehicles = f.vehicles;
  spec.lane_noise = f.lane_noise;
  spec.id_prefix = f.prefix;
  const auto format = scene::parse_track_format(f.format);
  const auto scenarios = scene::generate_synthetic(spec, f.seed);
  fs::create_directories(f.out);
  if (format == scene::TrackFormat::scenario_json) {
    scene::save_scenarios(f.out, scenarios);
  } else {
    for (const auto & s : scenarios) {
      scene::save_plain_text(fs::path(f.out) / (s.id + ".txt"), s);
    }
  }
  write_json(fs::path(f.out) / "gen.snapshot",
             {{"template", scene::template_name(spec.kind)},
              {"count", spec.count},
              {"seed", f.seed},
              {"t_obs", spec.t_obs},
              {"t_pred", spec.t_pred},
              {"pedestrians", spec.pedestrians},
              {"vehicles", spec.vehicles},
              {"lane_noise", spec.lane_noise},
              {"prefix", spec.id_prefix},
              {"format", f.format}});
  std::cout << "wrote " << scenarios.size() << " scenarios to " << f.out << "\n";
  return ok;
}

// ---------------------------------------------------------------- rasterize

int cmd_rasterize(const CommonFlags & c, const std::string & scenario_path)
{
  train::TrainConfig cfg = resolve(c);
  cfg.model.toggles.ef = true;
  const auto result = scene::load_tracks(scenario_path, scene::TrackFormat::scenario_json);
  const auto & sc = result.scenarios.at(0);
  const model::Sample s = model::make_sample(sc, cfg.model);
  raster::SemanticImage img{cfg.model.raster, s.raster_pose, *s.image};
  const fs::path out = c.out;
  if (out.has_parent_path()) {
    fs::create_directories(out.parent_path());
  }
  raster::write_pgm(out, img);
  write_json(fs::path(out.string() + ".snapshot"), train::to_json(cfg));
  std::printf("wrote %zux%zu semantic image centred at (%.3f, %.3f) to %s\n", cfg.model.raster.height,
              cfg.model.raster.width, s.raster_pose.x, s.raster_pose.y, out.c_str());
  return ok;
}

// ---------------------------------------------------------------- train

int cmd_train(const CommonFlags & c, bool quiet)
{
  const train::TrainConfig cfg = resolve(c);
  const auto split = train::load_split(cfg);
  const auto samples = samples_for(cfg, split.train);
  std::cout << "training on " << samples.size() << " scenarios for " << cfg.train.steps << " steps\n";
  const auto every = std::max<std::uint64_t>(1, cfg.train.steps / 20);
  const auto sum = train::run_training(cfg, samples, c.out, quiet ? nullptr : &std::cout, every);
  std::printf("final loss %.6f  train ADE/FDE %s  -> %s\n", sum.final_loss,
              metrics::format_cell(sum.train_report.ade, sum.train_report.fde, 4).c_str(),
              (fs::path(c.out) / "final.bin").c_str());
  return ok;
}

// ---------------------------------------------------------------- eval / predict

struct EvalFlags
{
  std::string checkpoint;
  std::string baseline;
  std::string split = "test";
};

std::string config_beside(const std::string & checkpoint)
{
  if (checkpoint.empty()) {
    return {};
  }
  const fs::path snap = fs::path(checkpoint).parent_path() / "config.snapshot";
  return fs::exists(snap) ? snap.string() : std::string();
}

struct Predicted
{
  train::TrainConfig cfg;
  std::vector<model::Sample> samples;
  std::vector<model::PredictionSet> preds;
  std::string method;
};

Predicted run_predictions(const CommonFlags & c, const EvalFlags & e)
{
  Predicted p;
  p.cfg = resolve(c, config_beside(e.checkpoint));
  if (e.split != "train" && e.split != "test") {
    throw ConfigError("--split must be train or test");
  }
  const auto split = train::load_split(p.cfg);
  p.samples = samples_for(p.cfg, e.split == "train" ? split.train : split.test);
  if (!e.baseline.empty()) {
    p.method = e.baseline;
    for (const auto & s : p.samples) {
      if (e.baseline == "linear") {
        p.preds.push_back(baselines::predict_linear(s));
      } else if (e.baseline == "kalman") {
        p.preds.push_back(baselines::predict_kalman(s));
      } else {
        throw ConfigError("unknown baseline '" + e.baseline + "' (expected linear or kalman)");
      }
    }
    return p;
  }
  if (e.checkpoint.empty()) {
    throw ConfigError("either --checkpoint or --baseline is required");
  }
  if (!fs::exists(e.checkpoint)) {
    throw MissingInputError("checkpoint not found: " + e.checkpoint);
  }
  model::Forecaster f(p.cfg.model, train::init_seed(p.cfg.train.seed));
  load_checkpoint(e.checkpoint, f.params());
  p.method = "model";
  p.preds = train::predict_all(f, p.samples, p.cfg.eval.seed);
  return p;
}

int cmd_eval(const CommonFlags & c, const EvalFlags & e)
{
  const Predicted p = run_predictions(c, e);
  const auto report = train::evaluate_predictions(p.preds, p.samples, p.cfg.eval.metric);
  const fs::path out = c.out;
  fs::create_directories(out);
  write_json(out / "config.snapshot", train::to_json(p.cfg));
  metrics::write_report_csv(out / "metrics.csv", report);
  const std::vector<std::string> header{"Method", "K", "ADE/FDE"};
  const std::vector<metrics::TableRow> rows{
    {p.method, {std::to_string(report.k), metrics::format_cell(report.ade, report.fde)}}};
  metrics::write_table_csv(out / "table.csv", header, rows);
  const std::string table = metrics::format_table(header, rows);
  std::ofstream(out / "table.txt") << table;
  write_json(out / "summary.json", {{"method", p.method},
                                    {"checkpoint", e.checkpoint},
                                    {"split", e.split},
                                    {"ade", report.ade},
                                    {"fde", report.fde},
                                    {"agents", report.agents},
                                    {"scenarios", report.scenarios.size()},
                                    {"k", report.k},
                                    {"best_of_k", report.best_of_k ? "per_agent" : "none"},
                                    {"metric", metrics::metric_name(report.metric)},
                                    {"eval_seed", p.cfg.eval.seed}});
  std::cout << table;
  return ok;
}

int cmd_predict(const CommonFlags & c, const EvalFlags & e)
{
  const Predicted p = run_predictions(c, e);
  const fs::path out = c.out;
  if (out.has_parent_path()) {
    fs::create_directories(out.parent_path());
  }
  train::write_predictions_csv(out, p.preds, p.samples);
  write_json(fs::path(out.string() + ".snapshot"), {{"method", p.method}, {"config", train::to_json(p.cfg)}});
  std::cout << "wrote predictions for " << p.samples.size() << " scenarios to " << out.string() << "\n";
  return ok;
}

// ---------------------------------------------------------------- gradcheck

int cmd_gradcheck(double tol, std::uint64_t seed, const std::string & fault)
{
  if (fault == "tanh") {
    debug::inject_fault(debug::Fault::tanh_backward_sign);
  } else if (fault == "matmul") {
    debug::inject_fault(debug::Fault::matmul_backward_sign);
  } else if (!fault.empty()) {
    throw ConfigError("unknown fault '" + fault + "'");
  }
  GradCheckOptions opt;
  opt.rel_tol = tol;
  const auto results = verify::gradient_suite(seed, opt);
  debug::inject_fault(debug::Fault::none);
  std::vector<std::string> failed;
  for (const auto & r : results) {
    std::printf("%-28s %6zu entries  worst rel err %.3e  %s\n", r.group.c_str(), r.checked, r.worst_rel_error,
                r.passed() ? "ok" : "FAIL");
    if (!r.passed()) {
      failed.push_back(r.group);
    }
  }
  if (!failed.empty()) {
    std::string list;
    for (const auto & g : failed) {
      list += (list.empty() ? "" : ", ") + g;
    }
    std::fprintf(stderr, "gradient check failed (tolerance %g): %s\n", tol, list.c_str());
    return verification;
  }
  std::printf("all %zu groups within tolerance %g\n", results.size(), tol);
  return ok;
}

// ---------------------------------------------------------------- ablate

int cmd_ablate(const CommonFlags & c)
{
  const train::TrainConfig base = resolve(c);
  const auto split = train::load_split(base);
  const fs::path out = c.out;
  fs::create_directories(out);
  write_json(out / "config.snapshot", train::to_json(base));
  const std::vector<std::string> header{"Method", "PF", "TF", "EMF", "ETF", "EF", "ADE/FDE"};
  std::vector<metrics::TableRow> rows;
  auto mark = [](bool on) { return std::string(on ? "x" : ""); };
  for (const auto & row : train::ablation_rows()) {
    train::TrainConfig cfg = base;
    cfg.model = train::ablation_model(base.model, row);
    const auto train_samples = samples_for(cfg, split.train);
    const auto test_samples = samples_for(cfg, split.test);
    std::cout << "== " << row.name << "\n";
    const auto every = std::max<std::uint64_t>(1, cfg.train.steps / 5);
    train::run_training(cfg, train_samples, out / row.name, &std::cout, every);
    model::Forecaster f(cfg.model, 0);
    load_checkpoint(out / row.name / "final.bin", f.params());
    const auto report = train::evaluate_model(f, test_samples, cfg.eval.seed, cfg.eval.metric);
    const auto & t = row.toggles;
    rows.push_back({row.name,
                    {mark(t.pf), mark(t.tf), mark(t.emf), mark(t.etf), mark(t.ef),
                     metrics::format_cell(report.ade, report.fde)}});
  }
  metrics::write_table_csv(out / "ablation.csv", header, rows);
  const std::string table = metrics::format_table(header, rows);
  std::ofstream(out / "ablation.txt") << table;
  std::cout << table;
  return ok;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"trajcast: multi-agent trajectory forecasting with pooled interaction features"};
  app.require_subcommand(1);

  GenFlags gen;
  auto * gen_cmd = app.add_subcommand("gen", "Generate synthetic scenarios");
  gen_cmd->add_option("--template", gen.kind, "crossing_pedestrians | lane_following_vehicle | ego_with_plan")
    ->capture_default_str();
  gen_cmd->add_option("--count", gen.count, "Number of scenarios")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--t-obs", gen.t_obs, "Observed frames")->capture_default_str();
  gen_cmd->add_option("--t-pred", gen.t_pred, "Total frames")->capture_default_str();
  gen_cmd->add_option("--pedestrians", gen.pedestrians)->capture_default_str();
  gen_cmd->add_option("--vehicles", gen.vehicles)->capture_default_str();
  gen_cmd->add_option("--lane-noise", gen.lane_noise, "Position noise on vehicles (m)")->capture_default_str();
  gen_cmd->add_option("--prefix", gen.prefix, "Scenario id prefix (default: template name)");
  gen_cmd->add_option("--format", gen.format, "scenario_json | plain_text")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->capture_default_str();

  CommonFlags ras;
  std::string ras_scenario;
  auto * ras_cmd = app.add_subcommand("rasterize", "Render the semantic map image of one scenario");
  add_common(ras_cmd, ras, "Output PGM file", "raster.pgm");
  ras_cmd->add_option("--scenario", ras_scenario, "Scenario document (JSON)")->required();

  CommonFlags tr;
  bool quiet = false;
  auto * train_cmd = app.add_subcommand("train", "Train a model and write a run directory");
  add_common(train_cmd, tr, "Run directory", "run");
  train_cmd->add_flag("--quiet", quiet, "No progress lines");

  CommonFlags ev;
  EvalFlags ev_flags;
  auto * eval_cmd = app.add_subcommand("eval", "Score a checkpoint or a baseline with ADE/FDE");
  add_common(eval_cmd, ev, "Output directory", "eval");
  eval_cmd->add_option("--checkpoint", ev_flags.checkpoint, "Model checkpoint (.bin)");
  eval_cmd->add_option("--baseline", ev_flags.baseline, "linear | kalman instead of a checkpoint");
  eval_cmd->add_option("--split", ev_flags.split, "train | test")->capture_default_str();

  CommonFlags pr;
  EvalFlags pr_flags;
  auto * predict_cmd = app.add_subcommand("predict", "Write predicted trajectories as CSV");
  add_common(predict_cmd, pr, "Output CSV", "predictions.csv");
  predict_cmd->add_option("--checkpoint", pr_flags.checkpoint, "Model checkpoint (.bin)");
  predict_cmd->add_option("--baseline", pr_flags.baseline, "linear | kalman instead of a checkpoint");
  predict_cmd->add_option("--split", pr_flags.split, "train | test")->capture_default_str();

  double tol = 1e-4;
  std::uint64_t gc_seed = 1;
  std::string fault;
  auto * gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every gradient");
  gc_cmd->add_option("--tol", tol, "Relative tolerance")->capture_default_str();
  gc_cmd->add_option("--seed", gc_seed, "Seed for random inputs and weights")->capture_default_str();
  gc_cmd->add_option("--inject-fault", fault, "Break a backward rule on purpose (tanh | matmul)")->group("");

  CommonFlags ab;
  auto * ablate_cmd = app.add_subcommand("ablate", "Train and evaluate the six feature-toggle configurations");
  add_common(ablate_cmd, ab, "Output directory", "ablation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*gen_cmd) {
      return cmd_gen(gen);
    }
    if (*ras_cmd) {
      return cmd_rasterize(ras, ras_scenario);
    }
    if (*train_cmd) {
      return cmd_train(tr, quiet);
    }
    if (*eval_cmd) {
      return cmd_eval(ev, ev_flags);
    }
    if (*predict_cmd) {
      return cmd_predict(pr, pr_flags);
    }
    if (*gc_cmd) {
      return cmd_gradcheck(tol, gc_seed, fault);
    }
    if (*ablate_cmd) {
      return cmd_ablate(ab);
    }
  } catch (const MissingInputError & e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return missing_input;
  } catch (const ParseError & e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return missing_input;
  } catch (const ConfigError & e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const CheckpointError & e) {
    std::fprintf(stderr, "checkpoint mismatch at parameter '%s': %s\n", e.parameter().c_str(), e.what());
    return checkpoint_mismatch;
  } catch (const std::exception & e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return failure;
  }
  return failure;
}
