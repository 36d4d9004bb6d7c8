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

#include "trajcast/config.hpp"

#include <fstream>

#include "trajcast/errors.hpp"

namespace trajcast::train
{

using nlohmann::json;

CoordinateFrame parse_frame(const std::string & name)
{
  if (name == "world") {
    return CoordinateFrame::world;
  }
  if (name == "relative") {
    return CoordinateFrame::relative;
  }
  throw ConfigError("unknown coordinate frame '" + name + "' (expected world or relative)");
}

std::string frame_name(CoordinateFrame f) { return f == CoordinateFrame::world ? "world" : "relative"; }

void TrainConfig::validate() const
{
  model.validate();
  if (train.batch_size < 1) {
    throw ConfigError("train.batch_size must be >= 1");
  }
  if (train.steps < 1) {
    throw ConfigError("train.steps must be >= 1");
  }
  if (!(train.learning_rate > 0.0)) {
    throw ConfigError("train.learning_rate must be positive");
  }
  if (train.threads < 1) {
    throw ConfigError("train.threads must be >= 1");
  }
  if (data.format != "auto") {
    scene::parse_track_format(data.format);
  }
  if (data.t_obs < 1 || data.t_pred <= data.t_obs) {
    throw ConfigError("data: need 1 <= t_obs < t_pred");
  }
  if (data.stride < 0) {
    throw ConfigError("data.stride must be >= 0");
  }
}

namespace
{

std::string variety_name(nn::VarietyMin v) { return v == nn::VarietyMin::scene ? "scene" : "agent"; }

nn::VarietyMin parse_variety(const std::string & s)
{
  if (s == "scene") {
    return nn::VarietyMin::scene;
  }
  if (s == "agent") {
    return nn::VarietyMin::agent;
  }
  throw ConfigError("unknown variety_min '" + s + "' (expected scene or agent)");
}

const char * type_label(const json & v)
{
  if (v.is_boolean()) {
    return "boolean";
  }
  if (v.is_number_unsigned()) {
    return "non-negative integer";
  }
  if (v.is_number()) {
    return "number";
  }
  if (v.is_string()) {
    return "string";
  }
  if (v.is_array()) {
    return "array";
  }
  if (v.is_object()) {
    return "object";
  }
  return "null";
}

bool compatible(const json & schema, const json & value)
{
  if (schema.is_null()) {
    return value.is_null() || value.is_number_integer();
  }
  if (schema.is_number_unsigned()) {
    return value.is_number_unsigned();
  }
  if (schema.is_number()) {
    return value.is_number();
  }
  if (schema.is_array()) {
    if (!value.is_array() || value.size() != schema.size()) {
      return false;
    }
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!compatible(schema[i], value[i])) {
        return false;
      }
    }
    return true;
  }
  return schema.type() == value.type();
}

/// Overlays `patch` onto `base`, rejecting keys and types `base` does not have.
void merge_checked(json & base, const json & patch, const std::string & where)
{
  if (!patch.is_object()) {
    throw ConfigError("config" + (where.empty() ? std::string() : " key '" + where + "'") + " must be an object");
  }
  for (const auto & [key, value] : patch.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) {
      throw ConfigError("unknown config key '" + path + "'");
    }
    json & slot = base[key];
    if (slot.is_object()) {
      merge_checked(slot, value, path);
    } else if (!compatible(slot, value)) {
      throw ConfigError("config key '" + path + "' expects " + type_label(slot) + ", got " + type_label(value));
    } else {
      slot = value;
    }
  }
}

}  // namespace

json to_json(const TrainConfig & c)
{
  const auto & m = c.model;
  json doc;
  doc["toggles"] = {{"PF", m.toggles.pf}, {"TF", m.toggles.tf}, {"EMF", m.toggles.emf}, {"ETF", m.toggles.etf},
                    {"EF", m.toggles.ef}};
  doc["model"] = {
    {"modalities", m.modalities},
    {"noise_dim", m.noise_dim},
    {"use_noise", m.use_noise},
    {"embed", m.embed},
    {"gru_hidden", m.gru_hidden},
    {"lstm_hidden", m.lstm_hidden},
    {"conv_widths", m.conv_widths},
    {"include_ego_in_pooling", m.include_ego_in_pooling},
    {"variety_min", variety_name(m.variety_min)},
    {"raster",
     {{"height", m.raster.height},
      {"width", m.raster.width},
      {"extent_h", m.raster.extent_h},
      {"extent_w", m.raster.extent_w},
      {"half_width", m.raster.half_width},
      {"align_heading", m.raster.align_heading}}},
    {"roi", {{"half_extent", m.roi.half_extent}, {"bins", m.roi.bins}, {"samples", m.roi.samples}}},
  };
  doc["train"] = {{"batch_size", c.train.batch_size},       {"steps", c.train.steps},
                  {"learning_rate", c.train.learning_rate}, {"seed", c.train.seed},
                  {"checkpoint_every", c.train.checkpoint_every}, {"threads", c.train.threads}};
  doc["data"] = {{"train", c.data.train},
                 {"test", c.data.test},
                 {"format", c.data.format},
                 {"held_out", c.data.held_out},
                 {"coordinate_frame", frame_name(c.data.frame)},
                 {"t_obs", c.data.t_obs},
                 {"t_pred", c.data.t_pred},
                 {"stride", c.data.stride},
                 {"ego_id", c.data.ego_id ? json(*c.data.ego_id) : json(nullptr)}};
  doc["eval"] = {{"seed", c.eval.seed}, {"metric", metrics::metric_name(c.eval.metric)}};
  return doc;
}

TrainConfig from_json(const json & patch)
{
  json doc = to_json(TrainConfig{});
  // Signed schema slots accept any integer; the checks below reject bad ranges.
  for (const char * key : {"t_obs", "t_pred", "stride"}) {
    doc["data"][key] = static_cast<std::int64_t>(doc["data"][key].get<int>());
  }
  merge_checked(doc, patch, "");
  TrainConfig c;
  try {
    auto & m = c.model;
    const json & t = doc["toggles"];
    m.toggles = {t["PF"].get<bool>(), t["TF"].get<bool>(), t["EMF"].get<bool>(), t["ETF"].get<bool>(),
                 t["EF"].get<bool>()};
    const json & md = doc["model"];
    m.modalities = md["modalities"].get<std::size_t>();
    m.noise_dim = md["noise_dim"].get<std::size_t>();
    m.use_noise = md["use_noise"].get<bool>();
    m.embed = md["embed"].get<std::size_t>();
    m.gru_hidden = md["gru_hidden"].get<std::size_t>();
    m.lstm_hidden = md["lstm_hidden"].get<std::size_t>();
    m.conv_widths = md["conv_widths"].get<std::array<std::size_t, 3>>();
    m.include_ego_in_pooling = md["include_ego_in_pooling"].get<bool>();
    m.variety_min = parse_variety(md["variety_min"].get<std::string>());
    const json & r = md["raster"];
    m.raster.height = r["height"].get<std::size_t>();
    m.raster.width = r["width"].get<std::size_t>();
    m.raster.extent_h = r["extent_h"].get<double>();
    m.raster.extent_w = r["extent_w"].get<double>();
    m.raster.half_width = r["half_width"].get<double>();
    m.raster.align_heading = r["align_heading"].get<bool>();
    const json & roi = md["roi"];
    m.roi.half_extent = roi["half_extent"].get<double>();
    m.roi.bins = roi["bins"].get<std::size_t>();
    m.roi.samples = roi["samples"].get<std::size_t>();

    const json & tr = doc["train"];
    c.train.batch_size = tr["batch_size"].get<std::size_t>();
    c.train.steps = tr["steps"].get<std::uint64_t>();
    c.train.learning_rate = tr["learning_rate"].get<double>();
    c.train.seed = tr["seed"].get<std::uint64_t>();
    c.train.checkpoint_every = tr["checkpoint_every"].get<std::uint64_t>();
    c.train.threads = tr["threads"].get<std::size_t>();

    const json & d = doc["data"];
    c.data.train = d["train"].get<std::string>();
    c.data.test = d["test"].get<std::string>();
    c.data.format = d["format"].get<std::string>();
    c.data.held_out = d["held_out"].get<std::string>();
    c.data.frame = parse_frame(d["coordinate_frame"].get<std::string>());
    c.data.t_obs = d["t_obs"].get<int>();
    c.data.t_pred = d["t_pred"].get<int>();
    c.data.stride = d["stride"].get<int>();
    if (!d["ego_id"].is_null()) {
      c.data.ego_id = d["ego_id"].get<int>();
    }

    const json & e = doc["eval"];
    c.eval.seed = e["seed"].get<std::uint64_t>();
    c.eval.metric = metrics::parse_metric(e["metric"].get<std::string>());
  } catch (const json::exception & ex) {
    throw ConfigError(std::string("invalid config: ") + ex.what());
  }
  c.validate();
  return c;
}

void apply_override(json & doc, const std::string & assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) {
    value = text;
  }
  json * node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) {
      throw ConfigError("override key '" + key + "' has an empty component");
    }
    if (!node->is_object()) {
      *node = json::object();
    }
    node = &(*node)[part];
    if (dot == std::string::npos) {
      break;
    }
    start = dot + 1;
  }
  *node = std::move(value);
}

TrainConfig load_config(const std::filesystem::path & path, const std::vector<std::string> & overrides)
{
  json doc = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) {
      throw MissingInputError("cannot open config file " + path.string());
    }
    doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
      throw ConfigError("config file " + path.string() + " is not valid JSON");
    }
  }
  for (const auto & o : overrides) {
    apply_override(doc, o);
  }
  return from_json(doc);
}

}  // namespace trajcast::train
