// Copyright 2026 The cmsched Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cmsched/config.hpp"

#include <algorithm>

#include "cmsched/error.hpp"

namespace cmsched {

std::string join_path(std::string_view path, std::string_view key) {
  return path.empty() ? std::string(key) : std::string(path) + "." + std::string(key);
}

void require_object(const Json& j, std::string_view path) {
  if (!j.is_object()) throw ConfigError(std::string(path.empty() ? "config" : path) + " must be a JSON object");
}

void reject_unknown(const Json& j, std::string_view path, std::initializer_list<std::string_view> allowed) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError("unknown field " + join_path(path, item.key()));
    }
  }
}

Json parse_json_text(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

KarrasParams parse_karras(const Json& j, std::string_view path) {
  KarrasParams p;
  require_object(j, path);
  reject_unknown(j, path, {"sigma_min", "sigma_max", "rho", "s1"});
  read_field(j, path, "sigma_min", p.sigma_min);
  read_field(j, path, "sigma_max", p.sigma_max);
  read_field(j, path, "rho", p.rho);
  read_field(j, path, "s1", p.s1);
  p.validate();
  return p;
}

ScheduleConfig parse_schedule(const Json& schedule, const Json* high_noise) {
  ScheduleConfig s;
  require_object(schedule, "schedule");
  reject_unknown(schedule, "schedule", {"kind", "curve", "jitter_std", "batch_size", "mean_log", "std_log"});
  std::string kind = to_string(s.kind);
  read_field(schedule, "schedule", "kind", kind);
  s.kind = schedule_kind_from_string(kind);
  read_field(schedule, "schedule", "curve", s.poly.curve);
  read_field(schedule, "schedule", "jitter_std", s.poly.jitter_std);
  read_field(schedule, "schedule", "batch_size", s.poly.batch_size);
  read_field(schedule, "schedule", "mean_log", s.mean_log);
  read_field(schedule, "schedule", "std_log", s.std_log);
  if (high_noise && !high_noise->is_null()) {
    require_object(*high_noise, "high_noise");
    reject_unknown(*high_noise, "high_noise", {"ratio", "sigma_lo", "sigma_hi"});
    read_field(*high_noise, "high_noise", "ratio", s.high_noise.ratio);
    read_field(*high_noise, "high_noise", "sigma_lo", s.high_noise.sigma_lo);
    read_field(*high_noise, "high_noise", "sigma_hi", s.high_noise.sigma_hi);
  }
  s.validate();
  return s;
}

CurriculumConfig parse_curriculum(const Json& j, std::string_view path) {
  CurriculumConfig c;
  require_object(j, path);
  reject_unknown(j, path, {"kind", "s0", "s1_cap", "total_steps", "rho"});
  std::string kind = to_string(c.kind);
  read_field(j, path, "kind", kind);
  c.kind = curriculum_kind_from_string(kind);
  read_field(j, path, "s0", c.s0);
  read_field(j, path, "s1_cap", c.s1_cap);
  read_field(j, path, "total_steps", c.total_steps);
  read_field(j, path, "rho", c.rho);
  return c;
}

BucketSpec parse_buckets(const Json& j) {
  BucketSpec spec;
  if (j.is_null()) return spec;
  if (!j.is_array()) throw ConfigError("buckets must be an array of sigma edges");
  spec.edges.clear();
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError("buckets entries must be numbers");
    spec.edges.push_back(e.get<double>());
  }
  spec.validate();
  return spec;
}

TrainConfig parse_train_config(const Json& j) {
  TrainConfig c;
  require_object(j, "config");
  reject_unknown(j, "", {"karras", "schedule", "high_noise", "curriculum", "loss", "model", "batch_size",
                         "total_steps", "learning_rate", "optimizer", "seed", "dataset", "eval"});
  if (j.contains("karras")) c.karras = parse_karras(j["karras"]);
  if (j.contains("schedule") || j.contains("high_noise")) {
    const Json empty = Json::object();
    c.schedule = parse_schedule(j.contains("schedule") ? j["schedule"] : empty,
                                j.contains("high_noise") ? &j["high_noise"] : nullptr);
  }
  if (j.contains("curriculum")) c.curriculum = parse_curriculum(j["curriculum"]);
  if (j.contains("loss")) {
    const Json& l = j["loss"];
    require_object(l, "loss");
    reject_unknown(l, "loss", {"kind", "huber_c", "weighting"});
    std::string kind = to_string(c.loss.kind);
    read_field(l, "loss", "kind", kind);
    c.loss.kind = loss_kind_from_string(kind);
    if (l.contains("huber_c") && !l["huber_c"].is_null()) {
      double h = 0.0;
      read_field(l, "loss", "huber_c", h);
      c.loss.huber_c = h;
    }
    std::string weighting = to_string(c.loss.weighting);
    read_field(l, "loss", "weighting", weighting);
    c.loss.weighting = weighting_kind_from_string(weighting);
  }
  if (j.contains("model")) {
    const Json& m = j["model"];
    require_object(m, "model");
    reject_unknown(m, "model", {"data_dim", "hidden", "fourier_features", "sigma_data"});
    read_field(m, "model", "data_dim", c.model.data_dim);
    read_field(m, "model", "hidden", c.model.hidden);
    read_field(m, "model", "fourier_features", c.model.fourier_features);
    read_field(m, "model", "sigma_data", c.sigma_data);
  }
  read_field(j, "", "batch_size", c.batch_size);
  read_field(j, "", "total_steps", c.total_steps);
  read_field(j, "", "learning_rate", c.learning_rate);
  if (j.contains("optimizer") && j["optimizer"].is_string()) {
    c.optimizer = optimizer_kind_from_string(j["optimizer"].get<std::string>());
  } else if (j.contains("optimizer") && !j["optimizer"].is_null()) {
    const Json& o = j["optimizer"];
    require_object(o, "optimizer");
    reject_unknown(o, "optimizer", {"kind", "beta1", "beta2", "eps"});
    std::string kind = to_string(c.optimizer);
    read_field(o, "optimizer", "kind", kind);
    c.optimizer = optimizer_kind_from_string(kind);
    read_field(o, "optimizer", "beta1", c.adam_beta1);
    read_field(o, "optimizer", "beta2", c.adam_beta2);
    read_field(o, "optimizer", "eps", c.adam_eps);
  }
  read_field(j, "", "seed", c.seed);
  std::string dataset = to_string(c.dataset);
  read_field(j, "", "dataset", dataset);
  c.dataset = dataset_from_string(dataset);
  if (j.contains("eval")) {
    const Json& e = j["eval"];
    require_object(e, "eval");
    reject_unknown(e, "eval", {"samples", "projections", "steps"});
    read_field(e, "eval", "samples", c.eval.samples);
    read_field(e, "eval", "projections", c.eval.projections);
    read_field(e, "eval", "steps", c.eval.steps);
  }
  c.validate();
  return c;
}

Json to_json(const KarrasParams& p) {
  return Json{{"sigma_min", p.sigma_min}, {"sigma_max", p.sigma_max}, {"rho", p.rho}, {"s1", p.s1}};
}

Json schedule_to_json(const ScheduleConfig& s) {
  return Json{{"kind", to_string(s.kind)},       {"curve", s.poly.curve},  {"jitter_std", s.poly.jitter_std},
              {"batch_size", s.poly.batch_size}, {"mean_log", s.mean_log}, {"std_log", s.std_log}};
}

Json high_noise_to_json(const HighNoiseParams& h) {
  return Json{{"ratio", h.ratio}, {"sigma_lo", h.sigma_lo}, {"sigma_hi", h.sigma_hi}};
}

Json to_json(const CurriculumConfig& c) {
  return Json{{"kind", to_string(c.kind)},
              {"s0", c.s0},
              {"s1_cap", c.s1_cap},
              {"total_steps", c.total_steps},
              {"rho", c.rho}};
}

Json to_json(const TrainConfig& c) {
  Json loss{{"kind", to_string(c.loss.kind)}, {"huber_c", nullptr}, {"weighting", to_string(c.loss.weighting)}};
  if (c.loss.huber_c) loss["huber_c"] = *c.loss.huber_c;
  return Json{{"karras", to_json(c.karras)},
              {"schedule", schedule_to_json(c.schedule)},
              {"high_noise", high_noise_to_json(c.schedule.high_noise)},
              {"curriculum", to_json(c.curriculum)},
              {"loss", loss},
              {"model",
               {{"data_dim", c.model.data_dim},
                {"hidden", c.model.hidden},
                {"fourier_features", c.model.fourier_features},
                {"sigma_data", c.sigma_data}}},
              {"batch_size", c.batch_size},
              {"total_steps", c.total_steps},
              {"learning_rate", c.learning_rate},
              {"optimizer",
               {{"kind", to_string(c.optimizer)},
                {"beta1", c.adam_beta1},
                {"beta2", c.adam_beta2},
                {"eps", c.adam_eps}}},
              {"seed", c.seed},
              {"dataset", to_string(c.dataset)},
              {"eval", {{"samples", c.eval.samples}, {"projections", c.eval.projections}, {"steps", c.eval.steps}}}};
}

void apply_override(Json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' must have the form key.path=value");
  }
  const std::string_view key = assignment.substr(0, eq);
  const std::string_view raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::parse_error&) {
    value = std::string(raw);
  }
  if (!doc.is_object()) throw ConfigError("overrides need a JSON object config");
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part(key.substr(start, dot == std::string_view::npos ? key.size() - start : dot - start));
    if (part.empty()) throw ConfigError("override key '" + std::string(key) + "' has an empty segment");
    if (dot == std::string_view::npos) {
      (*node)[part] = value;
      return;
    }
    Json& child = (*node)[part];
    if (child.is_null()) child = Json::object();
    if (!child.is_object()) {
      throw ConfigError("override key '" + std::string(key) + "' descends into non-object field " + part);
    }
    node = &child;
    start = dot + 1;
  }
}

}  // namespace cmsched
