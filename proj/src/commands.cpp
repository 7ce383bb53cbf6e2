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

#include "cmsched/commands.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <utility>

#include "cmsched/analysis.hpp"
#include "cmsched/config.hpp"
#include "cmsched/curriculum.hpp"
#include "cmsched/datasets.hpp"
#include "cmsched/error.hpp"
#include "cmsched/io.hpp"
#include "cmsched/karras.hpp"
#include "cmsched/rng.hpp"
#include "cmsched/schedule.hpp"
#include "cmsched/swd.hpp"
#include "cmsched/toy_ct.hpp"

#ifndef CMSCHED_VERSION
#define CMSCHED_VERSION "0.0.0"
#endif

namespace cmsched {
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestFormat = "cmsched-manifest";

// Artifacts are buffered and only written once the whole command succeeded,
// so a failing run never leaves a partial set behind.
class Artifacts {
 public:
  void add(std::string name, std::string bytes) { files_.emplace_back(std::move(name), std::move(bytes)); }

  Json write_all(const fs::path& dir) const {
    Json hashes = Json::object();
    for (const auto& [name, bytes] : files_) {
      write_text_file(dir / name, bytes);
      hashes[name] = sha256_hex(bytes);
    }
    return hashes;
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Context {
  const CommandOptions& options;
  Json config;          // overrides applied, not yet validated
  std::uint64_t seed = 0;
  Json inputs = Json::object();  // path -> sha256 of every file read besides the config
  Artifacts artifacts;

  void log(const std::string& line) const {
    if (options.log) options.log(line);
  }
  std::string read_input(const fs::path& path) {
    const std::string bytes = read_text_file(path);
    inputs[path.generic_string()] = sha256_hex(bytes);
    return bytes;
  }
};

std::uint64_t json_seed(const Json& value, std::string_view field) {
  if (!value.is_number_integer()) throw ConfigError(std::string(field) + " must be a non-negative integer");
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  const auto v = value.get<std::int64_t>();
  if (v < 0) throw ConfigError(std::string(field) + " must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

// Loads the config (or a manifest of an earlier run), applies overrides and
// settles the seed: --seed, then the manifest or config seed, then 0.
void load(Context& ctx) {
  const auto& opt = ctx.options;
  std::string text;
  try {
    text = read_text_file(opt.config_path);
  } catch (const RuntimeFailure& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  Json doc = parse_json_text(text, opt.config_path.string());
  std::optional<std::uint64_t> seed;
  if (doc.is_object() && doc.value("format", "") == kManifestFormat) {
    const std::string recorded = doc.value("subcommand", "");
    if (recorded != to_string(opt.subcommand)) {
      throw ConfigError("manifest " + opt.config_path.string() + " records subcommand '" + recorded + "', not '" +
                        to_string(opt.subcommand) + "'");
    }
    if (!doc.contains("config")) throw ConfigError("manifest is missing field config");
    if (doc.contains("seed")) seed = json_seed(doc["seed"], "seed");
    doc = doc["config"];
  }
  require_object(doc, "");
  for (const auto& assignment : opt.overrides) apply_override(doc, assignment);
  if (!seed && doc.contains("seed") && !doc["seed"].is_null()) seed = json_seed(doc["seed"], "seed");
  if (opt.seed) seed = opt.seed;
  ctx.seed = seed.value_or(0);
  ctx.config = std::move(doc);
}

void finish(Context& ctx, const Json& resolved) {
  const auto& opt = ctx.options;
  std::error_code ec;
  fs::create_directories(opt.output_dir, ec);
  if (ec) throw RuntimeFailure("cannot create output directory " + opt.output_dir.string() + ": " + ec.message());
  Json manifest{{"format", kManifestFormat},
                {"version", 1},
                {"tool_version", CMSCHED_VERSION},
                {"subcommand", to_string(opt.subcommand)},
                {"seed", ctx.seed},
                {"config", resolved},
                {"inputs", ctx.inputs},
                {"artifacts", ctx.artifacts.write_all(opt.output_dir)}};
  write_text_file(opt.output_dir / "manifest.json", manifest.dump(2) + "\n");
  ctx.log("wrote " + (opt.output_dir / "manifest.json").string());
}

template <typename T>
T field_or(const Json& j, std::string_view path, const char* key, T fallback) {
  read_field(j, path, key, fallback);
  return fallback;
}

const Json* optional_section(const Json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

KarrasParams karras_or_default(const Json& j) {
  const Json* k = optional_section(j, "karras");
  return k ? parse_karras(*k) : KarrasParams{};
}

ScheduleConfig schedule_section(const Json& j, std::string_view path) {
  const Json empty = Json::object();
  const Json* s = optional_section(j, "schedule");
  try {
    return parse_schedule(s ? *s : empty, optional_section(j, "high_noise"));
  } catch (const ConfigError& e) {
    if (path.empty()) throw;
    throw ConfigError(std::string(path) + ": " + e.what());
  }
}

void check_n_k(std::int64_t n_k, const KarrasParams& karras, std::string_view field) {
  if (n_k < 2 || n_k > karras.s1) {
    throw ConfigError("field " + std::string(field) + " must lie in [2, karras.s1 = " + std::to_string(karras.s1) +
                      "], got " + std::to_string(n_k));
  }
}

bool valid_id(const std::string& id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

// ---------------------------------------------------------------- schedule

void run_schedule(Context& ctx) {
  const Json& j = ctx.config;
  reject_unknown(j, "", {"karras", "schedule", "high_noise", "n_k", "batches", "buckets", "seed"});
  const KarrasParams karras = karras_or_default(j);
  const ScheduleConfig schedule = schedule_section(j, "");
  const auto n_k = field_or<std::int64_t>(j, "", "n_k", karras.s1);
  const auto batches = field_or<std::int64_t>(j, "", "batches", 1);
  const BucketSpec buckets = parse_buckets(j.contains("buckets") ? j["buckets"] : Json());
  check_n_k(n_k, karras, "n_k");
  if (batches < 1) throw ConfigError("field batches must be >= 1");

  const NoiseArray array(karras);
  const auto levels = subsample_levels(array, n_k);
  std::string sigmas_csv = schedule_csv_header();
  std::vector<double> drawn;
  for (std::int64_t b = 0; b < batches; ++b) {
    const auto batch = schedule_batch(levels, schedule, derive_seed(ctx.seed, {static_cast<std::uint64_t>(b)}));
    append_schedule_csv(sigmas_csv, b, b, batch);
    drawn.insert(drawn.end(), batch.sigma_lo.begin(), batch.sigma_lo.end());
  }
  const auto report = bucket_ratios(drawn, buckets);
  std::string distribution = distribution_csv_header();
  const std::string id = to_string(schedule.kind);
  append_distribution_csv(distribution, id, report, buckets);

  ctx.artifacts.add("sigmas.csv", std::move(sigmas_csv));
  ctx.artifacts.add("distribution.csv", std::move(distribution));
  ctx.artifacts.add("pie.svg", pie_svg(report, buckets, id + " schedule, n_k = " + std::to_string(n_k)));
  ctx.log("scheduled " + std::to_string(batches) + " batch(es), " + std::to_string(report.distinct_sigma_count) +
          " distinct sigma_lo values");
  finish(ctx, Json{{"karras", to_json(karras)},
                   {"schedule", schedule_to_json(schedule)},
                   {"high_noise", high_noise_to_json(schedule.high_noise)},
                   {"n_k", n_k},
                   {"batches", batches},
                   {"buckets", buckets.edges}});
}

// -------------------------------------------------------------- curriculum

void run_curriculum(Context& ctx) {
  const Json& j = ctx.config;
  reject_unknown(j, "", {"curriculum", "karras", "seed"});
  const Json* section = optional_section(j, "curriculum");
  const CurriculumConfig curriculum = section ? parse_curriculum(*section) : CurriculumConfig{};
  const KarrasParams karras = karras_or_default(j);
  curriculum.validate();
  if (optional_section(j, "karras")) curriculum.validate(NoiseArray(karras));

  const auto tr = trace(curriculum);
  ctx.artifacts.add("trace.csv", curriculum_csv(tr));
  ctx.artifacts.add("curriculum.svg", curriculum_svg(tr, to_string(curriculum.kind) + " curriculum, s0 = " +
                                                             std::to_string(curriculum.s0) + ", s1 = " +
                                                             std::to_string(curriculum.s1_cap)));
  ctx.log("traced " + std::to_string(tr.n_of_k.size()) + " steps, peak N = " + std::to_string(tr.max_n()) +
          " at k = " + std::to_string(tr.peak_step));
  Json resolved{{"curriculum", to_json(curriculum)}};
  if (optional_section(j, "karras")) resolved["karras"] = to_json(karras);
  finish(ctx, resolved);
}

// ----------------------------------------------------------------- analyze

void run_analyze(Context& ctx) {
  const Json& j = ctx.config;
  reject_unknown(j, "", {"karras", "samples_per_config", "buckets", "configs", "audit", "seed"});
  const KarrasParams karras = karras_or_default(j);
  const auto samples = field_or<std::int64_t>(j, "", "samples_per_config", 100000);
  if (samples < 1) throw ConfigError("field samples_per_config must be >= 1");
  const BucketSpec buckets = parse_buckets(j.contains("buckets") ? j["buckets"] : Json());

  const Json* configs = optional_section(j, "configs");
  if (!configs || !configs->is_array() || configs->size() < 2) {
    throw ConfigError("field configs must be an array of at least two schedule configs");
  }
  std::vector<NamedSchedule> named;
  std::set<std::string> ids;
  Json resolved_configs = Json::array();
  for (std::size_t i = 0; i < configs->size(); ++i) {
    const std::string path = "configs[" + std::to_string(i) + "]";
    const Json& c = (*configs)[i];
    require_object(c, path);
    reject_unknown(c, path, {"id", "n_k", "schedule", "high_noise"});
    NamedSchedule ns;
    ns.id = field_or<std::string>(c, path, "id", "");
    if (!valid_id(ns.id)) throw ConfigError("field " + path + ".id must be a non-empty [A-Za-z0-9_.-] name");
    if (!ids.insert(ns.id).second) throw ConfigError("duplicate config id '" + ns.id + "'");
    ns.n_k = field_or<std::int64_t>(c, path, "n_k", karras.s1);
    check_n_k(ns.n_k, karras, path + ".n_k");
    ns.schedule = schedule_section(c, path);
    resolved_configs.push_back(Json{{"id", ns.id},
                                    {"n_k", ns.n_k},
                                    {"schedule", schedule_to_json(ns.schedule)},
                                    {"high_noise", high_noise_to_json(ns.schedule.high_noise)}});
    named.push_back(std::move(ns));
  }

  struct AuditPlan {
    CurriculumConfig curriculum;
    ScheduleConfig schedule;
    bool regenerate = false;
  };
  std::optional<AuditPlan> audit;
  if (const Json* a = optional_section(j, "audit")) {
    require_object(*a, "audit");
    reject_unknown(*a, "audit", {"curriculum", "schedule", "high_noise", "regenerate"});
    AuditPlan plan;
    const Json* c = optional_section(*a, "curriculum");
    plan.curriculum = c ? parse_curriculum(*c, "audit.curriculum") : CurriculumConfig{};
    plan.schedule = schedule_section(*a, "audit");
    read_field(*a, "audit", "regenerate", plan.regenerate);
    audit = plan;
  }

  const NoiseArray array(karras);
  if (audit) audit->curriculum.validate(array);

  const auto comparison = compare_schedules(named, array, samples, ctx.seed, buckets);
  std::string csv = distribution_csv_header();
  std::string summary = "config_id,total_samples,distinct_sigma_count,mean_sigma,median_sigma,below_min_share\n";
  for (std::size_t i = 0; i < comparison.ids.size(); ++i) {
    const auto& r = comparison.reports[i];
    append_distribution_csv(csv, comparison.ids[i], r, buckets);
    summary += comparison.ids[i] + ',' + std::to_string(r.total_samples) + ',' +
               std::to_string(r.distinct_sigma_count) + ',' + format_double(r.mean_sigma) + ',' +
               format_double(r.median_sigma) + ',' + format_double(r.below_min_share) + '\n';
  }
  ctx.artifacts.add("comparison.csv", std::move(csv));
  ctx.artifacts.add("summary.csv", std::move(summary));
  for (std::size_t i = 0; i < comparison.ids.size(); ++i) {
    ctx.artifacts.add("pie_" + comparison.ids[i] + ".svg",
                      pie_svg(comparison.reports[i], buckets, comparison.ids[i]));
  }

  Json resolved{{"karras", to_json(karras)},
                {"samples_per_config", samples},
                {"buckets", buckets.edges},
                {"configs", resolved_configs}};
  if (audit) {
    std::string rows = "mode,distinct_count,foreign_count,bound\n";
    const std::string bound = std::to_string(karras.s1 + 1);
    const auto predefined = simulate_run_audit(audit->curriculum, audit->schedule, array, ctx.seed, false);
    require_closure(predefined);
    rows += "predefined," + std::to_string(predefined.distinct_count) + ",0," + bound + '\n';
    ctx.log("audit: " + std::to_string(predefined.distinct_count) + " distinct sigmas over the trace");
    if (audit->regenerate) {
      const auto regen = simulate_run_audit(audit->curriculum, audit->schedule, array, ctx.seed, true);
      rows += "regenerated," + std::to_string(regen.distinct_count) + ',' + std::to_string(regen.foreign.size()) +
              ',' + bound + '\n';
      ctx.log("audit: regeneration baseline uses " + std::to_string(regen.distinct_count) + " distinct sigmas");
    }
    ctx.artifacts.add("audit.csv", std::move(rows));
    resolved["audit"] = Json{{"curriculum", to_json(audit->curriculum)},
                             {"schedule", schedule_to_json(audit->schedule)},
                             {"high_noise", high_noise_to_json(audit->schedule.high_noise)},
                             {"regenerate", audit->regenerate}};
  }
  ctx.log("compared " + std::to_string(named.size()) + " schedules at " + std::to_string(samples) +
          " samples each");
  finish(ctx, resolved);
}

// ------------------------------------------------------------------- train

double window_mean(const std::vector<double>& v, std::size_t window, bool tail) {
  const std::size_t w = std::min(window, v.size());
  if (w == 0) return 0.0;
  const auto first = tail ? v.end() - static_cast<std::ptrdiff_t>(w) : v.begin();
  return std::accumulate(first, first + static_cast<std::ptrdiff_t>(w), 0.0) / static_cast<double>(w);
}

void run_train(Context& ctx) {
  Json j = ctx.config;
  j["seed"] = ctx.seed;
  const TrainConfig cfg = parse_train_config(j);
  const Json resolved = to_json(cfg);
  ctx.log("training " + std::to_string(cfg.total_steps) + " steps (" + to_string(cfg.schedule.kind) + " + " +
          to_string(cfg.curriculum.kind) + ", seed " + std::to_string(cfg.seed) + ")");

  const TrainResult result = train(cfg);
  const auto& m = result.metrics;
  const NoiseArray array(cfg.karras);

  ctx.artifacts.add("metrics.csv", metrics_csv(m));
  ctx.artifacts.add("samples.csv", points_csv(evaluation_samples(result.model, array, cfg.eval, cfg.seed)));
  Json summary{{"steps", cfg.total_steps},
               {"final_swd", m.final_swd},
               {"untrained_swd", m.untrained_swd},
               {"distinct_sigmas", m.distinct_sigmas},
               {"first_window_loss", window_mean(m.loss, 1000, false)},
               {"last_window_loss", window_mean(m.loss, 1000, true)}};
  ctx.artifacts.add("summary.json", summary.dump(2) + "\n");

  // The checkpoint goes through a scratch file so its bytes can be hashed.
  const fs::path scratch = ctx.options.output_dir / ".model.ckpt.tmp";
  save_checkpoint(scratch, result.model,
                  Json{{"config_sha256", sha256_hex(resolved.dump())},
                       {"karras", to_json(cfg.karras)},
                       {"dataset", to_string(cfg.dataset)}});
  std::string ckpt = read_text_file(scratch);
  fs::remove(scratch);
  ctx.artifacts.add("model.ckpt", std::move(ckpt));

  ctx.log("final SWD " + format_double(m.final_swd) + " (untrained " + format_double(m.untrained_swd) + ")");
  finish(ctx, resolved);
}

// ------------------------------------------------------------------ sample

void run_sample(Context& ctx) {
  const Json& j = ctx.config;
  reject_unknown(j, "", {"checkpoint", "samples", "steps", "karras", "seed"});
  const auto checkpoint_path = field_or<std::string>(j, "", "checkpoint", "");
  if (checkpoint_path.empty()) throw ConfigError("field checkpoint is required");
  const auto n = field_or<std::int64_t>(j, "", "samples", 2000);
  const auto steps = field_or<int>(j, "", "steps", 1);
  if (n < 0) throw ConfigError("field samples must be >= 0");
  if (steps < 1 || steps > 4) throw ConfigError("field steps must lie in [1, 4]");

  ctx.read_input(checkpoint_path);
  Checkpoint ckpt;
  try {
    ckpt = load_checkpoint(checkpoint_path);
  } catch (const RuntimeFailure& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  KarrasParams karras;
  if (const Json* k = optional_section(j, "karras")) {
    karras = parse_karras(*k);
  } else if (ckpt.header.contains("karras")) {
    karras = parse_karras(ckpt.header["karras"], "checkpoint.karras");
  }
  if (ckpt.model.shape().data_dim != 2) throw ConfigError("samples.csv holds 2D points; checkpoint is not 2D");

  const NoiseArray array(karras);
  ctx.artifacts.add("samples.csv", points_csv(sample(ckpt.model, n, steps, array, ctx.seed)));
  ctx.log("drew " + std::to_string(n) + " samples with " + std::to_string(steps) + " step(s)");
  finish(ctx, Json{{"checkpoint", checkpoint_path}, {"samples", n}, {"steps", steps}, {"karras", to_json(karras)}});
}

// -------------------------------------------------------------------- eval

void run_eval(Context& ctx) {
  const Json& j = ctx.config;
  reject_unknown(j, "", {"runs", "dataset", "reference_samples", "projections", "window", "seed"});
  std::vector<std::string> runs;
  if (const Json* r = optional_section(j, "runs")) {
    if (!r->is_array()) throw ConfigError("field runs must be an array of paths");
    for (const auto& p : *r) {
      if (!p.is_string()) throw ConfigError("field runs must be an array of paths");
      runs.push_back(p.get<std::string>());
    }
  }
  for (const auto& p : ctx.options.compare) runs.push_back(p.generic_string());
  if (runs.empty()) throw ConfigError("eval needs at least one run (--compare PATH or field runs)");
  const Dataset dataset = dataset_from_string(field_or<std::string>(j, "", "dataset", "gaussian_mixture_8"));
  const auto reference_n = field_or<std::int64_t>(j, "", "reference_samples", 2000);
  const auto projections = field_or<int>(j, "", "projections", 128);
  const auto window = field_or<std::int64_t>(j, "", "window", 1000);
  if (reference_n < 1) throw ConfigError("field reference_samples must be >= 1");
  if (projections < 1) throw ConfigError("field projections must be >= 1");
  if (window < 1) throw ConfigError("field window must be >= 1");

  struct RunFiles {
    fs::path metrics;
    fs::path samples;
  };
  std::vector<RunFiles> files;
  for (const auto& run : runs) {
    const fs::path p(run);
    RunFiles f;
    f.metrics = fs::is_directory(p) ? p / "metrics.csv" : p;
    f.samples = f.metrics.parent_path() / "samples.csv";
    if (!fs::is_regular_file(f.metrics)) throw ConfigError("no metrics CSV at " + f.metrics.string());
    files.push_back(f);
  }

  const PointSet reference = sample_dataset(dataset, reference_n, derive_seed(ctx.seed, {1}));
  std::string csv = "run,steps,first_window_loss,last_window_loss,final_n_k,swd\n";
  for (std::size_t i = 0; i < files.size(); ++i) {
    ctx.read_input(files[i].metrics);
    const auto table = read_metrics_csv(files[i].metrics);
    std::string swd;
    if (fs::is_regular_file(files[i].samples)) {
      ctx.read_input(files[i].samples);
      const PointSet points = read_points_csv(files[i].samples);
      if (points.cols() > 0) {
        swd = format_double(evaluate_swd(points, reference, projections, derive_seed(ctx.seed, {2})));
      }
    }
    const auto w = static_cast<std::size_t>(window);
    csv += runs[i] + ',' + std::to_string(table.loss.size()) + ',' + format_double(window_mean(table.loss, w, false)) +
           ',' + format_double(window_mean(table.loss, w, true)) + ',' +
           (table.n_k.empty() ? std::string() : std::to_string(table.n_k.back())) + ',' + swd + '\n';
    ctx.log(runs[i] + ": " + std::to_string(table.loss.size()) + " steps" + (swd.empty() ? "" : ", SWD " + swd));
  }
  ctx.artifacts.add("eval.csv", std::move(csv));
  finish(ctx, Json{{"runs", runs},
                   {"dataset", to_string(dataset)},
                   {"reference_samples", reference_n},
                   {"projections", projections},
                   {"window", window}});
}

}  // namespace

std::string to_string(Subcommand cmd) {
  switch (cmd) {
    case Subcommand::schedule:
      return "schedule";
    case Subcommand::curriculum:
      return "curriculum";
    case Subcommand::analyze:
      return "analyze";
    case Subcommand::train:
      return "train";
    case Subcommand::sample:
      return "sample";
    case Subcommand::eval:
      return "eval";
  }
  return "schedule";
}

Subcommand subcommand_from_string(const std::string& name) {
  for (auto cmd : {Subcommand::schedule, Subcommand::curriculum, Subcommand::analyze, Subcommand::train,
                   Subcommand::sample, Subcommand::eval}) {
    if (to_string(cmd) == name) return cmd;
  }
  throw ConfigError("unknown subcommand '" + name + "'");
}

void run_command(const CommandOptions& options) {
  if (!options.compare.empty() && options.subcommand != Subcommand::eval) {
    throw ConfigError("--compare is only valid for eval");
  }
  Context ctx{options, {}, 0, Json::object(), {}};
  load(ctx);
  switch (options.subcommand) {
    case Subcommand::schedule:
      return run_schedule(ctx);
    case Subcommand::curriculum:
      return run_curriculum(ctx);
    case Subcommand::analyze:
      return run_analyze(ctx);
    case Subcommand::train:
      return run_train(ctx);
    case Subcommand::sample:
      return run_sample(ctx);
    case Subcommand::eval:
      return run_eval(ctx);
  }
}

}  // namespace cmsched
