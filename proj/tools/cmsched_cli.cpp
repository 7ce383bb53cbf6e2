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

// cmsched: schedule emission, curriculum tracing, distribution analysis and
// toy consistency training from JSON configs.
//
// Exit codes: 0 success, 1 invalid usage or config, 2 failure during the run.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "cmsched.h"

namespace {

struct Args {
  std::string config;
  std::string output = "out";
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
  std::vector<std::string> compare;
};

void print_line(const char* line, void* /*user*/) { std::cout << line << '\n'; }

CLI::App* add_subcommand(CLI::App& app, const std::string& name, const std::string& about, Args& args,
                         bool with_compare) {
  CLI::App* sub = app.add_subcommand(name, about);
  sub->add_option("--config", args.config, "JSON config, or the manifest.json of an earlier run")->required();
  sub->add_option("--output", args.output, "output directory")->capture_default_str();
  sub->add_option("--seed", args.seed, "random seed (default: manifest or config seed, else 0)");
  sub->add_option("--set", args.overrides, "KEY=VALUE override applied to the config, repeatable")
      ->allow_extra_args(false);
  if (with_compare) {
    sub->add_option("--compare", args.compare, "run directory or metrics CSV to compare, repeatable")
        ->allow_extra_args(false);
  }
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-schedule and curriculum tools for consistency training", "cmsched"};
  app.set_version_flag("--version", std::string(cms_version()));
  app.require_subcommand(1);

  Args args;
  add_subcommand(app, "schedule", "emit per-batch sigmas and their distribution", args, false);
  add_subcommand(app, "curriculum", "trace the discretization curriculum N(k)", args, false);
  add_subcommand(app, "analyze", "compare noise distributions of several schedules", args, false);
  add_subcommand(app, "train", "train the toy consistency model", args, false);
  add_subcommand(app, "sample", "draw samples from a trained checkpoint", args, false);
  add_subcommand(app, "eval", "compare training runs", args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  const CLI::App* sub = app.get_subcommands().front();
  std::vector<const char*> overrides;
  for (const auto& o : args.overrides) overrides.push_back(o.c_str());
  std::vector<const char*> compare;
  for (const auto& c : args.compare) compare.push_back(c.c_str());
  const std::string name = sub->get_name();

  cms_command_options options{};
  options.subcommand = name.c_str();
  options.config_path = args.config.c_str();
  options.output_dir = args.output.c_str();
  options.has_seed = sub->count("--seed") > 0 ? 1 : 0;
  options.seed = args.seed;
  options.overrides = overrides.data();
  options.override_count = overrides.size();
  options.compare_paths = compare.data();
  options.compare_count = compare.size();
  options.log = print_line;

  const cms_status status = cms_run_command(&options);
  if (status == CMS_OK) return 0;
  std::cerr << "cmsched " << name << ": " << cms_last_error() << '\n';
  return status == CMS_ERR_CONFIG || status == CMS_ERR_ARGUMENT ? 1 : 2;
}
