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

#pragma once

// The subcommands behind the command-line tool. Each reads one JSON config,
// writes its artifacts under the output directory and finishes with a
// manifest.json holding the resolved config, the seed and SHA-256 hashes of
// every artifact. Passing a manifest back as the config reruns the command.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cmsched {

enum class Subcommand { schedule, curriculum, analyze, train, sample, eval };

std::string to_string(Subcommand cmd);
Subcommand subcommand_from_string(const std::string& name);

struct CommandOptions {
  Subcommand subcommand = Subcommand::schedule;
  std::filesystem::path config_path;
  std::filesystem::path output_dir = "out";
  // Unset means: the manifest's or config's seed when present, else 0.
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;           // "a.b=value"
  std::vector<std::filesystem::path> compare;   // eval only
  std::function<void(const std::string&)> log;  // progress lines, may be empty
};

// Throws ConfigError (and DomainError) for invalid input before any artifact
// is written; RuntimeFailure and ScheduleError for failures during the run.
void run_command(const CommandOptions& options);

}  // namespace cmsched
