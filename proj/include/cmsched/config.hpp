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

// JSON <-> config structs. Each section mirrors its struct field for field;
// missing fields keep their defaults, unknown fields are rejected by name.

#include <initializer_list>
#include <json.hpp>
#include <string>
#include <string_view>
#include <type_traits>

#include "cmsched/analysis.hpp"
#include "cmsched/curriculum.hpp"
#include "cmsched/error.hpp"
#include "cmsched/karras.hpp"
#include "cmsched/schedule.hpp"
#include "cmsched/toy_ct.hpp"

namespace cmsched {

using Json = nlohmann::ordered_json;

// "a.b" style path of a field, used in error messages.
std::string join_path(std::string_view path, std::string_view key);

void require_object(const Json& j, std::string_view path);

// Throws ConfigError naming the first key of `j` not in `allowed`.
void reject_unknown(const Json& j, std::string_view path, std::initializer_list<std::string_view> allowed);

// Reads j[key] into `out` when present and not null; type mismatches throw a
// ConfigError naming the field. Integers must be JSON integers.
template <typename T>
void read_field(const Json& j, std::string_view path, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError("");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError("");
    }
    out = it->template get<T>();
  } catch (const std::exception&) {
    throw ConfigError("field " + join_path(path, key) + " has the wrong type (" + it->dump() + ")");
  }
}

KarrasParams parse_karras(const Json& j, std::string_view path = "karras");
ScheduleConfig parse_schedule(const Json& schedule, const Json* high_noise);
CurriculumConfig parse_curriculum(const Json& j, std::string_view path = "curriculum");
BucketSpec parse_buckets(const Json& j);
TrainConfig parse_train_config(const Json& j);

Json to_json(const KarrasParams& p);
Json schedule_to_json(const ScheduleConfig& s);
Json high_noise_to_json(const HighNoiseParams& h);
Json to_json(const CurriculumConfig& c);
Json to_json(const TrainConfig& c);

// Applies "a.b.c=value" onto `doc`, creating intermediate objects. The value
// is parsed as JSON when possible and taken as a string otherwise.
void apply_override(Json& doc, std::string_view assignment);

// Parses JSON text, rethrowing syntax errors as ConfigError.
Json parse_json_text(std::string_view text, std::string_view what);

}  // namespace cmsched
