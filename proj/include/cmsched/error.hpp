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

#include <stdexcept>
#include <string>

namespace cmsched {

// Invalid parameters or configuration. Maps to exit code 1 at the CLI.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A schedule cannot be formed from otherwise valid inputs (e.g. no
// (sigma_lo, sigma_hi) pair exists, or a pair has zero gap).
class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of a function, e.g. a step index past K.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Failures discovered while running: non-finite loss, closure audit
// violations, unreadable files. Maps to exit code 2 at the CLI.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cmsched
