// Copyright 2026 The parind-lab Authors
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

#pragma once

#include <string>
#include <vector>

#include "lab/config.hpp"
#include "lab/report.hpp"

namespace parind::lab {

inline constexpr int kExitPass = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitVerdict = 3;

/// Report-producing subcommands, in help order.
const std::vector<std::string> &command_names();

/// Schemas of every report this driver writes.
const SchemaRegistry &schemas();

struct RunOutcome {
    std::string report;
    std::string format;
    size_t rows = 0;
    size_t failed = 0;

    bool passed() const { return failed == 0; }
};

/// Runs one report-producing command. Throws ConfigError before any computation when the config is invalid.
RunOutcome run_command(const ExperimentConfig &cfg);

/// Default verdict tolerance of a command.
double default_tolerance(const std::string &command);

}  // namespace parind::lab
