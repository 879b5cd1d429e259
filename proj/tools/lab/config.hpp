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

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lab/report.hpp"
#include "parind/hvaudit.hpp"
#include "parind/rational.hpp"

namespace parind::lab {

/// Rejected configuration; maps to exit status 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Squared Schmidt coefficients as given on the command line.
struct Coefficients {
    std::vector<std::string> text;
    std::vector<double> values;
    /// Set when every entry is an exact fraction.
    std::optional<std::vector<Rational>> exact;

    std::string joined() const;
};

/// Entries are fractions p/q, decimals, products/quotients with `pi` (e.g. 1/pi), or one `rest` = 1 - others.
Coefficients parse_coefficients(const std::vector<std::string> &entries);
Coefficients parse_coefficients(const std::string &joined, char separator);

std::vector<std::string> split_list(const std::string &text, char separator = ',');

struct ExperimentConfig {
    std::string command;
    std::string state = "bell";
    std::vector<int> N;
    std::optional<int> N_max;
    std::vector<std::uint64_t> n;
    std::vector<std::uint64_t> l;
    std::vector<std::uint64_t> r;
    std::optional<std::vector<size_t>> J;
    std::optional<std::pair<std::uint64_t, std::uint64_t>> pair;
    std::optional<Coefficients> coeffs;
    /// Fixture name, path to a model file, or an inline model object.
    std::optional<Json> model;
    std::uint64_t seed = 0;
    std::optional<double> tol;
    std::string format;
    std::optional<std::string> out;
    std::optional<unsigned> workers;
    std::optional<size_t> samples;
    std::optional<std::string> input;
    bool lenient = false;

    /// Worker count after the environment override; at least 1.
    unsigned resolved_workers() const;
};

/// Keys accepted in a config file.
const std::vector<std::string> &config_keys();

/// Applies the fields of a config object onto `cfg`; unknown keys are rejected.
void apply_config_json(const Json &j, ExperimentConfig &cfg);
ExperimentConfig load_config_file(const std::string &path);

/// Model fixture from a name, a file path, or a declarative object.
std::unique_ptr<hv::HVModel> load_model(const Json &spec);

}  // namespace parind::lab
