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

#include "lab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "parind/hvmodels.hpp"

namespace parind::lab {

namespace {

std::string trim(const std::string &s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

double parse_factor(const std::string &text, const std::string &entry) {
    auto t = trim(text);
    if (t == "pi") {
        return std::numbers::pi;
    }
    double v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ConfigError("cannot read coefficient '" + entry + "'");
    }
    return v;
}

/// a/b/c... or a*b with numeric or pi factors.
double parse_real_expression(const std::string &entry) {
    double value = 1;
    size_t pos = 0;
    char op = '*';
    while (true) {
        auto next = entry.find_first_of("*/", pos);
        double f = parse_factor(entry.substr(pos, next == std::string::npos ? std::string::npos : next - pos), entry);
        if (op == '*') {
            value *= f;
        } else {
            if (f == 0) {
                throw ConfigError("division by zero in coefficient '" + entry + "'");
            }
            value /= f;
        }
        if (next == std::string::npos) {
            break;
        }
        op = entry[next];
        pos = next + 1;
    }
    return value;
}

template <class T>
T parse_unsigned(const std::string &text, const std::string &what) {
    auto t = trim(text);
    T v{};
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ConfigError(what + ": '" + text + "' is not a non-negative integer");
    }
    return v;
}

/// Integral JSON number that is not negative, whatever signedness the parser gave it.
bool is_count(const Json &v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::vector<std::string> json_list(const Json &v, const std::string &key) {
    std::vector<std::string> out;
    if (v.is_string()) {
        return split_list(v.get<std::string>());
    }
    if (v.is_number()) {
        return {v.dump()};
    }
    if (!v.is_array()) {
        throw ConfigError("config key '" + key + "' must be a list or a comma-separated string");
    }
    for (const auto &e : v) {
        if (e.is_string()) {
            out.push_back(e.get<std::string>());
        } else if (e.is_number()) {
            out.push_back(e.dump());
        } else {
            throw ConfigError("config key '" + key + "' holds a non-scalar entry");
        }
    }
    return out;
}

template <class T>
std::vector<T> unsigned_list(const std::vector<std::string> &items, const std::string &what, T minimum) {
    std::vector<T> out;
    for (const auto &s : items) {
        T v = parse_unsigned<T>(s, what);
        if (v < minimum) {
            throw ConfigError(what + " entries must be >= " + std::to_string(minimum));
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw ConfigError(what + " list is empty");
    }
    return out;
}

}  // namespace

std::vector<std::string> split_list(const std::string &text, char separator) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, separator)) {
        cur = trim(cur);
        if (!cur.empty()) {
            out.push_back(cur);
        }
    }
    return out;
}

std::string Coefficients::joined() const {
    std::string out;
    for (size_t i = 0; i < text.size(); i++) {
        out += (i ? ";" : "") + text[i];
    }
    return out;
}

Coefficients parse_coefficients(const std::vector<std::string> &entries) {
    if (entries.size() < 2) {
        throw ConfigError("need at least two squared coefficients");
    }
    Coefficients c;
    std::optional<size_t> rest;
    std::vector<Rational> exact;
    bool all_exact = true;
    for (size_t i = 0; i < entries.size(); i++) {
        auto e = trim(entries[i]);
        c.text.push_back(e);
        if (e == "rest") {
            if (rest) {
                throw ConfigError("at most one coefficient may be 'rest'");
            }
            rest = i;
            c.values.push_back(0);
            exact.emplace_back(0);
            continue;
        }
        try {
            exact.push_back(parse_rational(e));
            c.values.push_back(to_double(exact.back()));
        } catch (const PreconditionError &) {
            all_exact = false;
            c.values.push_back(parse_real_expression(e));
            exact.emplace_back(0);
        }
    }
    if (rest) {
        double others = 0;
        Rational exact_others = 0;
        for (size_t i = 0; i < entries.size(); i++) {
            if (i != *rest) {
                others += c.values[i];
                exact_others += exact[i];
            }
        }
        c.values[*rest] = 1.0 - others;
        exact[*rest] = 1 - exact_others;
        if (all_exact) {
            c.values[*rest] = to_double(exact[*rest]);
        }
    }
    double sum = 0;
    for (double v : c.values) {
        if (!(v > 0)) {
            throw ConfigError("squared coefficients must be positive, got " + c.joined());
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw ConfigError("squared coefficients sum to " + format_double(sum) + ", not 1");
    }
    if (all_exact) {
        Rational total = 0;
        for (const auto &q : exact) {
            total += q;
        }
        if (total != 1) {
            throw ConfigError("exact squared coefficients sum to " + to_string(total) + ", not 1");
        }
        c.exact = exact;
    }
    return c;
}

Coefficients parse_coefficients(const std::string &joined, char separator) {
    return parse_coefficients(split_list(joined, separator));
}

unsigned ExperimentConfig::resolved_workers() const {
    if (const char *env = std::getenv("PARIND_LAB_WORKERS"); env && *env) {
        auto w = parse_unsigned<unsigned>(env, "PARIND_LAB_WORKERS");
        if (w == 0) {
            throw ConfigError("PARIND_LAB_WORKERS must be positive");
        }
        return w;
    }
    if (workers) {
        return *workers;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

const std::vector<std::string> &config_keys() {
    static const std::vector<std::string> keys{"command", "state", "N",      "N-max", "n",       "l",
                                               "r",       "J",     "pair",   "coeffs", "model",  "seed",
                                               "tol",     "format", "out",   "workers", "samples", "input",
                                               "lenient"};
    return keys;
}

void apply_config_json(const Json &j, ExperimentConfig &cfg) {
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    const auto &keys = config_keys();
    for (const auto &[k, v] : j.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
            throw ConfigError("unknown config key '" + k + "'");
        }
    }
    auto str = [&](const char *key) {
        const auto &v = j.at(key);
        if (!v.is_string()) {
            throw ConfigError(std::string("config key '") + key + "' must be a string");
        }
        return v.get<std::string>();
    };
    if (j.contains("command")) {
        auto c = str("command");
        if (!cfg.command.empty() && c != cfg.command) {
            throw ConfigError("config is for '" + c + "' but the command is '" + cfg.command + "'");
        }
        cfg.command = c;
    }
    if (j.contains("state")) {
        cfg.state = str("state");
    }
    if (j.contains("N")) {
        auto v = unsigned_list<unsigned>(json_list(j["N"], "N"), "N", 1);
        cfg.N.assign(v.begin(), v.end());
    }
    if (j.contains("N-max")) {
        cfg.N_max = static_cast<int>(unsigned_list<unsigned>(json_list(j["N-max"], "N-max"), "N-max", 1).front());
    }
    if (j.contains("n")) {
        cfg.n = unsigned_list<std::uint64_t>(json_list(j["n"], "n"), "n", 1);
    }
    if (j.contains("l")) {
        cfg.l = unsigned_list<std::uint64_t>(json_list(j["l"], "l"), "l", 1);
    }
    if (j.contains("r")) {
        cfg.r = unsigned_list<std::uint64_t>(json_list(j["r"], "r"), "r", 2);
    }
    if (j.contains("J")) {
        auto items = json_list(j["J"], "J");
        std::vector<size_t> js;
        for (const auto &s : items) {
            js.push_back(parse_unsigned<size_t>(s, "J"));
        }
        cfg.J = js;
    }
    if (j.contains("pair")) {
        auto p = unsigned_list<std::uint64_t>(json_list(j["pair"], "pair"), "pair", 0);
        if (p.size() != 2) {
            throw ConfigError("pair needs exactly two indices");
        }
        cfg.pair = std::make_pair(p[0], p[1]);
    }
    if (j.contains("coeffs")) {
        cfg.coeffs = parse_coefficients(json_list(j["coeffs"], "coeffs"));
    }
    if (j.contains("model")) {
        if (!j["model"].is_string() && !j["model"].is_object()) {
            throw ConfigError("model must be a fixture name, a path, or an object");
        }
        cfg.model = j["model"];
    }
    if (j.contains("seed")) {
        if (!is_count(j["seed"])) {
            throw ConfigError("seed must be an unsigned integer");
        }
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("tol")) {
        if (!j["tol"].is_number() || !(j["tol"].get<double>() > 0)) {
            throw ConfigError("tol must be a positive number");
        }
        cfg.tol = j["tol"].get<double>();
    }
    if (j.contains("format")) {
        cfg.format = str("format");
    }
    if (j.contains("out")) {
        cfg.out = str("out");
    }
    if (j.contains("workers")) {
        if (!is_count(j["workers"]) || j["workers"].get<unsigned>() == 0) {
            throw ConfigError("workers must be a positive integer");
        }
        cfg.workers = j["workers"].get<unsigned>();
    }
    if (j.contains("samples")) {
        if (!is_count(j["samples"]) || j["samples"].get<size_t>() == 0) {
            throw ConfigError("samples must be a positive integer");
        }
        cfg.samples = j["samples"].get<size_t>();
    }
    if (j.contains("input")) {
        cfg.input = str("input");
    }
    if (j.contains("lenient")) {
        if (!j["lenient"].is_boolean()) {
            throw ConfigError("lenient must be true or false");
        }
        cfg.lenient = j["lenient"].get<bool>();
    }
}

ExperimentConfig load_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    Json j;
    try {
        j = Json::parse(in);
    } catch (const std::exception &e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    ExperimentConfig cfg;
    apply_config_json(j, cfg);
    return cfg;
}

namespace {

std::unique_ptr<hv::HVModel> model_from_object(const Json &o) {
    if (!o.contains("fixture") || !o["fixture"].is_string()) {
        throw ConfigError("model object needs a 'fixture' name");
    }
    const auto name = o["fixture"].get<std::string>();
    auto allowed = [&](std::vector<std::string> keys) {
        keys.push_back("fixture");
        for (const auto &[k, v] : o.items()) {
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
                throw ConfigError("model '" + name + "' does not take parameter '" + k + "'");
            }
        }
    };
    auto count = [&](const char *key, size_t fallback) {
        if (!o.contains(key)) {
            return fallback;
        }
        if (!is_count(o[key])) {
            throw ConfigError(std::string("model parameter '") + key + "' must be a positive integer");
        }
        return o[key].get<size_t>();
    };
    try {
        if (name == "trivial") {
            allowed({"points"});
            return std::make_unique<hv::TrivialModel>(count("points", 1));
        }
        if (name == "deterministic-chain") {
            allowed({});
            return std::make_unique<hv::DeterministicChainModel>();
        }
        if (name == "local-cosine") {
            allowed({"points"});
            return std::make_unique<hv::LocalCosineResponseModel>(count("points", 32));
        }
        if (name == "signalling-toy") {
            allowed({"delta"});
            double delta = 0.1;
            if (o.contains("delta")) {
                if (!o["delta"].is_number()) {
                    throw ConfigError("model parameter 'delta' must be a number");
                }
                delta = o["delta"].get<double>();
            }
            return std::make_unique<hv::SignallingToyModel>(delta);
        }
    } catch (const ModelError &e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown model fixture '" + name + "'");
}

}  // namespace

std::unique_ptr<hv::HVModel> load_model(const Json &spec) {
    if (spec.is_object()) {
        return model_from_object(spec);
    }
    if (!spec.is_string()) {
        throw ConfigError("model must be a fixture name, a path, or an object");
    }
    const auto text = spec.get<std::string>();
    const auto names = hv::fixture_names();
    if (std::find(names.begin(), names.end(), text) != names.end()) {
        return hv::make_fixture(text);
    }
    if (!std::filesystem::exists(text)) {
        throw ConfigError("'" + text + "' is neither a model fixture nor a model file");
    }
    std::ifstream in(text);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const std::exception &e) {
        throw ConfigError("model file " + text + " is not valid JSON: " + e.what());
    }
    return model_from_object(j);
}

}  // namespace parind::lab
