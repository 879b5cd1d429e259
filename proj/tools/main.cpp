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

// parind_lab: sweep and audit driver.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lab/commands.hpp"
#include "lab/config.hpp"

using namespace parind::lab;

namespace {

struct Flags {
    std::string config;
    std::string state, N, N_max, n, l, r, J, pair, coeffs, model, format, out, input;
    std::uint64_t seed = 0;
    double tol = 0;
    unsigned workers = 0;
    size_t samples = 0;
    bool lenient = false;
    bool strict = false;
};

void add_common(CLI::App *sub, Flags &f) {
    sub->add_option("--config", f.config, "JSON config file; flags override its fields");
    sub->add_option("--N", f.N, "chain lengths, comma separated");
    sub->add_option("--n", f.n, "embezzlement precisions, comma separated");
    sub->add_option("--l", f.l, "approximation indices, comma separated");
    sub->add_option("--coeffs", f.coeffs, "squared Schmidt coefficients, e.g. 1/3,2/3 or 1/pi,rest");
    sub->add_option("--model", f.model, "model fixture name or model file");
    sub->add_option("--seed", f.seed, "seed for sampled instances");
    sub->add_option("--tol", f.tol, "verdict tolerance");
    sub->add_option("--format", f.format, "csv or json");
    sub->add_option("--out", f.out, "output path (default: standard output)");
    sub->add_option("--workers", f.workers, "worker threads (PARIND_LAB_WORKERS overrides)");
}

std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open " + path);
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void emit(const std::optional<std::string> &out, const std::string &text) {
    if (!out) {
        std::cout << text;
        return;
    }
    std::ofstream f(*out, std::ios::binary);
    if (!f) {
        throw ConfigError("cannot write " + *out);
    }
    f << text;
}

/// Config file fields first, then every flag that was given on the command line.
ExperimentConfig build_config(const std::string &command, const CLI::App &sub, const Flags &f) {
    ExperimentConfig cfg;
    cfg.command = command;
    if (!f.config.empty()) {
        Json j;
        try {
            j = Json::parse(slurp(f.config));
        } catch (const Json::exception &e) {
            throw ConfigError("config file " + f.config + " is not valid JSON: " + e.what());
        }
        apply_config_json(j, cfg);
    }
    Json flags = Json::object();
    auto given = [&](const char *name) {
        const auto *opt = sub.get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--state")) flags["state"] = f.state;
    if (given("--N")) flags["N"] = f.N;
    if (given("--N-max")) flags["N-max"] = f.N_max;
    if (given("--n")) flags["n"] = f.n;
    if (given("--l")) flags["l"] = f.l;
    if (given("--r")) flags["r"] = f.r;
    if (given("--J")) flags["J"] = f.J;
    if (given("--pair")) flags["pair"] = f.pair;
    if (given("--coeffs")) flags["coeffs"] = f.coeffs;
    if (given("--model")) flags["model"] = f.model;
    if (given("--seed")) flags["seed"] = f.seed;
    if (given("--tol")) flags["tol"] = f.tol;
    if (given("--format")) flags["format"] = f.format;
    if (given("--out")) flags["out"] = f.out;
    if (given("--workers")) flags["workers"] = f.workers;
    if (given("--samples")) flags["samples"] = f.samples;
    if (given("--lenient")) flags["lenient"] = true;
    if (given("--strict")) flags["lenient"] = false;
    if (!f.input.empty()) flags["input"] = f.input;
    apply_config_json(flags, cfg);
    return cfg;
}

int run_validate(const ExperimentConfig &cfg) {
    if (!cfg.input) {
        throw ConfigError("validate needs a report file");
    }
    auto v = validate_text(slurp(*cfg.input), schemas(), !cfg.lenient);
    std::ostringstream o;
    o << (v.valid() ? "valid" : "invalid") << ": " << *cfg.input << " (" << (v.command.empty() ? "?" : v.command)
      << ", " << (v.format.empty() ? "?" : v.format) << ", " << v.rows << " rows, "
      << (cfg.lenient ? "lenient" : "strict") << ")\n";
    for (const auto &i : v.issues) {
        o << "  " << i.where << ": " << i.message << "\n";
    }
    for (const auto &n : v.notes) {
        o << "  note: " << n << "\n";
    }
    emit(cfg.out, o.str());
    return v.valid() ? kExitPass : kExitVerdict;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"parind_lab: chained-correlation sweeps, embezzlement checks and hidden-variable audits"};
    app.require_subcommand(1);
    Flags f;
    std::map<std::string, CLI::App *> subs;
    const std::map<std::string, std::string> help{
        {"chain", "Bell-state chain values against their closed form"},
        {"dim", "d-dimensional chain on an equal coefficient pair"},
        {"sqrt-rational", "embezzled chain for exact rational coefficients, with its precision ledger"},
        {"arbitrary", "half-rank chain for arbitrary coefficients via rational approximants"},
        {"lemma", "half-subset identity and bound coefficients"},
        {"embezzle", "embezzlement fidelity and trace distance sweep"},
        {"pc", "perfect-correlation mismatch probabilities"},
        {"couple", "measurement coupling probability transfer"},
        {"audit", "chained audit of a hidden-variable model (JSON)"},
    };
    for (const auto &name : command_names()) {
        auto *sub = app.add_subcommand(name, help.at(name));
        add_common(sub, f);
        subs[name] = sub;
    }
    subs["chain"]->add_option("--state", f.state, "state (bell)");
    subs["audit"]->add_option("--state", f.state, "state (bell)");
    subs["audit"]->add_option("--N-max", f.N_max, "audit N = 1..N-max (default 8)");
    subs["lemma"]->add_option("--r", f.r, "even sequence lengths, comma separated");
    subs["lemma"]->add_option("--J", f.J, "one subset, comma separated (default: every subset)");
    subs["dim"]->add_option("--pair", f.pair, "rotated index pair j,k (default: first equal pair)");
    for (const char *name : {"lemma", "pc", "couple"}) {
        subs[name]->add_option("--samples", f.samples, "number of sampled instances");
    }
    auto *validate = app.add_subcommand("validate", "check a report's schema and recompute its closed forms");
    validate->add_option("file", f.input, "report file")->required();
    validate->add_option("--config", f.config, "JSON config file");
    validate->add_option("--out", f.out, "output path (default: standard output)");
    auto *lenient = validate->add_flag("--lenient", f.lenient, "accept added columns and fields");
    validate->add_flag("--strict", f.strict, "reject added columns and fields (default)")->excludes(lenient);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (validate->parsed()) {
            return run_validate(build_config("validate", *validate, f));
        }
        for (const auto &[name, sub] : subs) {
            if (!sub->parsed()) {
                continue;
            }
            auto cfg = build_config(name, *sub, f);
            auto outcome = run_command(cfg);
            emit(cfg.out, outcome.report);
            std::cerr << name << ": " << outcome.rows << " rows, " << outcome.failed << " failed verdicts\n";
            return outcome.passed() ? kExitPass : kExitVerdict;
        }
    } catch (const ConfigError &e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const parind::PreconditionError &e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const parind::ConsistencyError &e) {
        std::cerr << "verdict failure: " << e.what() << "\n";
        return kExitVerdict;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}
