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

#include "lab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "lab/pool.hpp"
#include "parind/chained_bell.hpp"
#include "parind/couplings.hpp"
#include "parind/embezzle.hpp"
#include "parind/halfsum.hpp"
#include "parind/hvaudit.hpp"
#include "parind/hvledger.hpp"
#include "parind/hvmodels.hpp"
#include "parind/sampling.hpp"

namespace parind::lab {

namespace {

const char *pass_text(bool ok) { return ok ? "pass" : "fail"; }

std::uint64_t fnv1a(const std::string &s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

sampling::Rng keyed_stream(std::uint64_t seed, const std::string &key) { return sampling::stream(seed, fnv1a(key)); }

std::string pair_text(std::pair<Index, Index> p) {
    return "(" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}

/// "", "1" or "0": whether `value` is below the latest earlier value with the same key.
std::string tightened(const std::vector<std::pair<std::string, double>> &earlier, const std::string &key,
                      double value) {
    for (auto it = earlier.rbegin(); it != earlier.rend(); ++it) {
        if (it->first == key) {
            return value < it->second ? "1" : "0";
        }
    }
    return "";
}

/// The same rule applied to already-recorded rows during validation.
std::string tightened_recorded(const RowContext &ctx, const std::vector<std::string> &key_columns,
                               const RowView &row, const std::string &value_column) {
    std::vector<std::pair<std::string, double>> earlier;
    auto key_of = [&](const std::map<std::string, std::string> &cells) {
        std::string k;
        for (const auto &c : key_columns) {
            k += cells.at(c) + "|";
        }
        return k;
    };
    for (const auto &prev : *ctx.previous) {
        earlier.emplace_back(key_of(prev), std::stod(prev.at(value_column)));
    }
    std::map<std::string, std::string> current;
    for (const auto &c : key_columns) {
        current[c] = row.text(c);
    }
    return tightened(earlier, key_of(current), row.num(value_column));
}

Coefficients coefficients_or(const ExperimentConfig &cfg, const std::string &fallback) {
    return cfg.coeffs ? *cfg.coeffs : parse_coefficients(fallback, ',');
}

std::vector<Rational> require_exact(const Coefficients &c, const std::string &command) {
    if (!c.exact) {
        throw ConfigError(command + " needs exact fractions for --coeffs, got " + c.joined());
    }
    return *c.exact;
}

std::unique_ptr<hv::HVModel> model_or_trivial(const ExperimentConfig &cfg) {
    return cfg.model ? load_model(*cfg.model) : std::make_unique<hv::TrivialModel>();
}

std::vector<int> grid_N(const ExperimentConfig &cfg, std::vector<int> fallback) {
    return cfg.N.empty() ? fallback : cfg.N;
}

std::vector<std::uint64_t> grid(const std::vector<std::uint64_t> &given, std::vector<std::uint64_t> fallback) {
    return given.empty() ? fallback : given;
}

template <class F>
auto precondition(const std::string &what, F f) {
    try {
        return f();
    } catch (const PreconditionError &e) {
        throw ConfigError(what + ": " + e.what());
    } catch (const LabelError &e) {
        throw ConfigError(what + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------------------------- chain

struct ChainDerived {
    double closed_form;
    double bound;
    double abs_error;
    bool pass;
};

double bell_chain_value(int N) {
    chain::ChainSpec spec;
    spec.N = N;
    return chain::correlation_measure_IN(bell_state(), spec, {"A"}, {"B"}).value;
}

ChainDerived chain_derived(int N, double value, double tol) {
    ChainDerived d{chain::closed_form_IN(N), chain::bound_IN(N), 0, false};
    d.abs_error = std::abs(value - d.closed_form);
    d.pass = d.abs_error <= tol && value <= d.bound + tol;
    return d;
}

const std::vector<std::string> kChainColumns{"state", "N", "I_N", "closed_form", "bound", "abs_error", "verdict"};

Schema chain_schema() {
    return {"chain", kChainColumns, [](const RowView &row, const RowContext &ctx) {
                row.expect_text("state", "bell");
                auto N = row.integer("N");
                if (!N || *N < 1) {
                    row.flag("N", "chain length must be positive");
                    return;
                }
                double value = bell_chain_value(static_cast<int>(*N));
                row.expect_close("I_N", value);
                auto d = chain_derived(static_cast<int>(*N), value, ctx.tol);
                row.expect_close("closed_form", d.closed_form);
                row.expect_close("bound", d.bound);
                row.expect_close("abs_error", d.abs_error);
                row.expect_text("verdict", pass_text(d.pass));
            }};
}

Table run_chain(const ExperimentConfig &cfg, double tol, unsigned workers) {
    if (cfg.state != "bell") {
        throw ConfigError("chain supports --state bell only");
    }
    auto Ns = grid_N(cfg, {1, 2, 4, 8, 16});
    Table t{"chain", tol, cfg.seed, kChainColumns, {}};
    auto values = ordered_map<double>(Ns.size(), workers, [&](size_t i) { return bell_chain_value(Ns[i]); });
    for (size_t i = 0; i < Ns.size(); i++) {
        auto d = chain_derived(Ns[i], values[i], tol);
        t.rows.push_back(RowBuilder(t.columns)
                             .set("state", std::string("bell"))
                             .set("N", std::int64_t{Ns[i]})
                             .set("I_N", values[i])
                             .set("closed_form", d.closed_form)
                             .set("bound", d.bound)
                             .set("abs_error", d.abs_error)
                             .set("verdict", std::string(pass_text(d.pass)))
                             .finish());
    }
    return t;
}

// ---------------------------------------------------------------------------------------------- dim

std::pair<Index, Index> equal_pair(const Coefficients &c) {
    for (size_t j = 0; j < c.values.size(); j++) {
        for (size_t k = j + 1; k < c.values.size(); k++) {
            bool same = c.exact ? (*c.exact)[j] == (*c.exact)[k] : std::abs(c.values[j] - c.values[k]) <= 1e-12;
            if (same) {
                return {j, k};
            }
        }
    }
    throw ConfigError("dim needs two equal squared coefficients, got " + c.joined());
}

chain::ChainReport dim_report(const Coefficients &c, Index j, Index k, int N) {
    chain::ChainSpec spec;
    spec.N = N;
    spec.j = j;
    spec.k = k;
    return chain::correlation_measure_IN_prime(schmidt_state(c.values), spec, "A", "B");
}

const std::vector<std::string> kDimColumns{"coeffs", "j",     "k",         "N",      "cj2",
                                           "I_prime", "closed_form", "bound", "abs_error", "verdict"};

Schema dim_schema() {
    return {"dim", kDimColumns, [](const RowView &row, const RowContext &ctx) {
                auto c = parse_coefficients(row.text("coeffs"), ';');
                auto j = row.integer("j");
                auto k = row.integer("k");
                auto N = row.integer("N");
                if (!j || !k || !N || *N < 1) {
                    return;
                }
                auto rep = dim_report(c, static_cast<Index>(*j), static_cast<Index>(*k), static_cast<int>(*N));
                row.expect_close("cj2", c.values.at(static_cast<size_t>(*j)));
                row.expect_close("I_prime", rep.value);
                row.expect_close("closed_form", rep.closed_form);
                row.expect_close("bound", rep.bound);
                double err = std::abs(rep.value - rep.closed_form);
                row.expect_close("abs_error", err);
                row.expect_text("verdict", pass_text(err <= ctx.tol && rep.value <= rep.bound + ctx.tol));
            }};
}

Table run_dim(const ExperimentConfig &cfg, double tol, unsigned workers) {
    auto c = coefficients_or(cfg, "1/4,1/4,1/2");
    auto [j, k] = cfg.pair ? std::pair<Index, Index>{cfg.pair->first, cfg.pair->second} : equal_pair(c);
    auto Ns = grid_N(cfg, {1, 2, 4, 8});
    precondition("dim", [&] { return dim_report(c, j, k, 1); });
    Table t{"dim", tol, cfg.seed, kDimColumns, {}};
    auto reps = ordered_map<chain::ChainReport>(Ns.size(), workers, [&](size_t i) { return dim_report(c, j, k, Ns[i]); });
    for (size_t i = 0; i < Ns.size(); i++) {
        const auto &r = reps[i];
        double err = std::abs(r.value - r.closed_form);
        t.rows.push_back(RowBuilder(t.columns)
                             .set("coeffs", c.joined())
                             .set("j", static_cast<std::int64_t>(j))
                             .set("k", static_cast<std::int64_t>(k))
                             .set("N", std::int64_t{Ns[i]})
                             .set("cj2", c.values[j])
                             .set("I_prime", r.value)
                             .set("closed_form", r.closed_form)
                             .set("bound", r.bound)
                             .set("abs_error", err)
                             .set("verdict", std::string(pass_text(err <= tol && r.value <= r.bound + tol)))
                             .finish());
    }
    return t;
}

// ---------------------------------------------------------------------------------------------- sqrt-rational

const std::vector<std::string> kSqrtColumns{
    "coeffs", "model", "N",   "n",             "r",   "pair",          "I_Nn", "I_chi", "chi_closed_form",
    "trace_distance", "bound", "gap", "gap_tightened", "eps", "ledger_margin", "verdict"};

double chi_closed_form(int N, std::uint64_t r) {
    const double s = std::sin(std::numbers::pi / (4.0 * N));
    return 2.0 * N * (2.0 / static_cast<double>(r)) * s * s;
}

bool sqrt_verdict(double gap, double bound, double i_chi, double chi_cf, double margin, double tol) {
    return gap <= bound + tol && std::abs(i_chi - chi_cf) <= tol && margin < 0;
}

Schema sqrt_rational_schema() {
    return {"sqrt-rational", kSqrtColumns, [](const RowView &row, const RowContext &ctx) {
                auto c = parse_coefficients(row.text("coeffs"), ';');
                if (!c.exact) {
                    row.flag("coeffs", "not exact fractions");
                    return;
                }
                auto N = row.integer("N");
                auto n = row.integer("n");
                if (!N || !n || *N < 1 || *n < 1) {
                    return;
                }
                auto spec = embezzle::EmbezzleSpec::exact(*c.exact, static_cast<std::uint64_t>(*n));
                row.expect_close("r", static_cast<double>(spec.r));
                auto set = spec.index_set();
                row.expect_text("pair", pair_text(set[0]) + "-" + pair_text(set[1]));
                double cf = chi_closed_form(static_cast<int>(*N), spec.r);
                row.expect_close("chi_closed_form", cf);
                double bound = 2.0 * static_cast<double>(*N) * row.num("trace_distance");
                row.expect_close("bound", bound);
                double gap = std::abs(row.num("I_Nn") - row.num("I_chi"));
                row.expect_close("gap", gap);
                row.expect_text("gap_tightened", tightened_recorded(ctx, {"coeffs", "model", "N"}, row, "gap"));
                if (row.num("eps") < row.num("I_Nn") - 1e-15) {
                    row.flag("eps", "below the recorded chain value of the canonical pair");
                }
                row.expect_text("verdict", pass_text(sqrt_verdict(gap, bound, row.num("I_chi"), cf,
                                                                  row.num("ledger_margin"), ctx.tol)));
            }};
}

struct SqrtPoint {
    int N;
    std::uint64_t n;
    embezzle::INnReport chain;
    hv::RationalLedgerEntry ledger;
};

Table run_sqrt_rational(const ExperimentConfig &cfg, double tol, unsigned workers) {
    auto c = coefficients_or(cfg, "1/3,2/3");
    auto fr = require_exact(c, "sqrt-rational");
    auto Ns = grid_N(cfg, {2, 4});
    auto ns = grid(cfg.n, {100, 1000});
    auto model = model_or_trivial(cfg);
    std::vector<std::pair<int, std::uint64_t>> points;
    for (int N : Ns) {
        for (auto n : ns) {
            precondition("sqrt-rational", [&] { return embezzle::EmbezzleSpec::exact(fr, n); });
            points.emplace_back(N, n);
        }
    }
    auto results = ordered_map<SqrtPoint>(points.size(), workers, [&](size_t i) {
        auto [N, n] = points[i];
        auto spec = embezzle::EmbezzleSpec::exact(fr, n);
        auto set = spec.index_set();
        return SqrtPoint{N, n, embezzle::correlation_measure_INn(spec, N, set[0], set[1]),
                         hv::rational_ledger(*model, spec, N)};
    });
    Table t{"sqrt-rational", tol, cfg.seed, kSqrtColumns, {}};
    std::vector<std::pair<std::string, double>> earlier;
    for (const auto &p : results) {
        auto spec = embezzle::EmbezzleSpec::exact(fr, p.n);
        auto set = spec.index_set();
        double cf = chi_closed_form(p.N, spec.r);
        double margin = -INFINITY;
        for (size_t i = 0; i < p.ledger.deviations.size(); i++) {
            margin = std::max(margin, p.ledger.deviations[i] - p.ledger.bounds[i]);
        }
        const std::string key = c.joined() + "|" + model->name() + "|" + std::to_string(p.N) + "|";
        auto tight = tightened(earlier, key, p.chain.gap);
        earlier.emplace_back(key, p.chain.gap);
        bool ok = sqrt_verdict(p.chain.gap, p.chain.bound, p.chain.chi.value, cf, margin, tol);
        t.rows.push_back(RowBuilder(t.columns)
                             .set("coeffs", c.joined())
                             .set("model", model->name())
                             .set("N", std::int64_t{p.N})
                             .set("n", static_cast<std::int64_t>(p.n))
                             .set("r", static_cast<std::int64_t>(spec.r))
                             .set("pair", pair_text(set[0]) + "-" + pair_text(set[1]))
                             .set("I_Nn", p.chain.mapped.value)
                             .set("I_chi", p.chain.chi.value)
                             .set("chi_closed_form", cf)
                             .set("trace_distance", p.chain.trace_distance)
                             .set("bound", p.chain.bound)
                             .set("gap", p.chain.gap)
                             .set("gap_tightened", tight)
                             .set("eps", p.ledger.eps)
                             .set("ledger_margin", margin)
                             .set("verdict", std::string(pass_text(ok)))
                             .finish());
    }
    return t;
}

// ---------------------------------------------------------------------------------------------- arbitrary

const std::vector<std::string> kArbitraryColumns{
    "coeffs",         "model",          "N",              "l",
    "n",              "r",              "chain_closed_form", "I_canonical",
    "embezzle_distance", "approximation_distance", "certified_I", "approximation_error",
    "eps",            "canonical_eps",  "final_bound",    "max_deviation",
    "lemma_holds",    "eps_tightened",  "verdict"};

double approximation_error(const embezzle::EmbezzleSpec &spec) {
    double e = 0;
    for (size_t i = 0; i < spec.d(); i++) {
        e = std::max(e, std::abs(to_double(spec.c2_rational[i]) - spec.c2[i]));
    }
    return e;
}

bool arbitrary_verdict(int N, double i_can, double cf, double de, double da, double max_dev, double final_bound,
                       bool lemma, double tol) {
    return std::abs(i_can - cf) <= 2.0 * N * (de + da) + tol && max_dev < final_bound && lemma;
}

Schema arbitrary_schema() {
    return {"arbitrary", kArbitraryColumns, [](const RowView &row, const RowContext &ctx) {
                auto c = parse_coefficients(row.text("coeffs"), ';');
                auto N = row.integer("N");
                auto l = row.integer("l");
                auto n = row.integer("n");
                if (!N || !l || !n || *N < 1 || *l < 1 || *n < 1) {
                    return;
                }
                auto spec = embezzle::EmbezzleSpec::approximate(c.values, static_cast<std::uint64_t>(*l),
                                                                static_cast<std::uint64_t>(*n));
                const int Ni = static_cast<int>(*N);
                row.expect_close("r", static_cast<double>(spec.r));
                const double cf = chain::closed_form_IN(Ni);
                row.expect_close("chain_closed_form", cf);
                const double de = row.num("embezzle_distance");
                const double da = row.num("approximation_distance");
                const double cert = cf + 2.0 * Ni * (de + da);
                row.expect_close("certified_I", cert);
                const double ae = approximation_error(spec);
                row.expect_close("approximation_error", ae);
                const double eps = std::max(cert / 2, ae);
                row.expect_close("eps", eps);
                row.expect_close("canonical_eps", std::max(row.num("I_canonical") / 2, ae));
                row.expect_close("final_bound", 3 * eps);
                const auto &lemma = row.text("lemma_holds");
                if (lemma != "1" && lemma != "0") {
                    row.flag("lemma_holds", "must be 1 or 0");
                    return;
                }
                row.expect_text("eps_tightened", tightened_recorded(ctx, {"coeffs", "model", "N", "l"}, row, "eps"));
                row.expect_text("verdict", pass_text(arbitrary_verdict(Ni, row.num("I_canonical"), cf, de, da,
                                                                       row.num("max_deviation"), 3 * eps,
                                                                       lemma == "1", ctx.tol)));
            }};
}

Table run_arbitrary(const ExperimentConfig &cfg, double tol, unsigned workers) {
    auto c = coefficients_or(cfg, "1/pi,rest");
    auto Ns = grid_N(cfg, {2});
    auto ls = grid(cfg.l, {10});
    auto ns = grid(cfg.n, {100});
    auto model = model_or_trivial(cfg);
    struct Point {
        int N;
        std::uint64_t l, n;
    };
    std::vector<Point> points;
    for (int N : Ns) {
        for (auto l : ls) {
            for (auto n : ns) {
                precondition("arbitrary", [&] { return embezzle::EmbezzleSpec::approximate(c.values, l, n); });
                points.push_back({N, l, n});
            }
        }
    }
    auto entries = ordered_map<hv::ArbitraryLedgerEntry>(points.size(), workers, [&](size_t i) {
        auto spec = embezzle::EmbezzleSpec::approximate(c.values, points[i].l, points[i].n);
        return hv::arbitrary_ledger(*model, spec, points[i].N);
    });
    Table t{"arbitrary", tol, cfg.seed, kArbitraryColumns, {}};
    std::vector<std::pair<std::string, double>> earlier;
    for (const auto &e : entries) {
        double max_dev = 0;
        for (double d : e.deviations) {
            max_dev = std::max(max_dev, d);
        }
        const std::string key =
            c.joined() + "|" + model->name() + "|" + std::to_string(e.N) + "|" + std::to_string(e.l) + "|";
        auto tight = tightened(earlier, key, e.eps);
        earlier.emplace_back(key, e.eps);
        bool ok = arbitrary_verdict(e.N, e.canonical_I, e.phi_value, e.embezzle_distance, e.approximation_distance,
                                    max_dev, e.final_bound, e.lemma_passed, tol);
        t.rows.push_back(RowBuilder(t.columns)
                             .set("coeffs", c.joined())
                             .set("model", model->name())
                             .set("N", std::int64_t{e.N})
                             .set("l", static_cast<std::int64_t>(e.l))
                             .set("n", static_cast<std::int64_t>(e.n))
                             .set("r", static_cast<std::int64_t>(e.r))
                             .set("chain_closed_form", e.phi_value)
                             .set("I_canonical", e.canonical_I)
                             .set("embezzle_distance", e.embezzle_distance)
                             .set("approximation_distance", e.approximation_distance)
                             .set("certified_I", e.certified_I)
                             .set("approximation_error", e.approximation_error)
                             .set("eps", e.eps)
                             .set("canonical_eps", e.canonical_eps)
                             .set("final_bound", e.final_bound)
                             .set("max_deviation", max_dev)
                             .set("lemma_holds", std::string(e.lemma_passed ? "1" : "0"))
                             .set("eps_tightened", tight)
                             .set("verdict", std::string(pass_text(ok)))
                             .finish());
    }
    return t;
}

// ---------------------------------------------------------------------------------------------- lemma

const std::vector<std::string> kLemmaColumns{"r",        "J",           "size",       "samples",
                                             "identity", "coefficient", "coefficient_value", "verdict"};

std::vector<Rational> random_probability_vector(sampling::Rng &rng, size_t r) {
    std::uniform_int_distribution<int> u(1, 1000);
    std::vector<Rational> p;
    Rational total = 0;
    for (size_t i = 0; i < r; i++) {
        p.emplace_back(u(rng));
        total += p.back();
    }
    for (auto &x : p) {
        x /= total;
    }
    return p;
}

struct LemmaRow {
    std::string identity;
    Rational coefficient;
};

LemmaRow lemma_row(size_t r, const halfsum::Subset &J, size_t samples, std::uint64_t seed) {
    auto rng = keyed_stream(seed, "lemma:" + std::to_string(r) + ":" + halfsum::subset_string(J));
    LemmaRow out{"exact-pass", halfsum::bound_coefficient(r, J.size())};
    for (size_t s = 0; s < samples; s++) {
        auto res = halfsum::subset_identity(r, J, random_probability_vector(rng, r));
        if (!res.holds) {
            out.identity = "fail: " + res.detail;
            break;
        }
    }
    return out;
}

halfsum::Subset parse_subset(const std::string &text) {
    if (text.size() < 2 || text.front() != '{' || text.back() != '}') {
        throw PreconditionError("subset must look like {0,1}");
    }
    halfsum::Subset s;
    for (const auto &x : split_list(text.substr(1, text.size() - 2))) {
        s.push_back(std::stoul(x));
    }
    return s;
}

Schema lemma_schema() {
    return {"lemma", kLemmaColumns, [](const RowView &row, const RowContext &ctx) {
                auto r = row.integer("r");
                auto samples = row.integer("samples");
                if (!r || !samples || *r < 2 || *samples < 1) {
                    return;
                }
                halfsum::Subset J;
                try {
                    J = parse_subset(row.text("J"));
                } catch (const std::exception &e) {
                    row.flag("J", e.what());
                    return;
                }
                row.expect_close("size", static_cast<double>(J.size()));
                auto lr = lemma_row(static_cast<size_t>(*r), J, static_cast<size_t>(*samples), ctx.seed);
                row.expect_text("identity", lr.identity);
                row.expect_text("coefficient", to_string(lr.coefficient));
                row.expect_close("coefficient_value", to_double(lr.coefficient));
                row.expect_text("verdict", pass_text(lr.identity == "exact-pass" && lr.coefficient < 2));
            }};
}

Table run_lemma(const ExperimentConfig &cfg, double tol, unsigned workers) {
    auto rs = grid(cfg.r, {10});
    const size_t samples = cfg.samples.value_or(100);
    std::vector<std::pair<size_t, halfsum::Subset>> points;
    for (auto r : rs) {
        if (r % 2 != 0) {
            throw ConfigError("lemma needs even r, got " + std::to_string(r));
        }
        if (cfg.J) {
            auto J = *cfg.J;
            std::sort(J.begin(), J.end());
            if (std::adjacent_find(J.begin(), J.end()) != J.end() || (!J.empty() && J.back() >= r)) {
                throw ConfigError("J must hold distinct indices below r=" + std::to_string(r));
            }
            points.emplace_back(r, J);
        } else {
            if (r > 16) {
                throw ConfigError("enumerating every J is limited to r <= 16; pass --J");
            }
            for (auto &J : halfsum::all_subsets(r)) {
                points.emplace_back(r, std::move(J));
            }
        }
    }
    auto rows = ordered_map<LemmaRow>(points.size(), workers, [&](size_t i) {
        return lemma_row(points[i].first, points[i].second, samples, cfg.seed);
    });
    Table t{"lemma", tol, cfg.seed, kLemmaColumns, {}};
    for (size_t i = 0; i < points.size(); i++) {
        const auto &[r, J] = points[i];
        const auto &lr = rows[i];
        t.rows.push_back(RowBuilder(t.columns)
                             .set("r", static_cast<std::int64_t>(r))
                             .set("J", halfsum::subset_string(J))
                             .set("size", static_cast<std::int64_t>(J.size()))
                             .set("samples", static_cast<std::int64_t>(samples))
                             .set("identity", lr.identity)
                             .set("coefficient", to_string(lr.coefficient))
                             .set("coefficient_value", to_double(lr.coefficient))
                             .set("verdict", std::string(pass_text(lr.identity == "exact-pass" && lr.coefficient < 2)))
                             .finish());
    }
    return t;
}

// ---------------------------------------------------------------------------------------------- embezzle

const std::vector<std::string> kEmbezzleColumns{"coeffs",         "n",          "r",      "m_max",
                                                "fidelity",       "exact_sum",  "z_form", "z_gap",
                                                "trace_distance", "distance_bound", "infidelity_decreasing",
                                                "verdict"};

bool embezzle_verdict(double f, double exact, double z, double d, double bound, double tol) {
    return std::abs(f - exact) <= tol && f >= z - tol && d <= bound + tol;
}

Schema embezzle_schema() {
    return {"embezzle", kEmbezzleColumns, [](const RowView &row, const RowContext &ctx) {
                auto c = parse_coefficients(row.text("coeffs"), ';');
                if (!c.exact) {
                    row.flag("coeffs", "not exact fractions");
                    return;
                }
                auto n = row.integer("n");
                if (!n || *n < 1) {
                    return;
                }
                auto spec = embezzle::EmbezzleSpec::exact(*c.exact, static_cast<std::uint64_t>(*n));
                row.expect_close("r", static_cast<double>(spec.r));
                row.expect_close("m_max", static_cast<double>(spec.m_max()));
                auto cf = embezzle::fidelity_closed_forms(spec);
                row.expect_close("exact_sum", cf.exact_sum);
                row.expect_close("z_form", cf.z_form);
                row.expect_close("distance_bound", cf.distance_bound);
                const double f = row.num("fidelity");
                row.expect_close("z_gap", f - cf.z_form);
                std::vector<std::pair<std::string, double>> earlier;
                for (const auto &prev : *ctx.previous) {
                    earlier.emplace_back(prev.at("coeffs"), -std::stod(prev.at("fidelity")));
                }
                row.expect_text("infidelity_decreasing", tightened(earlier, row.text("coeffs"), -f));
                row.expect_text("verdict", pass_text(embezzle_verdict(f, cf.exact_sum, cf.z_form,
                                                                      row.num("trace_distance"), cf.distance_bound,
                                                                      ctx.tol)));
            }};
}

Table run_embezzle(const ExperimentConfig &cfg, double tol, unsigned workers) {
    auto c = coefficients_or(cfg, "1/3,2/3");
    auto fr = require_exact(c, "embezzle");
    auto ns = grid(cfg.n, {100, 1000, 10000});
    for (auto n : ns) {
        precondition("embezzle", [&] { return embezzle::fidelity_closed_forms(embezzle::EmbezzleSpec::exact(fr, n)); });
    }
    auto reps = ordered_map<embezzle::FidelityReport>(ns.size(), workers, [&](size_t i) {
        return embezzle::measure_fidelity(embezzle::EmbezzleSpec::exact(fr, ns[i]));
    });
    Table t{"embezzle", tol, cfg.seed, kEmbezzleColumns, {}};
    std::vector<std::pair<std::string, double>> earlier;
    for (size_t i = 0; i < ns.size(); i++) {
        const auto &r = reps[i];
        auto spec = embezzle::EmbezzleSpec::exact(fr, ns[i]);
        auto dec = tightened(earlier, c.joined(), -r.computed);
        earlier.emplace_back(c.joined(), -r.computed);
        bool ok = embezzle_verdict(r.computed, r.exact_sum, r.z_form, r.trace_distance, r.distance_bound, tol);
        t.rows.push_back(RowBuilder(t.columns)
                             .set("coeffs", c.joined())
                             .set("n", static_cast<std::int64_t>(ns[i]))
                             .set("r", static_cast<std::int64_t>(spec.r))
                             .set("m_max", static_cast<std::int64_t>(spec.m_max()))
                             .set("fidelity", r.computed)
                             .set("exact_sum", r.exact_sum)
                             .set("z_form", r.z_form)
                             .set("z_gap", r.computed - r.z_form)
                             .set("trace_distance", r.trace_distance)
                             .set("distance_bound", r.distance_bound)
                             .set("infidelity_decreasing", dec)
                             .set("verdict", std::string(pass_text(ok)))
                             .finish());
    }
    return t;
}

// ---------------------------------------------------------------------------------------------- pc

const std::vector<std::string> kPcColumns{"source", "coeffs", "n", "index_set", "mismatch", "verdict"};

double schmidt_mismatch(const Coefficients &c, const halfsum::Subset &I) {
    auto state = schmidt_state(c.values);
    const auto &reg = state.registry();
    std::vector<Index> idx(I.begin(), I.end());
    auto x = RankedProjector::basis(reg.restrict_to({"A"}), idx);
    auto y = RankedProjector::basis(reg.restrict_to({"B"}), idx);
    return hv::quantum_mismatch(state, x, y);
}

double embezzle_mismatch(const std::vector<Rational> &fr, std::uint64_t n, Index i) {
    auto spec = embezzle::EmbezzleSpec::exact(fr, n);
    return hv::pc1_mismatch(spec, embezzle::mapped_state(spec), i);
}

Schema pc_schema() {
    return {"pc", kPcColumns, [](const RowView &row, const RowContext &ctx) {
                auto c = parse_coefficients(row.text("coeffs"), ';');
                halfsum::Subset I;
                try {
                    I = parse_subset(row.text("index_set"));
                } catch (const std::exception &e) {
                    row.flag("index_set", e.what());
                    return;
                }
                auto n = row.integer("n");
                if (!n) {
                    return;
                }
                double m = 0;
                if (row.text("source") == "schmidt") {
                    m = schmidt_mismatch(c, I);
                } else if (row.text("source") == "embezzle") {
                    if (!c.exact || I.size() != 1) {
                        row.flag("source", "embezzle rows need exact coefficients and one index");
                        return;
                    }
                    m = embezzle_mismatch(*c.exact, static_cast<std::uint64_t>(*n), I[0]);
                } else {
                    row.flag("source", "must be schmidt or embezzle");
                    return;
                }
                row.expect_close("mismatch", m);
                row.expect_text("verdict", pass_text(m <= ctx.tol));
            }};
}

Table run_pc(const ExperimentConfig &cfg, double tol, unsigned workers) {
    auto c = coefficients_or(cfg, "1/6,1/3,1/2");
    const size_t d = c.values.size();
    const size_t samples = cfg.samples.value_or(100);
    std::vector<halfsum::Subset> sets;
    for (size_t s = 0; s < samples; s++) {
        auto rng = keyed_stream(cfg.seed, "pc:" + std::to_string(s));
        std::bernoulli_distribution coin(0.5);
        halfsum::Subset I;
        while (I.empty() || I.size() == d) {
            I.clear();
            for (size_t i = 0; i < d; i++) {
                if (coin(rng)) {
                    I.push_back(i);
                }
            }
        }
        sets.push_back(std::move(I));
    }
    std::vector<std::uint64_t> ns;
    if (c.exact) {
        ns = grid(cfg.n, {200});
        for (auto n : ns) {
            precondition("pc", [&] { return embezzle::EmbezzleSpec::exact(*c.exact, n); });
        }
    } else if (!cfg.n.empty()) {
        throw ConfigError("pc embezzle rows need exact fractions for --coeffs");
    }
    struct Point {
        std::string source;
        std::uint64_t n;
        halfsum::Subset I;
    };
    std::vector<Point> points;
    for (auto &I : sets) {
        points.push_back({"schmidt", 0, I});
    }
    for (auto n : ns) {
        for (size_t i = 0; i < d; i++) {
            points.push_back({"embezzle", n, {i}});
        }
    }
    auto values = ordered_map<double>(points.size(), workers, [&](size_t k) {
        const auto &p = points[k];
        return p.source == "schmidt" ? schmidt_mismatch(c, p.I) : embezzle_mismatch(*c.exact, p.n, p.I[0]);
    });
    Table t{"pc", tol, cfg.seed, kPcColumns, {}};
    for (size_t k = 0; k < points.size(); k++) {
        t.rows.push_back(RowBuilder(t.columns)
                             .set("source", points[k].source)
                             .set("coeffs", c.joined())
                             .set("n", static_cast<std::int64_t>(points[k].n))
                             .set("index_set", halfsum::subset_string(points[k].I))
                             .set("mismatch", values[k])
                             .set("verdict", std::string(pass_text(values[k] <= tol)))
                             .finish());
    }
    return t;
}

// ---------------------------------------------------------------------------------------------- couple

const std::vector<std::string> kCoupleColumns{"kind",      "instance",           "dim",    "outcomes",
                                              "max_error", "completeness_error", "verdict"};

struct CoupleResult {
    std::string kind;
    std::int64_t dim = 0;
    std::int64_t outcomes = 0;
    double max_error = 0;
    double completeness_error = 0;
};

const char *couple_kind(size_t instance, size_t samples) {
    if (instance == samples) {
        return "trine";
    }
    static const char *kinds[] = {"first", "second", "povm"};
    return kinds[instance % 3];
}

CoupleResult couple_instance(std::uint64_t seed, size_t instance, size_t samples) {
    auto rng = keyed_stream(seed, "couple:" + std::to_string(instance));
    CoupleResult r;
    r.kind = couple_kind(instance, samples);
    const Index dim = r.kind == "trine" ? 2 : std::uniform_int_distribution<Index>(2, 4)(rng);
    r.dim = static_cast<std::int64_t>(dim);
    if (r.kind == "first" || r.kind == "second") {
        SystemRegistry reg = r.kind == "first" ? SystemRegistry{{"A", dim}, {"R", 2}} : SystemRegistry{{"A", dim}};
        auto psi = sampling::random_state(rng, reg);
        auto acting = reg.restrict_to({"A"});
        auto E = sampling::random_split(rng, acting, sampling::random_ranks(rng, dim));
        r.outcomes = static_cast<std::int64_t>(E.size());
        if (r.kind == "first") {
            auto out = couplings::first_kind_coupling(psi, E, "P");
            for (size_t i = 0; i < E.size(); i++) {
                r.max_error = std::max(
                    r.max_error, std::abs(couplings::pointer_probability(out, "P", i) - born_probability(psi, E[i])));
            }
        } else {
            std::vector<SparseVector> posts;
            for (size_t i = 0; i < E.size(); i++) {
                posts.push_back(sampling::random_state(rng, reg));
            }
            auto out = couplings::second_kind_coupling(psi, E, posts, "P1", "P2");
            for (size_t i = 0; i < E.size(); i++) {
                double born = born_probability(psi, E[i]);
                r.max_error = std::max({r.max_error, std::abs(couplings::pointer_probability(out, "P1", i) - born),
                                        std::abs(couplings::pointer_probability(out, "P2", i) - born)});
            }
        }
        return r;
    }
    SystemRegistry reg{{"A", dim}, {"R", 2}};
    auto acting = reg.restrict_to({"A"});
    auto povm = r.kind == "trine"
                    ? couplings::PovmElementSet::trine(acting)
                    : couplings::PovmElementSet(
                          acting, sampling::random_kraus(rng, static_cast<Eigen::Index>(dim),
                                                         std::uniform_int_distribution<Eigen::Index>(2, 4)(rng)));
    auto psi = sampling::random_state(rng, reg);
    r.outcomes = static_cast<std::int64_t>(povm.size());
    r.completeness_error = povm.completeness_error();
    auto out = couplings::povm_coupling(psi, povm, "P1", "P2");
    for (size_t j = 0; j < povm.size(); j++) {
        double p = povm.probability(psi, j);
        r.max_error = std::max({r.max_error, std::abs(couplings::pointer_probability(out, "P1", j) - p),
                                std::abs(couplings::pointer_probability(out, "P2", j) - p)});
    }
    return r;
}

bool couple_verdict(double err, double completeness, double tol) {
    return err <= tol && completeness <= tolerances().norm;
}

Schema couple_schema() {
    return {"couple", kCoupleColumns, [](const RowView &row, const RowContext &ctx) {
                auto instance = row.integer("instance");
                if (!instance || *instance < 0) {
                    return;
                }
                const auto &kind = row.text("kind");
                // The trine row closes the sweep; its instance number equals the sample count.
                size_t samples = kind == "trine" ? static_cast<size_t>(*instance) : static_cast<size_t>(-1);
                auto r = couple_instance(ctx.seed, static_cast<size_t>(*instance), samples);
                row.expect_text("kind", r.kind);
                row.expect_close("dim", static_cast<double>(r.dim));
                row.expect_close("outcomes", static_cast<double>(r.outcomes));
                row.expect_close("max_error", r.max_error, 1e-9);
                row.expect_close("completeness_error", r.completeness_error, 1e-9);
                row.expect_text("verdict", pass_text(couple_verdict(row.num("max_error"),
                                                                    row.num("completeness_error"), ctx.tol)));
            }};
}

Table run_couple(const ExperimentConfig &cfg, double tol, unsigned workers) {
    const size_t samples = cfg.samples.value_or(500);
    auto results = ordered_map<CoupleResult>(samples + 1, workers,
                                             [&](size_t i) { return couple_instance(cfg.seed, i, samples); });
    Table t{"couple", tol, cfg.seed, kCoupleColumns, {}};
    for (size_t i = 0; i < results.size(); i++) {
        const auto &r = results[i];
        t.rows.push_back(RowBuilder(t.columns)
                             .set("kind", r.kind)
                             .set("instance", static_cast<std::int64_t>(i))
                             .set("dim", r.dim)
                             .set("outcomes", r.outcomes)
                             .set("max_error", r.max_error)
                             .set("completeness_error", r.completeness_error)
                             .set("verdict",
                                  std::string(pass_text(couple_verdict(r.max_error, r.completeness_error, tol))))
                             .finish());
    }
    return t;
}

// ---------------------------------------------------------------------------------------------- audit

Json failure_json(const hv::Failure &f) {
    Json j;
    j["check"] = f.check;
    j["scenario"] = f.scenario;
    j["detail"] = f.detail;
    j["lambda"] = f.lambda ? Json(*f.lambda) : Json(nullptr);
    j["deviation"] = f.deviation;
    return j;
}

Json check_json(const hv::CheckReport &c) {
    Json j;
    j["evaluated"] = c.evaluated;
    j["max_deviation"] = c.max_deviation;
    j["passed"] = c.passed();
    j["failures"] = Json::array();
    for (const auto &f : c.failures) {
        j["failures"].push_back(failure_json(f));
    }
    return j;
}

Json audit_json(const hv::AuditReport &rep, double tol, std::uint64_t seed) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["command"] = "audit";
    j["tol"] = tol;
    j["seed"] = seed;
    j["model"] = rep.model;
    j["state"] = rep.setup;
    j["entries"] = Json::array();
    for (const auto &e : rep.entries) {
        Json x;
        x["N"] = e.N;
        x["quantum_I"] = e.quantum_I;
        x["closed_form"] = chain::closed_form_IN(e.N);
        x["bound"] = chain::bound_IN(e.N);
        x["lhs"] = e.lhs;
        x["rhs"] = e.rhs;
        x["nontriviality"] = e.nontriviality;
        x["refuted"] = e.refuted;
        x["rhs_matches"] = e.rhs_matches;
        x["pairs"] = Json::array();
        for (const auto &p : e.pairs) {
            x["pairs"].push_back({{"a", p.a}, {"b", p.b}, {"model", p.model_disagreement},
                                  {"quantum", p.quantum_disagreement}});
        }
        x["checks"]["compquant"] = check_json(e.compquant);
        x["checks"]["parind"] = check_json(e.parind);
        x["checks"]["probability_inequality"] = check_json(e.probability_inequality);
        j["entries"].push_back(std::move(x));
    }
    j["refuted_at"] = rep.refuted_at ? Json(*rep.refuted_at) : Json(nullptr);
    j["localized"] = rep.localized ? failure_json(*rep.localized) : Json(nullptr);
    j["refutation_bound"] = rep.refutation_bound ? Json(*rep.refutation_bound) : Json(nullptr);
    j["verdict"] = pass_text(rep.passed());
    return j;
}

void check_keys(const Json &obj, const std::vector<std::string> &keys, const std::string &where, bool strict,
                Validation &v) {
    if (!obj.is_object()) {
        v.issues.push_back({where, "expected an object"});
        return;
    }
    for (const auto &k : keys) {
        if (!obj.contains(k)) {
            v.issues.push_back({where + "/" + k, "missing field"});
        }
    }
    for (const auto &[k, _] : obj.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
            if (strict) {
                v.issues.push_back({where + "/" + k, "unexpected field (use lenient mode to accept added fields)"});
            } else {
                v.notes.push_back("ignored added field " + where + "/" + k);
            }
        }
    }
}

double json_num(const Json &obj, const std::string &key, const std::string &where, Validation &v) {
    if (!obj.contains(key) || !obj[key].is_number()) {
        v.issues.push_back({where + "/" + key, "expected a number"});
        return std::nan("");
    }
    return obj[key].get<double>();
}

bool json_bool(const Json &obj, const std::string &key, const std::string &where, Validation &v) {
    if (!obj.contains(key) || !obj[key].is_boolean()) {
        v.issues.push_back({where + "/" + key, "expected true or false"});
        return false;
    }
    return obj[key].get<bool>();
}

void expect_num(Validation &v, const std::string &where, double recorded, double expected, double tol = 1e-12) {
    if (std::isnan(recorded) || std::abs(recorded - expected) > tol * (1 + std::abs(expected))) {
        v.issues.push_back({where, "recorded " + format_double(recorded) + ", recomputed " + format_double(expected)});
    }
}

void validate_audit(const Json &doc, bool strict, Validation &v) {
    v.format = "json";
    static const std::vector<std::string> kTop{"schema", "command", "tol",       "seed",     "model",
                                               "state",  "entries", "refuted_at", "localized", "refutation_bound",
                                               "verdict"};
    static const std::vector<std::string> kEntry{"N",   "quantum_I",     "closed_form", "bound",       "lhs", "rhs",
                                                 "nontriviality", "refuted", "rhs_matches", "pairs", "checks"};
    static const std::vector<std::string> kChecks{"compquant", "parind", "probability_inequality"};
    static const std::vector<std::string> kCheck{"evaluated", "max_deviation", "passed", "failures"};
    check_keys(doc, kTop, "", strict, v);
    if (!v.valid()) {
        return;
    }
    const double tol = json_num(doc, "tol", "", v);
    if (doc["state"] != "bell") {
        v.issues.push_back({"/state", "only bell audits are recomputable"});
    }
    if (!doc["entries"].is_array()) {
        v.issues.push_back({"/entries", "expected an array"});
        return;
    }
    std::optional<int> first_refuted;
    bool all_pass = true;
    const auto &entries = doc["entries"];
    for (size_t i = 0; i < entries.size(); i++) {
        const std::string w = "/entries/" + std::to_string(i);
        const auto &e = entries[i];
        const size_t before = v.issues.size();
        check_keys(e, kEntry, w, strict, v);
        if (v.issues.size() != before) {
            continue;
        }
        if (!e["N"].is_number_integer() || e["N"].get<int>() < 1) {
            v.issues.push_back({w + "/N", "chain length must be a positive integer"});
            continue;
        }
        const int N = e["N"].get<int>();
        expect_num(v, w + "/closed_form", json_num(e, "closed_form", w, v), chain::closed_form_IN(N));
        expect_num(v, w + "/bound", json_num(e, "bound", w, v), chain::bound_IN(N));
        const double q = json_num(e, "quantum_I", w, v);
        expect_num(v, w + "/quantum_I", q, bell_chain_value(N));
        double pair_sum = 0;
        if (!e["pairs"].is_array() || e["pairs"].size() != static_cast<size_t>(2 * N)) {
            v.issues.push_back({w + "/pairs", "expected " + std::to_string(2 * N) + " neighbouring pairs"});
        } else {
            for (size_t p = 0; p < e["pairs"].size(); p++) {
                pair_sum += json_num(e["pairs"][p], "model", w + "/pairs/" + std::to_string(p), v);
            }
        }
        const double lhs = json_num(e, "lhs", w, v);
        const double rhs = json_num(e, "rhs", w, v);
        expect_num(v, w + "/rhs", rhs, pair_sum, 1e-12 * 2 * N);
        const bool refuted = json_bool(e, "refuted", w, v);
        if (refuted != (lhs > q + tol)) {
            v.issues.push_back({w + "/refuted", "recorded " + std::string(refuted ? "true" : "false") +
                                                    ", recomputed from lhs and quantum_I"});
        }
        if (refuted && !first_refuted) {
            first_refuted = N;
        }
        bool checks_pass = true;
        const auto &checks = e["checks"];
        check_keys(checks, kChecks, w + "/checks", strict, v);
        for (const auto &name : kChecks) {
            if (!checks.contains(name)) {
                continue;
            }
            const std::string cw = w + "/checks/" + name;
            check_keys(checks[name], kCheck, cw, strict, v);
            if (!checks[name].contains("failures") || !checks[name]["failures"].is_array()) {
                continue;
            }
            bool passed = json_bool(checks[name], "passed", cw, v);
            if (passed != checks[name]["failures"].empty()) {
                v.issues.push_back({cw + "/passed", "disagrees with the recorded failures"});
            }
            checks_pass = checks_pass && passed;
        }
        all_pass = all_pass && checks_pass && json_bool(e, "rhs_matches", w, v);
        if (i == 0) {
            const double delta = json_num(e, "nontriviality", w, v);
            Json expected = nullptr;
            if (delta > tol) {
                expected = static_cast<int>(std::ceil(std::numbers::pi * std::numbers::pi / (16.0 * delta) - 1e-12));
            }
            if (doc["refutation_bound"] != expected) {
                v.issues.push_back({"/refutation_bound", "recorded " + doc["refutation_bound"].dump() +
                                                             ", recomputed " + expected.dump()});
            }
        }
    }
    Json expected_refuted = first_refuted ? Json(*first_refuted) : Json(nullptr);
    if (doc["refuted_at"] != expected_refuted) {
        v.issues.push_back(
            {"/refuted_at", "recorded " + doc["refuted_at"].dump() + ", recomputed " + expected_refuted.dump()});
    }
    if (first_refuted && doc["localized"].is_null()) {
        v.issues.push_back({"/localized", "refuted audit without a localized failure"});
    }
    const bool pass = all_pass && !first_refuted;
    if (doc["verdict"] != pass_text(pass)) {
        v.issues.push_back({"/verdict", "recorded " + doc["verdict"].dump() + ", recomputed \"" + pass_text(pass) + "\""});
    }
    v.rows = entries.size();
}

Json run_audit(const ExperimentConfig &cfg, double tol) {
    if (cfg.state != "bell") {
        throw ConfigError("audit supports --state bell only");
    }
    if (!cfg.N.empty() && cfg.N_max) {
        throw ConfigError("pass either --N or --N-max, not both");
    }
    std::vector<int> Ns = cfg.N;
    if (Ns.empty()) {
        for (int N = 1; N <= cfg.N_max.value_or(8); N++) {
            Ns.push_back(N);
        }
    }
    auto model = model_or_trivial(cfg);
    try {
        return audit_json(hv::chained_audit(*model, hv::bell_chain_setup, Ns, tol), tol, cfg.seed);
    } catch (const ModelError &e) {
        throw ConfigError(std::string("model cannot run this audit: ") + e.what());
    }
}

size_t failed_rows(const Table &t) {
    auto it = std::find(t.columns.begin(), t.columns.end(), "verdict");
    const auto col = static_cast<size_t>(it - t.columns.begin());
    return static_cast<size_t>(std::count_if(t.rows.begin(), t.rows.end(),
                                             [&](const auto &row) { return cell_text(row[col]) != "pass"; }));
}

}  // namespace

const std::vector<std::string> &command_names() {
    static const std::vector<std::string> names{"chain", "dim", "sqrt-rational", "arbitrary", "lemma",
                                                "embezzle", "pc", "couple", "audit"};
    return names;
}

const SchemaRegistry &schemas() {
    static const SchemaRegistry reg = [] {
        SchemaRegistry r;
        for (auto s : {chain_schema(), dim_schema(), sqrt_rational_schema(), arbitrary_schema(), lemma_schema(),
                       embezzle_schema(), pc_schema(), couple_schema()}) {
            r.tables.emplace(s.command, s);
        }
        r.documents.emplace("audit", validate_audit);
        return r;
    }();
    return reg;
}

double default_tolerance(const std::string &) { return 1e-12; }

RunOutcome run_command(const ExperimentConfig &cfg) {
    const auto &names = command_names();
    if (std::find(names.begin(), names.end(), cfg.command) == names.end()) {
        throw ConfigError("unknown command '" + cfg.command + "'");
    }
    const double tol = cfg.tol.value_or(default_tolerance(cfg.command));
    if (!(tol > 0)) {
        throw ConfigError("tol must be positive");
    }
    RunOutcome out;
    out.format = cfg.format.empty() ? (cfg.command == "audit" ? "json" : "csv") : cfg.format;
    if (out.format != "csv" && out.format != "json") {
        throw ConfigError("format must be csv or json, got '" + out.format + "'");
    }
    if (cfg.command == "audit") {
        if (out.format != "json") {
            throw ConfigError("audit reports are JSON only");
        }
        auto j = run_audit(cfg, tol);
        out.report = dump(j);
        out.rows = j["entries"].size();
        out.failed = j["verdict"] == "pass" ? 0 : 1;
        return out;
    }
    const unsigned workers = cfg.resolved_workers();
    Table t;
    if (cfg.command == "chain") {
        t = run_chain(cfg, tol, workers);
    } else if (cfg.command == "dim") {
        t = run_dim(cfg, tol, workers);
    } else if (cfg.command == "sqrt-rational") {
        t = run_sqrt_rational(cfg, tol, workers);
    } else if (cfg.command == "arbitrary") {
        t = run_arbitrary(cfg, tol, workers);
    } else if (cfg.command == "lemma") {
        t = run_lemma(cfg, tol, workers);
    } else if (cfg.command == "embezzle") {
        t = run_embezzle(cfg, tol, workers);
    } else if (cfg.command == "pc") {
        t = run_pc(cfg, tol, workers);
    } else {
        t = run_couple(cfg, tol, workers);
    }
    out.report = out.format == "csv" ? to_csv(t) : dump(to_json(t));
    out.rows = t.rows.size();
    out.failed = failed_rows(t);
    return out;
}

}  // namespace parind::lab
