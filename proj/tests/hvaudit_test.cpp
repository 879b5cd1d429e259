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

#include "parind/hvaudit.hpp"

#include <gtest/gtest.h>

#include <random>

#include "parind/hvledger.hpp"
#include "parind/hvmodels.hpp"
#include "support/dense_oracle.hpp"

using namespace parind;
using namespace parind::hv;

namespace {

constexpr double kPi = std::numbers::pi;

struct BellContext {
    std::shared_ptr<const SparseState> state = std::make_shared<const SparseState>(bell_state("A", "B"));
    std::vector<Party> parties{{"A", {"A"}}, {"B", {"B"}}};
    chain::ChainFamily fam;

    explicit BellContext(int N) {
        chain::ChainSpec spec;
        spec.N = N;
        fam = chain::build_chain(spec, state->registry().restrict_to({"A"}), state->registry().restrict_to({"B"}));
    }

    Scenario pair(int a, int b) const { return make_scenario("pair", state, parties, {fam.A(a), fam.B(b)}); }
    Scenario alone_a(int a) const { return make_scenario("A alone", state, parties, {fam.A(a), std::nullopt}); }
    Scenario alone_b(int b) const { return make_scenario("B alone", state, parties, {std::nullopt, fam.B(b)}); }

    std::vector<Scenario> all() const {
        std::vector<Scenario> out;
        for (auto [a, b] : fam.pairs()) {
            out.push_back(pair(a, b));
        }
        for (int a = 0; a <= 2 * fam.N; a += 2) {
            out.push_back(alone_a(a));
        }
        for (int b = 1; b < 2 * fam.N; b += 2) {
            out.push_back(alone_b(b));
        }
        return out;
    }
};

/// A model given by an explicit table: one distribution per (scenario name, point).
class TableModel : public HVModel {
   public:
    TableModel(LambdaSpace space, std::function<std::vector<double>(const Scenario &, size_t)> f)
        : space_(std::move(space)), f_(std::move(f)) {}
    std::string name() const override { return "table"; }
    LambdaSpace lambda_space() const override { return space_; }
    std::vector<double> distribution(const Scenario &s, size_t l) const override { return f_(s, l); }

   private:
    LambdaSpace space_;
    std::function<std::vector<double>(const Scenario &, size_t)> f_;
};

}  // namespace

TEST(lambda_space, validation) {
    EXPECT_NO_THROW(LambdaSpace::uniform({"a", "b", "c"}));
    EXPECT_THROW((LambdaSpace{{"a", "b"}, {0.5, 0.6}}.validate()), ModelError);
    EXPECT_THROW((LambdaSpace{{"a", "b"}, {1.5, -0.5}}.validate()), ModelError);
    EXPECT_THROW((LambdaSpace{{"a"}, {}}.validate()), ModelError);
    EXPECT_DOUBLE_EQ((LambdaSpace{{"a", "b", "c"}, {0.0, 0.25, 0.75}}.min_positive_weight()), 0.25);
}

TEST(scenario, outcome_layout_matches_joint_distribution) {
    BellContext ctx(2);
    auto s = ctx.pair(2, 1);
    EXPECT_EQ(s.outcome_count(), 4u);
    EXPECT_EQ(s.outcome_digits(2), (std::vector<size_t>{1, 0}));
    auto d = born_distribution(s);
    auto ma = party_marginal(s, d, 0);
    EXPECT_NEAR(ma[0] + ma[1], 1.0, 1e-15);
    EXPECT_NE(s.describe_outcome(0).find("A_2=-1"), std::string::npos);
    EXPECT_THROW(party_marginal(ctx.alone_a(0), {1.0, 0.0}, 1), PreconditionError);
}

TEST(scenario, rejects_observable_outside_party) {
    BellContext ctx(1);
    EXPECT_THROW(make_scenario("bad", ctx.state, ctx.parties, {ctx.fam.B(1), std::nullopt}), PreconditionError);
}

TEST(checked_distribution, malformed_output_is_a_model_error) {
    BellContext ctx(1);
    auto space = LambdaSpace::uniform({"x"});
    TableModel short_dist(space, [](const Scenario &, size_t) { return std::vector<double>{1.0}; });
    EXPECT_THROW(check_compquant(short_dist, space, {ctx.pair(0, 1)}, 1e-12), ModelError);
    TableModel unnormalized(space, [](const Scenario &, size_t) { return std::vector<double>{0.5, 0.5, 0.5, 0.0}; });
    EXPECT_THROW(check_compquant(unnormalized, space, {ctx.pair(0, 1)}, 1e-12), ModelError);
}

TEST(trivial_model, passes_compquant_and_parind) {
    TrivialModel m(3);
    BellContext ctx(4);
    auto cq = check_compquant(m, m.lambda_space(), ctx.all(), 1e-12);
    EXPECT_TRUE(cq.passed());
    EXPECT_LE(cq.max_deviation, 1e-15);
    auto pi = check_parind(m, m.lambda_space(), {ctx.alone_a(2), ctx.pair(2, 1), ctx.pair(2, 3)}, 0, 1e-12);
    EXPECT_TRUE(pi.passed());
    EXPECT_LE(pi.max_deviation, 1e-12);
}

TEST(deterministic_chain, single_observable_average_is_half) {
    DeterministicChainModel m;
    BellContext ctx(2);
    auto cq = check_compquant(m, m.lambda_space(), {ctx.alone_a(0)}, 1e-12);
    EXPECT_TRUE(cq.passed());
    auto pair = check_compquant(m, m.lambda_space(), {ctx.pair(0, 1)}, 1e-12);
    ASSERT_FALSE(pair.passed());
    EXPECT_EQ(pair.failures.front().check, "compquant");
    EXPECT_NEAR(pair.max_deviation, 0.5 - std::pow(std::cos(kPi / 8), 2) / 2, 1e-12);
}

TEST(deterministic_chain, refuted_at_two) {
    DeterministicChainModel m;
    auto rep = chained_audit(m, bell_chain_setup, {1, 2, 4, 8}, 1e-12);
    ASSERT_TRUE(rep.refuted_at.has_value());
    EXPECT_EQ(*rep.refuted_at, 2);
    EXPECT_FALSE(rep.entries[0].refuted);
    EXPECT_NEAR(rep.entries[0].lhs, 1.0, 1e-15);
    EXPECT_NEAR(rep.entries[0].quantum_I, 1.0, 1e-12);
    EXPECT_NEAR(rep.entries[1].quantum_I, 4 * std::pow(std::sin(kPi / 8), 2), 1e-12);
    ASSERT_TRUE(rep.localized.has_value());
    EXPECT_EQ(rep.localized->check, "compquant");
    EXPECT_NE(rep.localized->scenario.find("A_0,B_1"), std::string::npos);
    ASSERT_TRUE(rep.refutation_bound.has_value());
    EXPECT_EQ(*rep.refutation_bound, 2);
    EXPECT_LE(*rep.refuted_at, *rep.refutation_bound);
    for (const auto &e : rep.entries) {
        EXPECT_NEAR(e.nontriviality, 0.5, 1e-15);
        EXPECT_NEAR(e.rhs, 1.0, 1e-15);
        EXPECT_TRUE(e.parind.passed());
        EXPECT_TRUE(e.probability_inequality.passed());
    }
    EXPECT_FALSE(rep.passed());
}

TEST(local_cosine, deterministic_local_response) {
    LocalCosineResponseModel m;
    BellContext ctx(2);
    EXPECT_TRUE(check_compquant(m, m.lambda_space(), {ctx.alone_a(0), ctx.alone_b(1)}, 1e-12).passed());
    auto rep = chained_audit(m, bell_chain_setup, {1, 2, 4}, 1e-12);
    ASSERT_TRUE(rep.refuted_at.has_value());
    EXPECT_EQ(*rep.refuted_at, 2);
    for (const auto &e : rep.entries) {
        // Orthogonal settings at N = 1 are reproduced exactly; finer chains are not.
        EXPECT_EQ(e.compquant.passed(), e.N == 1);
        EXPECT_TRUE(e.parind.passed());
        // Each pair separates a quarter-turn window; the model's own disagreement sums to one.
        EXPECT_NEAR(e.rhs, 1.0, 1e-12);
        EXPECT_LE(e.lhs, e.rhs + 1e-12);
    }
}

TEST(signalling_toy, passes_compquant_fails_parind_by_delta) {
    SignallingToyModel m(0.1);
    BellContext ctx(1);
    auto cq = check_compquant(m, m.lambda_space(), ctx.all(), 1e-12);
    EXPECT_TRUE(cq.passed()) << cq.max_deviation;
    auto pi = check_parind(m, m.lambda_space(), {ctx.alone_a(0), ctx.pair(0, 1)}, 0, 1e-12);
    ASSERT_FALSE(pi.passed());
    EXPECT_NEAR(pi.max_deviation, 0.1, 1e-12);
    EXPECT_TRUE(pi.failures.front().lambda.has_value());
    // The remote party's marginal does not move.
    EXPECT_TRUE(check_parind(m, m.lambda_space(), {ctx.alone_b(1), ctx.pair(0, 1)}, 1, 1e-12).passed());
}

TEST(signalling_toy, undefined_on_tight_pairs) {
    SignallingToyModel m(0.1);
    EXPECT_THROW(chained_audit(m, bell_chain_setup, {8}, 1e-12), ModelError);
}

TEST(trivial_model, audit_passes_and_rhs_equals_quantum) {
    TrivialModel m(2);
    auto rep = chained_audit(m, bell_chain_setup, {1, 2, 4, 8, 16}, 1e-12);
    EXPECT_TRUE(rep.passed());
    EXPECT_FALSE(rep.refuted_at.has_value());
    for (const auto &e : rep.entries) {
        EXPECT_NEAR(e.rhs, chain::closed_form_IN(e.N), 2 * e.N * 1e-12);
        EXPECT_NEAR(e.lhs, 0.0, 1e-15);
        EXPECT_LE(e.nontriviality, e.quantum_I / 2);
    }
}

TEST(mixture_model, refutation_point_respects_the_bound) {
    // Points with Pr(A_0 = 1) = 1/2 +- delta on every observable, product joints: the audit must refute by
    // ceil(pi^2 / (16 delta)).
    for (double delta : {0.5, 0.3, 0.2, 0.1}) {
        auto space = LambdaSpace::uniform({"hi", "lo"});
        TableModel m(space, [delta](const Scenario &s, size_t l) {
            double p = l == 0 ? 0.5 + delta : 0.5 - delta;
            std::vector<double> d(1, 1.0);
            for (size_t i : s.measured()) {
                const auto &o = *s.settings[i];
                std::vector<double> local(o.size(), 0.0);
                double theta = *o.angle();
                double pp = theta < kPi / 2 - 1e-12 ? p : 1 - p;
                local[*o.find(1.0)] = pp;
                local[*o.find(-1.0)] = 1 - pp;
                std::vector<double> next;
                for (double a : d) {
                    for (double b : local) {
                        next.push_back(a * b);
                    }
                }
                d = next;
            }
            return d;
        });
        const int bound = static_cast<int>(std::ceil(kPi * kPi / (16 * delta)));
        std::vector<int> Ns;
        for (int N = 1; N <= bound; N++) {
            Ns.push_back(N);
        }
        auto rep = chained_audit(m, bell_chain_setup, Ns, 1e-12);
        ASSERT_TRUE(rep.refuted_at.has_value()) << delta;
        EXPECT_LE(*rep.refuted_at, bound);
        ASSERT_TRUE(rep.localized.has_value());
    }
}

TEST(state_independence, fixtures_ignore_spectators) {
    BellContext ctx(1);
    std::vector<std::unique_ptr<HVModel>> models;
    for (const auto &n : fixture_names()) {
        models.push_back(make_fixture(n));
    }
    for (const auto &m : models) {
        auto r = check_state_independence(*m, m->lambda_space(), ctx.all(), 1e-12);
        EXPECT_TRUE(r.passed()) << m->name();
    }
    EXPECT_THROW(make_fixture("bohm"), PreconditionError);
}

TEST(probability_inequality, holds_for_every_fixture) {
    BellContext ctx(1);
    for (const auto &n : fixture_names()) {
        auto m = make_fixture(n);
        auto r = check_probability_inequality(*m, m->lambda_space(), {ctx.pair(0, 1), ctx.pair(2, 1)}, 1e-12);
        EXPECT_TRUE(r.passed()) << n;
    }
}

TEST(perfect_correlation, schmidt_state_index_sets) {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 20; t++) {
        std::uniform_real_distribution<double> u(0.1, 1.0);
        std::vector<double> c2{u(rng), u(rng), u(rng)};
        double s = c2[0] + c2[1] + c2[2];
        for (auto &v : c2) {
            v /= s;
        }
        auto psi = schmidt_state(c2, "A", "B");
        auto ra = psi.registry().restrict_to({"A"});
        auto rb = psi.registry().restrict_to({"B"});
        EXPECT_LE(quantum_mismatch(psi, RankedProjector::basis(ra, {0, 2}), RankedProjector::basis(rb, {0, 2})),
                  1e-12);
        EXPECT_NEAR(born_probability(psi, RankedProjector::basis(ra, {1})),
                    born_probability(psi, RankedProjector::basis(rb, {1})), 1e-15);
    }
}

TEST(perfect_correlation, model_level_trivial_and_broken) {
    auto psi = std::make_shared<const SparseState>(schmidt_state({0.2, 0.3, 0.5}, "A", "B"));
    auto ra = psi->registry().restrict_to({"A"});
    auto rb = psi->registry().restrict_to({"B"});
    auto basis_obs = [](const SystemRegistry &acting, std::string name) {
        std::vector<Branch> b;
        for (Index i = 0; i < 3; i++) {
            b.push_back({static_cast<double>(i), RankedProjector::basis(acting, {i})});
        }
        return Observable(b, std::move(name));
    };
    auto s = make_scenario("basis", psi, {{"A", {"A"}}, {"B", {"B"}}}, {basis_obs(ra, "XA"), basis_obs(rb, "XB")});
    TrivialModel trivial(4);
    auto ok = perfect_correlation_check(trivial, s, {0, 2}, {0, 2}, 1e-12);
    EXPECT_TRUE(ok.passed);
    EXPECT_LE(ok.quantum_mismatch, 1e-12);
    auto space = LambdaSpace::uniform({"x", "y"});
    TableModel product(space, [](const Scenario &sc, size_t) {
        std::vector<double> c{0.2, 0.3, 0.5}, d;
        for (double a : c) {
            for (double b : c) {
                d.push_back(a * b);
            }
        }
        (void)sc;
        return d;
    });
    auto bad = perfect_correlation_check(product, s, {0, 2}, {0, 2}, 1e-12);
    EXPECT_FALSE(bad.passed);
    EXPECT_GT(bad.max_point_mismatch, bad.point_bound);
}

TEST(perfect_correlation, embezzled_state_pc1) {
    auto spec = embezzle::EmbezzleSpec::exact({parse_rational("1/6"), parse_rational("1/3"), parse_rational("1/2")}, 200);
    auto mapped = embezzle::mapped_state(spec);
    for (Index i = 0; i < 3; i++) {
        EXPECT_LE(pc1_mismatch(spec, mapped, i), 1e-12);
    }
}

TEST(rational_ledger, trivial_model_and_tightening) {
    TrivialModel m;
    auto c2 = std::vector<Rational>{parse_rational("1/3"), parse_rational("2/3")};
    auto coarse = rational_ledger(m, embezzle::EmbezzleSpec::exact(c2, 100), 2);
    auto fine = rational_ledger(m, embezzle::EmbezzleSpec::exact(c2, 10000), 8);
    EXPECT_EQ(coarse.pair_values.size(), 3u);
    for (const auto *e : {&coarse, &fine}) {
        EXPECT_TRUE(e->holds);
        for (double d : e->deviations) {
            EXPECT_LE(d, 1e-12);
        }
    }
    EXPECT_LT(fine.eps, coarse.eps);
    EXPECT_NEAR(coarse.chi_value, 2 * 2 * (2.0 / 3) * std::pow(std::sin(kPi / 8), 2), 1e-12);
}

TEST(arbitrary_ledger, lemma_coefficient_for_six) {
    TrivialModel m;
    auto spec = embezzle::EmbezzleSpec::approximate({1.0 / 3, 2.0 / 3}, 3, 200);
    ASSERT_EQ(spec.r, 6u);
    auto e = arbitrary_ledger(m, spec, 2);
    ASSERT_EQ(e.lemma.size(), 2u);
    EXPECT_EQ(e.lemma[0].J.size(), 2u);
    EXPECT_EQ(e.lemma[0].coefficient, Rational(4, 3));
    EXPECT_LT(e.lemma[0].coefficient, 2);
    EXPECT_TRUE(e.lemma_hypothesis_enumerated);
    EXPECT_TRUE(e.holds);
    for (double d : e.deviations) {
        EXPECT_LE(d, 1e-12);
    }
    EXPECT_NEAR(e.phi_value, 4 * std::pow(std::sin(kPi / 8), 2), 1e-12);
    EXPECT_GE(e.certified_I + 1e-12, e.canonical_I);
}
