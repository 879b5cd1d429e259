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

#include "parind/embezzle.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <numbers>
#include <set>

using namespace parind;
using namespace parind::embezzle;

namespace {

constexpr double kPi = std::numbers::pi;

Rational q(const char *s) { return parse_rational(s); }

long double harmonic_reference(std::uint64_t k) {
    long double s = 0;
    for (std::uint64_t j = 1; j <= k; j++) {
        s += 1.0L / static_cast<long double>(j);
    }
    return s;
}

// The grouped sum sum_{k<n} 1/(m ceil((k+1)/m)), evaluated term by term.
long double grouped_sum(std::uint64_t n, std::uint64_t m) {
    long double s = 0;
    for (std::uint64_t k = 0; k < n; k++) {
        std::uint64_t ceil = (k + 1 + m - 1) / m;
        s += 1.0L / static_cast<long double>(m * ceil);
    }
    return s;
}

// Fidelity of chi_n with the mapped state, summed block by block in long double.
long double fidelity_reference(const std::vector<double> &c2, const std::vector<std::uint64_t> &m, std::uint64_t n) {
    long double cn = harmonic_reference(n), f = 0;
    for (size_t i = 0; i < c2.size(); i++) {
        for (std::uint64_t k = 0; k < n; k++) {
            long double t = static_cast<long double>(k / m[i]);
            f += c2[i] / (cn * std::sqrt(static_cast<long double>(m[i]) * (k + 1) * (t + 1)));
        }
    }
    return f;
}

// I_{N,n} on the mapped state from its Schmidt-diagonal blocks: the reduced
// state on the system/ancilla pairs is a mixture over t = floor(k/m_i) of
// sum_s w_{s,t} |s>|s>, and every chain observable is diagonal in a basis
// built from the rotated pair and the remaining index-set vectors.
double INn_block_reference(const EmbezzleSpec &spec, int N, size_t p1, size_t p2) {
    auto set = spec.index_set();
    const size_t r = set.size();
    std::map<std::uint64_t, std::vector<double>> blocks;
    const double cn = harmonic_number(spec.n);
    for (size_t s = 0; s < r; s++) {
        auto [i, j] = set[s];
        for (std::uint64_t k = j; k < spec.n; k += spec.m[i]) {
            auto &w = blocks[k / spec.m[i]];
            w.resize(r, 0.0);
            w[s] = std::sqrt(spec.c2[i] / (cn * static_cast<double>(k + 1)));
        }
    }
    auto eig = [&](double theta) {
        std::vector<std::pair<double, std::vector<double>>> out;
        std::vector<double> minus(r, 0.0), plus(r, 0.0);
        minus[p1] = std::cos(theta / 2);
        minus[p2] = std::sin(theta / 2);
        plus[p1] = -std::sin(theta / 2);
        plus[p2] = std::cos(theta / 2);
        out.emplace_back(-1.0, minus);
        out.emplace_back(1.0, plus);
        for (size_t s = 0; s < r; s++) {
            if (s != p1 && s != p2) {
                std::vector<double> e(r, 0.0);
                e[s] = 1.0;
                out.emplace_back(100.0 + static_cast<double>(s), e);
            }
        }
        return out;
    };
    double total = 0;
    for (int b = 1; b < 2 * N; b += 2) {
        for (int a : {b - 1, b + 1}) {
            for (const auto &[x, u] : eig(a * kPi / (2 * N))) {
                for (const auto &[y, v] : eig(b * kPi / (2 * N))) {
                    if (x == y) {
                        continue;
                    }
                    for (const auto &[t, w] : blocks) {
                        double amp = 0;
                        for (size_t s = 0; s < r; s++) {
                            amp += w[s] * u[s] * v[s];
                        }
                        total += amp * amp;
                    }
                }
            }
        }
    }
    return total;
}

}  // namespace

TEST(harmonic, integer_agreement_up_to_ten_thousand) {
    const ZFunction z;
    long double s = 0;
    for (std::uint64_t y = 1; y <= 10000; y++) {
        s += 1.0L / static_cast<long double>(y);
        ASSERT_NEAR(z(static_cast<double>(y)), static_cast<double>(s), 1e-14) << "y=" << y;
    }
}

TEST(harmonic, asymptotic_branch_is_continuous) {
    EXPECT_NEAR(harmonic_number(100001), harmonic_number(100000) + 1.0 / 100001, 1e-14);
    EXPECT_NEAR(harmonic_number(200000), static_cast<double>(harmonic_reference(200000)), 1e-13);
}

TEST(z_function, grouped_sum_oracle) {
    const ZFunction z;
    for (std::uint64_t m = 1; m <= 7; m++) {
        for (std::uint64_t n = 1; n <= 500; n++) {
            double y = static_cast<double>(n) / static_cast<double>(m);
            ASSERT_NEAR(z(y), static_cast<double>(grouped_sum(n, m)), 1e-12) << "n=" << n << " m=" << m;
        }
    }
}

TEST(z_function, ceiling_variant_fails_the_oracle) {
    // The floor convention is the one the grouped sum confirms.
    auto z_ceil = [](double y) {
        double c = std::ceil(y);
        return static_cast<double>(harmonic_reference(static_cast<std::uint64_t>(c))) + (y - c) / (c + 1);
    };
    EXPECT_GT(std::abs(z_ceil(5.0 / 2) - static_cast<double>(grouped_sum(5, 2))), 1e-3);
}

TEST(z_function, logarithmic_bounds_on_a_log_grid) {
    const ZFunction z;
    for (double e = 0; e <= 6.0; e += 0.01) {
        double y = std::pow(10.0, e);
        double v = z(y);
        EXPECT_LE(std::log(y + 1), v + 1e-15) << y;
        EXPECT_LE(v, 1 + std::log(y) + 1e-15) << y;
    }
}

TEST(z_function, increments_below_log_increments) {
    const ZFunction z;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 5);
    for (int t = 0; t < 1000; t++) {
        double y1 = std::pow(10.0, u(rng)), y2 = std::pow(10.0, u(rng));
        if (y1 > y2) {
            std::swap(y1, y2);
        }
        EXPECT_LE(z(y2) - z(y1), std::log(y2) - std::log(y1) + 1e-13);
    }
}

TEST(tau, small_cases) {
    auto t1 = tau(1);
    ASSERT_EQ(t1.nnz(), 1u);
    EXPECT_NEAR(t1.amplitude({0, 0}).real(), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(harmonic_number(2), 1.5);
    auto t2 = tau(2);
    EXPECT_NEAR(t2.amplitude({0, 0}).real(), std::sqrt(2.0 / 3), 1e-15);
    EXPECT_NEAR(t2.amplitude({1, 1}).real(), std::sqrt(1.0 / 3), 1e-15);
    EXPECT_THROW(tau(0), PreconditionError);
}

TEST(tau, normalized_at_all_scales) {
    for (std::uint64_t n : {1ull, 10ull, 1000ull, 100000ull}) {
        auto t = tau(n);
        EXPECT_EQ(t.nnz(), n);
        EXPECT_NEAR(t.norm_squared(), 1.0, 1e-12);
    }
}

TEST(lcd, forced_values) {
    auto a = lcd({q("1/3"), q("2/3")}, false);
    EXPECT_EQ(a.r, 3u);
    EXPECT_EQ(a.m, (std::vector<std::uint64_t>{1, 2}));
    auto b = lcd({q("1/3"), q("2/3")}, true);
    EXPECT_EQ(b.r, 6u);
    EXPECT_EQ(b.m, (std::vector<std::uint64_t>{2, 4}));
    auto c = lcd({q("1/2"), q("1/2")}, true);
    EXPECT_EQ(c.r, 2u);
    EXPECT_EQ(c.m, (std::vector<std::uint64_t>{1, 1}));
    auto d = lcd({q("1/6"), q("1/3"), q("1/2")}, false);
    EXPECT_EQ(d.r, 6u);
    EXPECT_EQ(d.m, (std::vector<std::uint64_t>{1, 2, 3}));
}

TEST(lcd, rejects_bad_input) {
    EXPECT_THROW(lcd({q("1/3"), q("1/3")}, false), PreconditionError);
    EXPECT_THROW(lcd({q("0"), q("1")}, false), PreconditionError);
    EXPECT_THROW(parse_rational("0.5"), PreconditionError);
    EXPECT_THROW(parse_rational("1/0"), PreconditionError);
    EXPECT_EQ(parse_rational("-3/6"), Rational(-1, 2));
}

TEST(rational_approximants, exact_thirds) {
    auto a = rational_approximants({1.0 / 3, 2.0 / 3}, 3);
    EXPECT_EQ(a.numerators, (std::vector<std::int64_t>{2, 4}));
    EXPECT_EQ(a.c2[0], q("1/3"));
    EXPECT_EQ(a.c2[1], q("2/3"));
}

TEST(rational_approximants, halves_are_fixed_points) {
    for (std::uint64_t l : {1ull, 2ull, 7ull, 50ull}) {
        auto a = rational_approximants({0.5, 0.5}, l);
        EXPECT_EQ(a.c2[0], q("1/2"));
        EXPECT_EQ(a.c2[1], q("1/2"));
    }
}

TEST(rational_approximants, irrational_error_bound_and_exact_sum) {
    std::vector<double> c2{1 / kPi, 1 - 1 / kPi};
    for (std::uint64_t l = 1; l <= 200; l++) {
        auto a = rational_approximants(c2, l);
        EXPECT_EQ(a.c2[0] + a.c2[1], 1);
        for (size_t i = 0; i < 2; i++) {
            EXPECT_LE(std::abs(to_double(a.c2[i]) - c2[i]), 2.0 / (2.0 * l));
        }
    }
    auto a50 = rational_approximants(c2, 50);
    EXPECT_LE(std::abs(to_double(a50.c2[0]) - 1 / kPi), 1.0 / 50);
}

TEST(rational_approximants, below_l_min_reports_l_min) {
    std::vector<double> c2{0.02, 0.98};
    EXPECT_EQ(approximant_l_min(c2), 13u);
    try {
        rational_approximants(c2, 5);
        FAIL();
    } catch (const PreconditionError &e) {
        EXPECT_NE(std::string(e.what()).find("l_min=13"), std::string::npos) << e.what();
    }
}

TEST(embezzle_map, unit_numerators_are_identity) {
    auto map = embezzle_map(10, {1, 1}, Labels{}.a);
    for (Index k = 0; k < 10; k++) {
        for (Index i = 0; i < 2; i++) {
            Index from = map.acting().encode({k, 0, i});
            ASSERT_NE(map.find(from), nullptr);
            EXPECT_EQ(map.find(from)->target, from);
        }
    }
}

TEST(embezzle_map, splits_index) {
    auto map = embezzle_map(10, {2, 3}, Labels{}.a);
    const auto &reg = map.acting();
    EXPECT_EQ(reg.decode(map.find(reg.encode({5, 0, 0}))->target), (std::vector<Index>{2, 1, 0}));
    EXPECT_EQ(reg.decode(map.find(reg.encode({5, 0, 1}))->target), (std::vector<Index>{1, 2, 1}));
}

TEST(embezzle_map, injective_exhaustively) {
    auto map = embezzle_map(100, {1, 2, 3}, Labels{}.a);
    std::set<Index> images;
    for (Index k = 0; k < 100; k++) {
        for (Index i = 0; i < 3; i++) {
            images.insert(map.find(map.acting().encode({k, 0, i}))->target);
        }
    }
    EXPECT_EQ(images.size(), 300u);
    EXPECT_THROW(embezzle_map(2, {3, 1}, Labels{}.a), PreconditionError);
}

TEST(embezzle_map, mapped_state_support) {
    auto spec = EmbezzleSpec::exact({q("1/6"), q("1/3"), q("1/2")}, 200);
    auto s = mapped_state(spec);
    EXPECT_EQ(s.nnz(), 200u * 3);
    EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
    // Only the A side mapped: the ancilla on B must stay at zero.
    auto half = a_mapped_state(spec);
    auto pos = half.registry().position("B'");
    for (const auto &[k, a] : half.entries()) {
        EXPECT_EQ(half.registry().digit(k, pos), 0u);
    }
}

TEST(embezzle_map, domain_escape_is_reported) {
    auto spec = EmbezzleSpec::exact({q("1/3"), q("2/3")}, 10);
    auto map = embezzle_map(10, spec.m, Labels{}.a);
    auto psi = psi_state(spec);
    auto once = apply_structured_map(map, psi);
    EXPECT_THROW(apply_structured_map(map, once), DomainError);
}

TEST(target_states, chi_with_unit_numerators_is_tau_times_bell) {
    auto chi = chi_state(5, {0.5, 0.5}, {1, 1});
    const double cn = harmonic_number(5);
    EXPECT_EQ(chi.nnz(), 10u);
    for (Index t = 0; t < 5; t++) {
        for (Index i = 0; i < 2; i++) {
            EXPECT_NEAR(chi.amplitude({t, 0, i, t, 0, i}).real(), std::sqrt(0.5 / (cn * (t + 1))), 1e-15);
        }
    }
}

TEST(target_states, chi_support_is_n_times_r) {
    auto spec = EmbezzleSpec::exact({q("1/6"), q("1/3"), q("1/2")}, 50);
    EXPECT_EQ(chi_state(spec.n, spec.c2, spec.m).nnz(), 50u * spec.r);
    EXPECT_EQ(phi_state(spec.n, spec.r, spec.m).nnz(), 50u * spec.r);
}

TEST(target_states, chi_phi_fidelity_is_coefficient_overlap) {
    std::vector<double> c2{1 / kPi, 1 - 1 / kPi};
    for (std::uint64_t l : {3ull, 10ull, 50ull}) {
        auto spec = EmbezzleSpec::approximate(c2, l, 200);
        double expected = 0;
        std::vector<double> c2l;
        for (size_t i = 0; i < 2; i++) {
            c2l.push_back(to_double(spec.c2_rational[i]));
            expected += std::sqrt(c2l[i]) * std::sqrt(c2[i]);
        }
        auto chi = chi_state(spec.n, c2, spec.m);
        auto phi = phi_state(spec.n, spec.r, spec.m);
        EXPECT_NEAR(fidelity(chi, phi), expected, 1e-12);
        EXPECT_EQ(spec.r % 2, 0u);
    }
}

TEST(embezzlement_fidelity, trivial_numerators_give_one) {
    auto spec = EmbezzleSpec::exact({q("1/2"), q("1/2")}, 100);
    auto r = embezzlement_fidelity(spec);
    EXPECT_NEAR(r.computed, 1.0, 1e-12);
    EXPECT_NEAR(r.z_form, 1.0, 1e-12);
}

TEST(embezzlement_fidelity, thirds_against_block_sum) {
    auto spec = EmbezzleSpec::exact({q("1/3"), q("2/3")}, 1000);
    auto r = embezzlement_fidelity(spec);
    EXPECT_NEAR(r.computed, static_cast<double>(fidelity_reference(spec.c2, spec.m, 1000)), 1e-12);
    const ZFunction z;
    EXPECT_NEAR(r.z_form, (1.0 / 3) * z(1000) / z(1000) + (2.0 / 3) * z(500) / z(1000), 1e-14);
    EXPECT_GE(r.computed, r.z_form);
    EXPECT_LE(r.trace_distance, r.distance_bound);
}

TEST(embezzlement_fidelity, gap_to_one_shrinks_with_n) {
    for (auto c2 : {std::vector<Rational>{q("1/3"), q("2/3")}, std::vector<Rational>{q("1/6"), q("1/3"), q("1/2")}}) {
        double previous = 1;
        for (std::uint64_t n : {100ull, 1000ull, 10000ull}) {
            auto r = embezzlement_fidelity(EmbezzleSpec::exact(c2, n));
            EXPECT_LT(1 - r.computed, previous);
            previous = 1 - r.computed;
        }
    }
}

TEST(embezzlement_fidelity, distance_bound_over_a_grid) {
    for (std::uint64_t n : {8ull, 30ull, 100ull, 700ull, 3000ull}) {
        for (const char *f : {"1/3", "1/4", "1/5", "1/7"}) {
            Rational a = q(f);
            auto spec = EmbezzleSpec::exact({a, 1 - a}, n);
            if (n <= spec.m_max()) {
                continue;
            }
            auto r = embezzlement_fidelity(spec);
            EXPECT_LE(r.trace_distance, r.distance_bound + 1e-12) << n << " " << f;
            EXPECT_NEAR(r.computed, static_cast<double>(fidelity_reference(spec.c2, spec.m, n)), 1e-12);
        }
    }
    EXPECT_THROW(embezzlement_fidelity(EmbezzleSpec::exact({q("1/3"), q("2/3")}, 2)), PreconditionError);
}

TEST(correlation_measure_INn, trivial_embezzlement_reduces_to_bell_chain) {
    auto spec = EmbezzleSpec::exact({q("1/2"), q("1/2")}, 50);
    for (int N : {1, 2, 4, 8}) {
        auto r = correlation_measure_INn(spec, N, {0, 0}, {1, 0});
        EXPECT_NEAR(r.mapped.value, chain::closed_form_IN(N), 1e-12);
        EXPECT_NEAR(r.chi.value, chain::closed_form_IN(N), 1e-12);
        EXPECT_NEAR(r.trace_distance, 0.0, 1e-7);
    }
}

TEST(correlation_measure_INn, thirds_within_trace_distance_bound) {
    auto spec = EmbezzleSpec::exact({q("1/3"), q("2/3")}, 2000);
    auto r = correlation_measure_INn(spec, 2, {0, 0}, {1, 0});
    EXPECT_TRUE(r.within_bound) << r.gap << " vs " << r.bound;
    EXPECT_NEAR(r.chi.value, r.chi_closed_form, 1e-12);
    for (const auto &t : r.chi.terms) {
        EXPECT_NEAR(t.disagreement, (2.0 / 3) * std::pow(std::sin(kPi / 8), 2), 1e-12);
    }
}

TEST(correlation_measure_INn, matches_block_reference) {
    auto spec = EmbezzleSpec::exact({q("1/6"), q("1/3"), q("1/2")}, 120);
    auto set = spec.index_set();
    for (int N : {1, 3}) {
        for (auto [p1, p2] : {std::pair<size_t, size_t>{0, 1}, {1, 5}, {4, 2}}) {
            auto r = correlation_measure_INn(spec, N, set[p1], set[p2]);
            EXPECT_NEAR(r.mapped.value, INn_block_reference(spec, N, p1, p2), 1e-12);
            EXPECT_TRUE(r.within_bound);
        }
    }
}

TEST(correlation_measure_INn, pair_outside_index_set_is_rejected) {
    auto spec = EmbezzleSpec::exact({q("1/3"), q("2/3")}, 10);
    EXPECT_THROW(correlation_measure_INn(spec, 2, {0, 1}, {1, 0}), PreconditionError);
    EXPECT_THROW(correlation_measure_INn(spec, 2, {1, 0}, {1, 0}), PreconditionError);
}

TEST(correlation_measure_IJlNnl, phi_pairs_equal_sine_squared) {
    auto spec = EmbezzleSpec::approximate({1.0 / 3, 2.0 / 3}, 3, 100);
    ASSERT_EQ(spec.r, 6u);
    for (int N : {2, 4}) {
        auto r = correlation_measure_IJlNnl(spec, N, canonical_pairing(spec));
        for (const auto &t : r.phi.terms) {
            EXPECT_NEAR(t.disagreement, r.phi_pair_closed_form, 1e-12);
        }
    }
}

TEST(correlation_measure_IJlNnl, two_level_halves_reduce_to_bell_chain) {
    auto spec = EmbezzleSpec::approximate({0.5, 0.5}, 1, 30);
    ASSERT_EQ(spec.r, 2u);
    for (int N : {1, 2, 5}) {
        auto r = correlation_measure_IJlNnl(spec, N, canonical_pairing(spec));
        EXPECT_NEAR(r.mapped.value, chain::closed_form_IN(N), 1e-12);
    }
}

TEST(correlation_measure_IJlNnl, thirds_within_combined_bound) {
    auto spec = EmbezzleSpec::approximate({1.0 / 3, 2.0 / 3}, 3, 2000);
    auto r = correlation_measure_IJlNnl(spec, 2, canonical_pairing(spec));
    EXPECT_TRUE(r.within_bound) << r.gap << " vs " << r.bound;
    EXPECT_NEAR(r.approximation_distance, 0.0, 1e-7);
}

TEST(correlation_measure_IJlNnl, pairing_errors) {
    auto spec = EmbezzleSpec::approximate({1.0 / 3, 2.0 / 3}, 3, 50);
    auto p = canonical_pairing(spec);
    auto short_half = p;
    short_half.half.pop_back();
    short_half.image.pop_back();
    EXPECT_THROW(correlation_measure_IJlNnl(spec, 2, short_half), PreconditionError);
    auto not_bijective = p;
    not_bijective.image[1] = not_bijective.image[0];
    EXPECT_THROW(correlation_measure_IJlNnl(spec, 2, not_bijective), PreconditionError);
}
