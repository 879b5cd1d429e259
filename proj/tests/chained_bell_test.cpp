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

#include "parind/chained_bell.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <numeric>
#include <random>

#include "support/dense_oracle.hpp"

using namespace parind;
using namespace parind::chain;
using parind::testing::Mat;
using parind::testing::Vec;

namespace {

constexpr double kPi = std::numbers::pi;

// Brute-force chain value on sum_i c_i |ii>: every observable is diagonalized
// by hand into rank-one eigenvectors, and each unequal eigenvalue pair
// contributes |<u (x) v|psi>|^2.
double dense_chain(const std::vector<double> &c2, int N, size_t j, size_t k) {
    const auto d = static_cast<Eigen::Index>(c2.size());
    Vec psi = Vec::Zero(d * d);
    for (Eigen::Index i = 0; i < d; i++) {
        psi(i * d + i) = std::sqrt(c2[static_cast<size_t>(i)]);
    }
    auto eig = [&](double theta) {
        std::vector<std::pair<double, Vec>> out;
        Vec minus = Vec::Zero(d), plus = Vec::Zero(d);
        minus(static_cast<Eigen::Index>(j)) = std::cos(theta / 2);
        minus(static_cast<Eigen::Index>(k)) = std::sin(theta / 2);
        plus(static_cast<Eigen::Index>(j)) = -std::sin(theta / 2);
        plus(static_cast<Eigen::Index>(k)) = std::cos(theta / 2);
        out.emplace_back(-1.0, minus);
        out.emplace_back(1.0, plus);
        for (Eigen::Index i = 0; i < d; i++) {
            if (static_cast<size_t>(i) != j && static_cast<size_t>(i) != k) {
                out.emplace_back(static_cast<double>(i) + 2.0, Vec::Unit(d, i));
            }
        }
        return out;
    };
    double total = 0;
    for (int b = 1; b < 2 * N; b += 2) {
        for (int a : {b - 1, b + 1}) {
            auto ea = eig(a * kPi / (2 * N));
            auto eb = eig(b * kPi / (2 * N));
            for (const auto &[x, u] : ea) {
                for (const auto &[y, v] : eb) {
                    if (x == y) {
                        continue;
                    }
                    Vec uv = Vec::Zero(d * d);
                    for (Eigen::Index p = 0; p < d; p++) {
                        for (Eigen::Index q = 0; q < d; q++) {
                            uv(p * d + q) = u(p) * v(q);
                        }
                    }
                    total += std::norm(uv.dot(psi));
                }
            }
        }
    }
    return total;
}

}  // namespace

TEST(theta_ket, special_angles) {
    SystemRegistry q{{"A", 2}};
    EXPECT_EQ(theta_ket(0, 0, 1, q).entries(), SparseState::basis(q, 0).entries());
    auto pi = theta_ket(kPi, 0, 1, q);
    EXPECT_NEAR(std::abs(pi.amplitude(1)), 1.0, 1e-15);
    EXPECT_LT(std::abs(pi.amplitude(0)), 1e-15);
    auto half = theta_ket(kPi / 2, 0, 1, q);
    EXPECT_NEAR(half.amplitude(0).real(), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(half.amplitude(1).real(), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_THROW(theta_ket(0, 1, 1, q), PreconditionError);
}

TEST(theta_ket, antipodal_angle_is_orthogonal) {
    SystemRegistry q{{"A", 5}};
    for (double t = 0; t < 2 * kPi; t += 0.1) {
        EXPECT_NEAR(std::abs(theta_ket(t, 1, 3, q).inner(theta_ket(t + kPi, 1, 3, q))), 0.0, 1e-15);
    }
}

TEST(o_theta, qubit_at_zero) {
    SystemRegistry q{{"A", 2}};
    ChainSpec spec;
    auto o = o_theta(0, spec, q);
    ASSERT_EQ(o.size(), 2u);
    EXPECT_EQ(o[0].eigenvalue, -1.0);
    EXPECT_NEAR(std::abs(o[0].projector.kets()[0].amplitude(0)), 1.0, 1e-15);
    EXPECT_EQ(o[1].eigenvalue, 1.0);
    EXPECT_NEAR(std::abs(o[1].projector.kets()[0].amplitude(1)), 1.0, 1e-15);
}

TEST(o_theta, qutrit_spectator_branch) {
    SystemRegistry q{{"A", 3}};
    auto o = o_theta(0.3, ChainSpec{}, q);
    ASSERT_EQ(o.size(), 3u);
    EXPECT_EQ(o[2].eigenvalue, 4.0);
    EXPECT_EQ(o[2].projector.kets()[0].entries(), SparseState::basis(q, 2).entries());
}

TEST(o_theta, duplicate_spectator_eigenvalues_are_rejected) {
    ChainSpec spec;
    spec.scheme = [](const SystemRegistry &, Index) { return 7.0; };
    EXPECT_THROW(o_theta(0, spec, SystemRegistry{{"A", 4}}), PreconditionError);
    spec.scheme = [](const SystemRegistry &, Index) { return 1.0; };
    EXPECT_THROW(o_theta(0, spec, SystemRegistry{{"A", 3}}), PreconditionError);
}

TEST(o_theta, branch_probabilities_sum_to_one) {
    std::mt19937_64 rng(3);
    SystemRegistry reg{{"A", 4}, {"B", 2}};
    for (int t = 0; t < 50; t++) {
        auto s = parind::testing::random_state(rng, reg);
        auto o = o_theta(0.1 * t, ChainSpec{.j = 3, .k = 1}, reg.restrict_to({"A"}));
        double total = 0;
        for (const auto &b : o.branches()) {
            total += born_probability(s, b.projector);
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(o_theta, restricted_spectators_get_a_closing_branch) {
    ChainSpec spec;
    spec.spectators = std::vector<Index>{2};
    auto o = o_theta(0.0, spec, SystemRegistry{{"A", 5}});
    ASSERT_EQ(o.size(), 4u);
    EXPECT_EQ(o[3].eigenvalue, kClosingEigenvalue);
    EXPECT_TRUE(o[3].projector.complemented());
    EXPECT_EQ(o[3].projector.rank(), 2u);
}

TEST(correlation_measure_IN, bell_single_pair) {
    auto r = correlation_measure_IN(bell_state(), ChainSpec{.N = 1}, {"A"}, {"B"});
    EXPECT_NEAR(r.value, 1.0, 1e-12);
    EXPECT_EQ(r.terms.size(), 2u);
}

TEST(correlation_measure_IN, bell_four) {
    auto r = correlation_measure_IN(bell_state(), ChainSpec{.N = 4}, {"A"}, {"B"});
    EXPECT_NEAR(r.value, 8 * std::pow(std::sin(kPi / 16), 2), 1e-12);
    EXPECT_NEAR(r.value, 0.3045, 1e-4);
    EXPECT_LE(r.value, kPi * kPi / 32);
    for (const auto &t : r.terms) {
        EXPECT_NEAR(t.disagreement, 2 * 0.5 * std::pow(std::sin(kPi / 16), 2), 1e-12);
    }
}

TEST(correlation_measure_IN, closed_form_and_bound_up_to_64) {
    for (int N = 1; N <= 64; N++) {
        auto r = correlation_measure_IN(bell_state(), ChainSpec{.N = N}, {"A"}, {"B"});
        EXPECT_NEAR(r.value, r.closed_form, 1e-12) << "N=" << N;
        EXPECT_NEAR(r.value, dense_chain({0.5, 0.5}, N, 0, 1), 1e-12) << "N=" << N;
        EXPECT_LE(r.value, r.bound) << "N=" << N;
        EXPECT_LE(r.endpoint_gap, r.value + 1e-12);
        double sum = 0;
        for (const auto &t : r.terms) {
            EXPECT_GE(t.disagreement, 0.0);
            EXPECT_LE(t.disagreement, 1.0);
            sum += t.disagreement;
        }
        EXPECT_DOUBLE_EQ(sum, r.value);
    }
}

TEST(correlation_measure_IN, endpoint_observables_flip) {
    auto fam = build_chain(ChainSpec{.N = 3}, SystemRegistry{{"A", 3}}, SystemRegistry{{"B", 3}});
    EXPECT_TRUE(fam.A(6).is_flip_of(fam.A(0)));
    EXPECT_FALSE(fam.A(2).is_flip_of(fam.A(0)));
    EXPECT_EQ(fam.pairs().size(), 6u);
}

TEST(correlation_measure_IN, simultaneous_basis_rotation_is_invisible) {
    std::mt19937_64 rng(43);
    SystemRegistry qa{{"A", 2}}, qb{{"B", 2}};
    for (int trial = 0; trial < 20; trial++) {
        Mat u = parind::testing::random_unitary(rng, 2);
        Frame fa, fb;
        for (Eigen::Index c = 0; c < 2; c++) {
            std::vector<cplx> ca{u(0, c), u(1, c)};
            std::vector<cplx> cb{std::conj(u(0, c)), std::conj(u(1, c))};
            fa.push_back(SparseState::from_dense(qa, ca));
            fb.push_back(SparseState::from_dense(qb, cb));
        }
        int N = 1 + trial % 6;
        auto rotated = correlation_measure_IN(bell_state(), ChainSpec{.N = N}, {"A"}, {"B"}, fa, fb);
        auto plain = correlation_measure_IN(bell_state(), ChainSpec{.N = N}, {"A"}, {"B"});
        EXPECT_NEAR(rotated.value, plain.value, 1e-12);
    }
}

TEST(correlation_measure_IN_prime, uniform_four_level) {
    auto r = correlation_measure_IN_prime(schmidt_state({0.25, 0.25, 0.25, 0.25}), ChainSpec{.N = 2}, "A", "B");
    EXPECT_NEAR(r.value, 8 * 0.25 * std::pow(std::sin(kPi / 8), 2), 1e-12);
    EXPECT_NEAR(r.value, 0.2929, 1e-4);
}

TEST(correlation_measure_IN_prime, qutrit_with_unequal_spectator) {
    auto r = correlation_measure_IN_prime(schmidt_state({0.25, 0.25, 0.5}), ChainSpec{.N = 1}, "A", "B");
    EXPECT_NEAR(r.value, 0.5, 1e-12);
    EXPECT_NEAR(r.closed_form, 0.5, 1e-12);
}

TEST(correlation_measure_IN_prime, matches_brute_force_and_bound) {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 30; trial++) {
        size_t d = 3 + trial % 2;
        std::vector<double> c2(d);
        for (auto &x : c2) {
            x = u(rng);
        }
        size_t j = trial % d, k = (trial + 1) % d;
        c2[k] = c2[j];
        double s = std::accumulate(c2.begin(), c2.end(), 0.0);
        for (auto &x : c2) {
            x /= s;
        }
        int N = 1 << (trial % 4);
        auto r = correlation_measure_IN_prime(schmidt_state(c2), ChainSpec{.N = N, .j = j, .k = k}, "A", "B");
        EXPECT_NEAR(r.value, dense_chain(c2, N, j, k), 1e-12);
        EXPECT_NEAR(r.value, r.closed_form, 1e-12);
        EXPECT_LE(r.value, r.bound);
        EXPECT_GE(r.value, 0.0);
    }
}

TEST(correlation_measure_IN_prime, unequal_pair_is_rejected) {
    EXPECT_THROW(correlation_measure_IN_prime(schmidt_state({0.2, 0.3, 0.5}), ChainSpec{.N = 1}, "A", "B"),
                 PreconditionError);
}
