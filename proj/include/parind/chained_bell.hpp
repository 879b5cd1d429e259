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

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "parind/qcore.hpp"

namespace parind::chain {

/// Assigns an eigenvalue to a spectator basis vector of the acting space.
using EigenvalueScheme = std::function<double(const SystemRegistry &acting, Index basis)>;

/// Spectator |i> gets eigenvalue i + 2 (flat index of the acting space).
inline EigenvalueScheme index_plus_two() {
    return [](const SystemRegistry &, Index i) { return static_cast<double>(i) + 2.0; };
}

/// Spectator |i, j> gets 2^i 3^j + 2, reading i and j as the first two digits.
inline EigenvalueScheme power_of_two_three() {
    return [](const SystemRegistry &acting, Index flat) {
        auto d = acting.decode(flat);
        double i = d.empty() ? 0.0 : static_cast<double>(d[0]);
        double j = d.size() < 2 ? 0.0 : static_cast<double>(d[1]);
        return std::pow(2.0, i) * std::pow(3.0, j) + 2.0;
    };
}

/// Eigenvalue of the closing branch when spectators do not cover the acting space.
inline constexpr double kClosingEigenvalue = 0.0;

struct ChainSpec {
    int N = 1;
    /// Basis indices rotated into each other.
    Index j = 0;
    Index k = 1;
    EigenvalueScheme scheme = index_plus_two();
    /// Basis indices carrying their own spectator branch; all remaining ones when unset.
    std::optional<std::vector<Index>> spectators;

    std::vector<int> a_indices() const {
        std::vector<int> out;
        for (int a = 0; a <= 2 * N; a += 2) {
            out.push_back(a);
        }
        return out;
    }

    std::vector<int> b_indices() const {
        std::vector<int> out;
        for (int b = 1; b < 2 * N; b += 2) {
            out.push_back(b);
        }
        return out;
    }

    double angle(int index) const { return index * std::numbers::pi / (2.0 * N); }
};

/// Orthonormal basis of an acting space; empty means the computational basis.
using Frame = std::vector<SparseState>;

inline SparseState frame_vector(const Frame &frame, const SystemRegistry &acting, Index i) {
    if (frame.empty()) {
        return SparseState::basis(acting, i);
    }
    return frame.at(i);
}

/// cos(theta/2)|j> + sin(theta/2)|k>.
inline SparseState theta_ket(double theta, Index j, Index k, const SystemRegistry &acting, const Frame &frame = {}) {
    if (j == k) {
        throw PreconditionError("rotated basis indices must differ");
    }
    if (j >= acting.total_dimension() || k >= acting.total_dimension()) {
        throw PreconditionError("rotated basis index outside the acting space");
    }
    SparseVector vj = frame_vector(frame, acting, j);
    SparseVector vk = frame_vector(frame, acting, k);
    return SparseState(vj.scaled(std::cos(theta / 2)).plus(vk, std::sin(theta / 2)));
}

/// -1 [theta] + 1 [theta + pi] plus spectator branches.
inline Observable o_theta(double theta, const ChainSpec &spec, const SystemRegistry &acting, const Frame &frame = {},
                          std::string name = {}) {
    std::vector<Branch> branches;
    branches.push_back({-1.0, RankedProjector(acting, {theta_ket(theta, spec.j, spec.k, acting, frame)})});
    branches.push_back(
        {1.0, RankedProjector(acting, {theta_ket(theta + std::numbers::pi, spec.j, spec.k, acting, frame)})});
    std::vector<Index> spectators;
    if (spec.spectators) {
        spectators = *spec.spectators;
    } else {
        for (Index i = 0; i < acting.total_dimension(); i++) {
            spectators.push_back(i);
        }
    }
    for (Index i : spectators) {
        if (i == spec.j || i == spec.k) {
            continue;
        }
        double e = spec.scheme(acting, i);
        if (e == 1.0 || e == -1.0 || e == kClosingEigenvalue) {
            throw PreconditionError("spectator eigenvalue collides with a reserved value");
        }
        branches.push_back({e, RankedProjector(acting, {frame_vector(frame, acting, i)})});
    }
    return Observable(close_branches(std::move(branches), kClosingEigenvalue), std::move(name), theta);
}

/// The observables A_{N,a} (a even) and B_{N,b} (b odd) of one chain.
struct ChainFamily {
    int N = 1;
    std::vector<Observable> a;  ///< a[i] is A_{N,2i}
    std::vector<Observable> b;  ///< b[i] is B_{N,2i+1}

    const Observable &A(int index) const { return a.at(static_cast<size_t>(index / 2)); }
    const Observable &B(int index) const { return b.at(static_cast<size_t>(index / 2)); }

    /// Neighbouring (a, b) pairs, |a - b| = 1, in chain order.
    std::vector<std::pair<int, int>> pairs() const {
        std::vector<std::pair<int, int>> out;
        for (int bi = 1; bi < 2 * N; bi += 2) {
            out.emplace_back(bi - 1, bi);
            out.emplace_back(bi + 1, bi);
        }
        return out;
    }
};

/// Builds a chain; A_{N,2N} is the genuine observable at angle pi and must be A_{N,0} with flipped signs.
inline ChainFamily build_chain(const ChainSpec &spec, const SystemRegistry &a_acting, const SystemRegistry &b_acting,
                               const Frame &a_frame = {}, const Frame &b_frame = {}) {
    if (spec.N < 1) {
        throw PreconditionError("chain length N must be positive");
    }
    ChainFamily f;
    f.N = spec.N;
    for (int a : spec.a_indices()) {
        f.a.push_back(o_theta(spec.angle(a), spec, a_acting, a_frame, "A_" + std::to_string(a)));
    }
    for (int b : spec.b_indices()) {
        f.b.push_back(o_theta(spec.angle(b), spec, b_acting, b_frame, "B_" + std::to_string(b)));
    }
    if (!f.a.back().is_flip_of(f.a.front())) {
        throw ConsistencyError("A_{N,2N} is not A_{N,0} with flipped eigenvalues");
    }
    return f;
}

/// Pr(X != Y): sum of joint probabilities over unequal eigenvalue pairs.
inline double disagreement(const SparseState &state, const Observable &x, const Observable &y) {
    auto dist = joint_distribution(state, {x, y});
    double p = 0;
    for (size_t i = 0; i < x.size(); i++) {
        for (size_t j = 0; j < y.size(); j++) {
            if (x[i].eigenvalue != y[j].eigenvalue) {
                p += dist[i * y.size() + j];
            }
        }
    }
    return p;
}

/// Pr(X = value); zero when no branch carries the value.
inline double outcome_probability(const SparseState &state, const Observable &x, double value) {
    auto i = x.find(value);
    return i ? born_probability(state, x[*i].projector) : 0.0;
}

struct PairTerm {
    int a = 0;
    int b = 0;
    double disagreement = 0;
};

struct ChainReport {
    int N = 0;
    std::vector<PairTerm> terms;
    double value = 0;
    double closed_form = std::nan("");
    double bound = std::nan("");
    /// |Pr(A_0 = 1) - Pr(A_2N = 1)|, the left end of the triangle chain.
    double endpoint_gap = 0;
};

/// Sums the neighbouring disagreement probabilities of a chain on a state.
inline ChainReport evaluate_chain(const SparseState &state, const ChainFamily &family) {
    ChainReport r;
    r.N = family.N;
    for (auto [a, b] : family.pairs()) {
        double p = disagreement(state, family.A(a), family.B(b));
        r.terms.push_back({a, b, p});
        r.value += p;
    }
    r.endpoint_gap =
        std::abs(outcome_probability(state, family.A(0), 1.0) - outcome_probability(state, family.A(2 * family.N), 1.0));
    return r;
}

inline double closed_form_IN(int N) {
    double s = std::sin(std::numbers::pi / (4.0 * N));
    return 2.0 * N * s * s;
}

inline double bound_IN(int N) { return std::numbers::pi * std::numbers::pi / (8.0 * N); }

/// I_N of a two-sided chain. Closed form and bound refer to the Bell state.
inline ChainReport correlation_measure_IN(const SparseState &state, const ChainSpec &spec,
                                          const std::vector<std::string> &a_labels,
                                          const std::vector<std::string> &b_labels, const Frame &a_frame = {},
                                          const Frame &b_frame = {}) {
    const auto &reg = state.registry();
    auto fam = build_chain(spec, reg.restrict_to(a_labels), reg.restrict_to(b_labels), a_frame, b_frame);
    auto r = evaluate_chain(state, fam);
    r.closed_form = closed_form_IN(spec.N);
    r.bound = bound_IN(spec.N);
    return r;
}

/// I'_N on a Schmidt-form state over single subsystems `a` and `b` with c_j = c_k.
inline ChainReport correlation_measure_IN_prime(const SparseState &state, const ChainSpec &spec, const std::string &a,
                                                const std::string &b) {
    const auto &reg = state.registry();
    const size_t pa = reg.position(a);
    const size_t pb = reg.position(b);
    auto diag = [&](Index i) {
        std::vector<Index> d(reg.size(), 0);
        d[pa] = i;
        d[pb] = i;
        return std::abs(state.amplitude(reg.encode(d)));
    };
    const double cj = diag(spec.j);
    const double ck = diag(spec.k);
    if (std::abs(cj - ck) > tolerances().norm) {
        throw PreconditionError("Schmidt coefficients of the rotated pair differ: " + std::to_string(cj) + " vs " +
                                std::to_string(ck));
    }
    auto fam = build_chain(spec, reg.restrict_to({a}), reg.restrict_to({b}));
    auto r = evaluate_chain(state, fam);
    double s = std::sin(std::numbers::pi / (4.0 * spec.N));
    r.closed_form = 4.0 * spec.N * cj * cj * s * s;
    r.bound = std::numbers::pi * std::numbers::pi * cj * cj / (4.0 * spec.N);
    return r;
}

}  // namespace parind::chain
