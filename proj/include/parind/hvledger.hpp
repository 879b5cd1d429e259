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

// Finite-precision triviality ledgers: how close to quantum every point of a
// model must be, given chain values computed at finite (N, n, l).

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "parind/embezzle.hpp"
#include "parind/halfsum.hpp"
#include "parind/hvaudit.hpp"

namespace parind::hv {

namespace detail {

/// Observable with one branch per basis vector of `indices` (eigenvalue = position) and a closing branch.
inline Observable indexed_basis_observable(const SystemRegistry &acting, const std::vector<Index> &indices,
                                           std::string name) {
    std::vector<Branch> b;
    for (size_t s = 0; s < indices.size(); s++) {
        b.push_back({static_cast<double>(s), RankedProjector::basis(acting, {indices[s]})});
    }
    return Observable(close_branches(std::move(b), -1.0), std::move(name));
}

/// Per-point probabilities of the first `count` branches of a single-party scenario.
inline std::vector<std::vector<double>> point_probabilities(const HVModel &model, const LambdaSpace &space,
                                                            const Scenario &s, size_t count) {
    std::vector<std::vector<double>> out;
    for (size_t l = 0; l < space.size(); l++) {
        auto d = checked_distribution(model, s, l);
        out.emplace_back(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(count));
    }
    return out;
}

/// Integrated |Pr([i] on the second system) - target_i| for each i.
inline std::vector<double> system_deviations(const HVModel &model, const LambdaSpace &space,
                                             std::shared_ptr<const SparseState> state, const std::string &system,
                                             const std::vector<double> &target) {
    auto acting = state->registry().restrict_to({system});
    std::vector<Index> idx;
    for (Index i = 0; i < acting.total_dimension(); i++) {
        idx.push_back(i);
    }
    auto s = make_scenario("system:" + system, state, {{system, {system}}},
                           {indexed_basis_observable(acting, idx, "[i]^" + system)});
    auto p = point_probabilities(model, space, s, idx.size());
    std::vector<double> dev(target.size(), 0.0);
    for (size_t l = 0; l < space.size(); l++) {
        for (size_t i = 0; i < target.size(); i++) {
            dev[i] += space.weights[l] * std::abs(p[l][i] - target[i]);
        }
    }
    return dev;
}

}  // namespace detail

struct RationalLedgerEntry {
    int N = 0;
    std::uint64_t n = 0;
    std::uint64_t r = 0;
    /// Chain value on the mapped state for each unordered pair of index vectors.
    std::vector<double> pair_values;
    /// Largest chain value: every pair of index vectors has integrated probability gap below it.
    double eps = 0;
    double chi_value = 0;
    double trace_distance = 0;
    /// Integrated |Pr([i]^B) - m_i/r| per i, measured on the model.
    std::vector<double> deviations;
    /// m_i eps.
    std::vector<double> bounds;
    bool holds = false;
};

/// Exact-coefficient ledger: chain values for every pair of index vectors bound the model's
/// deviation from m_i/r on the second system.
inline RationalLedgerEntry rational_ledger(const HVModel &model, const embezzle::EmbezzleSpec &spec, int N) {
    spec.validate();
    if (!spec.exact_rationals) {
        throw PreconditionError("rational ledger needs exact coefficients");
    }
    const auto space = model.lambda_space();
    space.validate();
    RationalLedgerEntry e;
    e.N = N;
    e.n = spec.n;
    e.r = spec.r;
    const embezzle::Labels labels;
    auto mapped = std::make_shared<const SparseState>(embezzle::mapped_state(spec, labels));
    auto chi = embezzle::chi_state(spec.n, spec.c2, spec.m, labels);
    e.trace_distance = trace_distance_pure(*mapped, chi);
    const auto set = spec.index_set();
    for (size_t p = 0; p < set.size(); p++) {
        for (size_t q = p + 1; q < set.size(); q++) {
            auto fam = embezzle::build_INn_chain(spec, N, set[p], set[q], labels);
            double v = chain::evaluate_chain(*mapped, fam).value;
            e.pair_values.push_back(v);
            e.eps = std::max(e.eps, v);
            if (p == 0 && q == 1) {
                e.chi_value = chain::evaluate_chain(chi, fam).value;
            }
        }
    }
    std::vector<double> target;
    for (size_t i = 0; i < spec.d(); i++) {
        target.push_back(static_cast<double>(spec.m[i]) / static_cast<double>(spec.r));
    }
    e.deviations = detail::system_deviations(model, space, mapped, labels.b.system, target);
    e.holds = true;
    for (size_t i = 0; i < spec.d(); i++) {
        e.bounds.push_back(static_cast<double>(spec.m[i]) * e.eps);
        e.holds = e.holds && e.deviations[i] < e.bounds[i];
    }
    return e;
}

struct ArbitraryLedgerEntry {
    int N = 0;
    std::uint64_t l = 0;
    std::uint64_t n = 0;
    std::uint64_t r = 0;
    /// 2N sin^2(pi/4N): the chain value on the uniform target state, the same for every half set.
    double phi_value = 0;
    double embezzle_distance = 0;
    double approximation_distance = 0;
    /// phi_value + 2N (embezzle_distance + approximation_distance): bounds the chain value of every half set.
    double certified_I = 0;
    /// max_i |c_{i,l}^2 - c_i^2|.
    double approximation_error = 0;
    /// max(certified_I / 2, approximation_error).
    double eps = 0;
    /// Chain value of the canonical half set on the mapped state, and the eps it alone would give.
    double canonical_I = 0;
    double canonical_eps = 0;
    /// Integrated |Pr([i]^B) - c_i^2| per i, measured on the model, against 3 eps.
    std::vector<double> deviations;
    double final_bound = 0;
    /// Half-subset step on the model's index-vector probabilities, one entry per system index.
    std::vector<halfsum::SubsetBound> lemma;
    bool lemma_hypothesis_enumerated = false;
    bool lemma_passed = false;
    bool holds = false;
};

/// Arbitrary-coefficient ledger at (N, l, n).
inline ArbitraryLedgerEntry arbitrary_ledger(const HVModel &model, const embezzle::EmbezzleSpec &spec, int N) {
    spec.validate();
    if (spec.l == 0) {
        throw PreconditionError("arbitrary ledger needs an approximate instance");
    }
    const auto space = model.lambda_space();
    space.validate();
    ArbitraryLedgerEntry e;
    e.N = N;
    e.l = spec.l;
    e.n = spec.n;
    e.r = spec.r;
    const embezzle::Labels labels;
    auto rep = embezzle::correlation_measure_IJlNnl(spec, N, embezzle::canonical_pairing(spec), labels);
    e.phi_value = rep.phi.closed_form;
    e.embezzle_distance = rep.embezzle_distance;
    e.approximation_distance = rep.approximation_distance;
    e.certified_I = e.phi_value + rep.bound;
    e.canonical_I = rep.mapped.value;
    for (size_t i = 0; i < spec.d(); i++) {
        e.approximation_error = std::max(e.approximation_error, std::abs(to_double(spec.c2_rational[i]) - spec.c2[i]));
    }
    e.eps = std::max(e.certified_I / 2, e.approximation_error);
    e.canonical_eps = std::max(e.canonical_I / 2, e.approximation_error);
    e.final_bound = 3 * e.eps;

    auto mapped = std::make_shared<const SparseState>(embezzle::mapped_state(spec, labels));
    e.deviations = detail::system_deviations(model, space, mapped, labels.b.system, spec.c2);

    // Half-subset step: per-point probabilities of the index vectors on the first side.
    auto acting = embezzle::acting_space(spec, labels.a);
    const auto set = spec.index_set();
    std::vector<Index> idx;
    for (const auto &p : set) {
        idx.push_back(embezzle::pair_index(spec, p));
    }
    auto s = make_scenario("index-set", mapped, {{"A", {labels.a.system, labels.a.ancilla}}},
                           {detail::indexed_basis_observable(acting, idx, "E")});
    auto p = detail::point_probabilities(model, space, s, idx.size());
    halfsum::WeightedSequenceFamily fam;
    for (size_t l = 0; l < space.size(); l++) {
        if (space.weights[l] == 0) {
            continue;
        }
        std::vector<Rational> seq;
        Rational total = 0;
        for (double v : p[l]) {
            seq.emplace_back(std::clamp(v, 0.0, 1.0));
            total += seq.back();
        }
        if (total == 0) {
            throw ModelError(model.name() + " puts no weight on the index vectors");
        }
        for (auto &v : seq) {
            v /= total;
        }
        fam.sequences.push_back(std::move(seq));
        fam.weights.emplace_back(space.weights[l]);
    }
    Rational wsum = 0;
    for (const auto &w : fam.weights) {
        wsum += w;
    }
    for (auto &w : fam.weights) {
        w /= wsum;
    }
    std::vector<halfsum::Subset> js;
    size_t offset = 0;
    for (size_t i = 0; i < spec.d(); i++) {
        halfsum::Subset j;
        for (std::uint64_t k = 0; k < spec.m[i]; k++) {
            j.push_back(offset + k);
        }
        offset += spec.m[i];
        js.push_back(std::move(j));
    }
    constexpr size_t kEnumerateUpTo = 12;
    e.lemma_hypothesis_enumerated = spec.r <= kEnumerateUpTo;
    auto lemma = halfsum::lemma_bound_check(fam, Rational(e.eps), js, !e.lemma_hypothesis_enumerated);
    e.lemma = lemma.subsets;
    e.lemma_passed = lemma.passed();

    e.holds = e.lemma_passed;
    for (double d : e.deviations) {
        e.holds = e.holds && d < e.final_bound;
    }
    return e;
}

/// Born weight of E_(i,j) on the first side with the second system outside [i], summed over j.
inline double pc1_mismatch(const embezzle::EmbezzleSpec &spec, const SparseState &mapped, Index i,
                           const embezzle::Labels &labels = {}) {
    auto acting = embezzle::acting_space(spec, labels.a);
    auto bsys = mapped.registry().restrict_to({labels.b.system});
    auto not_i = RankedProjector::basis(bsys, {i}).complement();
    double total = 0;
    for (Index j = 0; j < spec.m.at(i); j++) {
        auto e = RankedProjector::basis(acting, {embezzle::pair_index(spec, {i, j})});
        total += joint_probability(mapped, {e, not_i});
    }
    return total;
}

}  // namespace parind::hv
