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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "parind/chained_bell.hpp"
#include "parind/qcore.hpp"
#include "parind/rational.hpp"

namespace parind::embezzle {

/// H_k = sum_{j=1}^{k} 1/j.
inline double harmonic_number(std::uint64_t k) {
    if (k <= 100000) {
        // Neumaier summation, smallest terms first.
        double sum = 0, comp = 0;
        for (std::uint64_t j = k; j >= 1; j--) {
            double x = 1.0 / static_cast<double>(j);
            double t = sum + x;
            comp += std::abs(sum) >= x ? (sum - t) + x : (x - t) + sum;
            sum = t;
        }
        return sum + comp;
    }
    const double x = static_cast<double>(k);
    const double x2 = x * x;
    return std::log(x) + std::numbers::egamma + 1 / (2 * x) - 1 / (12 * x2) + 1 / (120 * x2 * x2) -
           1 / (252 * x2 * x2 * x2);
}

/// Piecewise-linear interpolation of the harmonic numbers:
/// Z(y) = H_{floor y} + (y - floor y) / (floor y + 1).
struct ZFunction {
    double operator()(double y) const {
        if (!(y >= 0)) {
            throw PreconditionError("Z is defined for y >= 0");
        }
        const double f = std::floor(y);
        return harmonic_number(static_cast<std::uint64_t>(f)) + (y - f) / (f + 1);
    }
};

struct SideLabels {
    std::string outer;    ///< embezzling register
    std::string ancilla;  ///< receives the extracted index
    std::string system;   ///< carries the Schmidt index
};

struct Labels {
    SideLabels a{"A''", "A'", "A"};
    SideLabels b{"B''", "B'", "B"};
};

/// (1/sqrt C_n) sum_{j<n} (j+1)^{-1/2} |j>|j>.
inline SparseState tau(std::uint64_t n, const std::string &a = "A''", const std::string &b = "B''") {
    if (n < 1) {
        throw PreconditionError("embezzling state needs n >= 1");
    }
    const double cn = harmonic_number(n);
    SystemRegistry reg{{a, n}, {b, n}};
    std::vector<Amplitude> e;
    e.reserve(n);
    for (std::uint64_t j = 0; j < n; j++) {
        e.emplace_back(j * n + j, 1.0 / std::sqrt(cn * static_cast<double>(j + 1)));
    }
    return SparseState(std::move(reg), std::move(e));
}

struct LcdResult {
    std::uint64_t r = 0;
    std::vector<std::uint64_t> m;
};

/// Least common denominator of positive fractions summing to one, optionally
/// also a multiple of 2; m_i = r * fraction_i.
inline LcdResult lcd(const std::vector<Rational> &fractions, bool include_half) {
    if (fractions.empty()) {
        throw PreconditionError("no fractions given");
    }
    Rational total = 0;
    Integer r = include_half ? 2 : 1;
    for (const auto &f : fractions) {
        if (f <= 0) {
            throw PreconditionError("fraction " + to_string(f) + " is not positive");
        }
        total += f;
        Integer den = boost::multiprecision::denominator(f);
        r = r / boost::multiprecision::gcd(r, den) * den;
    }
    if (total != 1) {
        throw PreconditionError("fractions sum to " + to_string(total) + ", not 1");
    }
    if (r > std::numeric_limits<std::uint32_t>::max()) {
        throw PreconditionError("common denominator " + r.str() + " is too large");
    }
    LcdResult out;
    out.r = r.convert_to<std::uint64_t>();
    for (const auto &f : fractions) {
        Rational m = f * Rational(r);
        out.m.push_back(boost::multiprecision::numerator(m).convert_to<std::uint64_t>());
    }
    return out;
}

struct Approximants {
    std::uint64_t l = 0;
    /// m_{i,l}; c_{i,l}^2 = numerators[i] / (2l).
    std::vector<std::int64_t> numerators;
    std::vector<Rational> c2;
};

namespace detail {

inline std::vector<std::int64_t> rounded_numerators(const std::vector<double> &c2, std::uint64_t l) {
    std::vector<std::int64_t> m;
    std::int64_t used = 0;
    for (size_t i = 0; i + 1 < c2.size(); i++) {
        m.push_back(std::llround(2.0 * static_cast<double>(l) * c2[i]));
        used += m.back();
    }
    m.push_back(static_cast<std::int64_t>(2 * l) - used);
    return m;
}

inline void check_squared_coefficients(const std::vector<double> &c2) {
    if (c2.empty()) {
        throw PreconditionError("no coefficients given");
    }
    double total = 0;
    for (double x : c2) {
        if (!(x > 0)) {
            throw PreconditionError("squared Schmidt coefficients must be positive");
        }
        total += x;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw PreconditionError("squared Schmidt coefficients sum to " + std::to_string(total));
    }
}

}  // namespace detail

/// Smallest l at which every rounded numerator is positive.
inline std::uint64_t approximant_l_min(const std::vector<double> &c2) {
    detail::check_squared_coefficients(c2);
    for (std::uint64_t l = 1; l < (1ull << 32); l = l < 1024 ? l + 1 : l + l / 1024) {
        auto m = detail::rounded_numerators(c2, l);
        if (std::all_of(m.begin(), m.end(), [](std::int64_t x) { return x >= 1; })) {
            // Walk back over the coarse steps.
            while (l > 1) {
                auto prev = detail::rounded_numerators(c2, l - 1);
                if (!std::all_of(prev.begin(), prev.end(), [](std::int64_t x) { return x >= 1; })) {
                    break;
                }
                l--;
            }
            return l;
        }
    }
    throw PreconditionError("coefficients too small for rational approximation");
}

/// Fixed-denominator rounding: c_{i,l}^2 = round(2l c_i^2)/(2l), last entry takes the remainder.
inline Approximants rational_approximants(const std::vector<double> &c2, std::uint64_t l) {
    const std::uint64_t lmin = approximant_l_min(c2);
    if (l < lmin) {
        throw PreconditionError("approximation index l=" + std::to_string(l) + " is below l_min=" +
                                std::to_string(lmin));
    }
    Approximants a;
    a.l = l;
    a.numerators = detail::rounded_numerators(c2, l);
    const double bound = static_cast<double>(c2.size()) / (2.0 * static_cast<double>(l));
    for (size_t i = 0; i < c2.size(); i++) {
        a.c2.emplace_back(Integer(a.numerators[i]), Integer(2 * l));
        if (std::abs(to_double(a.c2.back()) - c2[i]) > bound + 1e-15) {
            throw ConsistencyError("approximant error exceeds d/(2l)");
        }
    }
    return a;
}

/// Schmidt data and precision of one embezzlement instance.
struct EmbezzleSpec {
    /// True squared Schmidt coefficients of the system state.
    std::vector<double> c2;
    /// Exact squared coefficients when the instance is rational.
    std::optional<std::vector<Rational>> exact_rationals;
    /// Approximation index; 0 for exact instances.
    std::uint64_t l = 0;
    /// Rational squares used for the denominator: exact values or approximants.
    std::vector<Rational> c2_rational;
    std::uint64_t r = 0;
    std::vector<std::uint64_t> m;
    std::uint64_t n = 1;
    bool even_denominator = false;

    size_t d() const { return c2.size(); }
    std::uint64_t m_max() const { return *std::max_element(m.begin(), m.end()); }
    double c(size_t i) const { return std::sqrt(c2[i]); }

    /// Basis vectors (i, j), j < m_i, of the system-ancilla space, in lexicographic order.
    std::vector<std::pair<Index, Index>> index_set() const {
        std::vector<std::pair<Index, Index>> out;
        for (size_t i = 0; i < m.size(); i++) {
            for (Index j = 0; j < m[i]; j++) {
                out.emplace_back(i, j);
            }
        }
        return out;
    }

    void validate() const {
        if (c2.size() != c2_rational.size() || c2.size() != m.size()) {
            throw PreconditionError("inconsistent coefficient counts");
        }
        std::uint64_t total = 0;
        Rational sum = 0;
        for (size_t i = 0; i < m.size(); i++) {
            if (Rational(Integer(m[i])) != Rational(Integer(r)) * c2_rational[i]) {
                throw PreconditionError("m_i != r c_i^2 at i=" + std::to_string(i));
            }
            total += m[i];
            sum += c2_rational[i];
        }
        if (total != r || sum != 1) {
            throw PreconditionError("numerators do not sum to the denominator");
        }
        if (even_denominator && r % 2 != 0) {
            throw PreconditionError("denominator must be even");
        }
        if (n < m_max()) {
            throw PreconditionError("precision n=" + std::to_string(n) + " below max m_i=" + std::to_string(m_max()));
        }
    }

    /// Exact instance: c_i^2 are the given fractions.
    static EmbezzleSpec exact(const std::vector<Rational> &fractions, std::uint64_t n, bool include_half = false) {
        EmbezzleSpec s;
        auto [r, m] = lcd(fractions, include_half);
        for (const auto &f : fractions) {
            s.c2.push_back(to_double(f));
        }
        s.exact_rationals = fractions;
        s.c2_rational = fractions;
        s.r = r;
        s.m = m;
        s.n = n;
        s.even_denominator = include_half;
        s.validate();
        return s;
    }

    /// Approximate instance: rational approximants at index l, least even common denominator.
    static EmbezzleSpec approximate(const std::vector<double> &c2, std::uint64_t l, std::uint64_t n) {
        EmbezzleSpec s;
        auto a = rational_approximants(c2, l);
        auto [r, m] = lcd(a.c2, true);
        s.c2 = c2;
        s.l = l;
        s.c2_rational = a.c2;
        s.r = r;
        s.m = m;
        s.n = n;
        s.even_denominator = true;
        s.validate();
        return s;
    }
};

/// Registry [outer, ancilla, system, outer, ancilla, system] for A then B.
inline SystemRegistry state_registry(std::uint64_t n, std::uint64_t ancilla_dim, std::uint64_t d,
                                     const Labels &labels = {}) {
    return SystemRegistry{{labels.a.outer, n},     {labels.a.ancilla, ancilla_dim}, {labels.a.system, d},
                          {labels.b.outer, n},     {labels.b.ancilla, ancilla_dim}, {labels.b.system, d}};
}

/// |tau_n> |0>|0> sum_i c_i |i>|i>, before any map.
inline SparseState psi_state(const EmbezzleSpec &spec, const Labels &labels = {}) {
    const std::uint64_t n = spec.n, d = spec.d(), ma = spec.m_max();
    SystemRegistry reg = state_registry(n, ma, d, labels);
    const double cn = harmonic_number(n);
    std::vector<Amplitude> e;
    e.reserve(n * d);
    for (std::uint64_t k = 0; k < n; k++) {
        for (std::uint64_t i = 0; i < d; i++) {
            e.emplace_back(reg.encode({k, 0, i, k, 0, i}), spec.c(i) / std::sqrt(cn * static_cast<double>(k + 1)));
        }
    }
    return SparseState(std::move(reg), std::move(e));
}

/// |k>|0>|i> -> |floor(k/m_i)>|k mod m_i>|i> for k < n, i < d.
inline StructuredMap embezzle_map(std::uint64_t n, const std::vector<std::uint64_t> &m, const SideLabels &side,
                                  std::uint64_t ancilla_dim = 0) {
    if (m.empty()) {
        throw PreconditionError("no numerators given");
    }
    const std::uint64_t mmax = *std::max_element(m.begin(), m.end());
    if (ancilla_dim == 0) {
        ancilla_dim = mmax;
    }
    if (ancilla_dim < mmax) {
        throw PreconditionError("ancilla dimension below max m_i");
    }
    if (n < mmax) {
        throw PreconditionError("precision n=" + std::to_string(n) + " below max m_i=" + std::to_string(mmax));
    }
    SystemRegistry acting{{side.outer, n}, {side.ancilla, ancilla_dim}, {side.system, m.size()}};
    std::vector<std::tuple<Index, Index, cplx>> table;
    table.reserve(n * m.size());
    for (std::uint64_t k = 0; k < n; k++) {
        for (std::uint64_t i = 0; i < m.size(); i++) {
            if (m[i] == 0) {
                throw PreconditionError("numerator m_i must be positive");
            }
            table.emplace_back(acting.encode({k, 0, i}), acting.encode({k / m[i], k % m[i], i}), 1.0);
        }
    }
    return StructuredMap(acting, table);
}

/// (U_A (x) U_B) Psi_n.
inline SparseState mapped_state(const EmbezzleSpec &spec, const Labels &labels = {}) {
    auto psi = psi_state(spec, labels);
    auto ua = embezzle_map(spec.n, spec.m, labels.a, spec.m_max());
    auto ub = embezzle_map(spec.n, spec.m, labels.b, spec.m_max());
    return apply_structured_map(ub, apply_structured_map(ua, psi));
}

/// Psi_n with only the A-side map applied.
inline SparseState a_mapped_state(const EmbezzleSpec &spec, const Labels &labels = {}) {
    return apply_structured_map(embezzle_map(spec.n, spec.m, labels.a, spec.m_max()), psi_state(spec, labels));
}

/// Psi_n with only the B-side map applied.
inline SparseState b_mapped_state(const EmbezzleSpec &spec, const Labels &labels = {}) {
    return apply_structured_map(embezzle_map(spec.n, spec.m, labels.b, spec.m_max()), psi_state(spec, labels));
}

namespace detail {

inline SparseState target_state(std::uint64_t n, const std::vector<double> &weights, const std::vector<std::uint64_t> &m,
                                const Labels &labels) {
    const std::uint64_t d = m.size();
    const std::uint64_t ma = *std::max_element(m.begin(), m.end());
    SystemRegistry reg = state_registry(n, ma, d, labels);
    const double cn = harmonic_number(n);
    std::vector<Amplitude> e;
    for (std::uint64_t t = 0; t < n; t++) {
        const double tt = 1.0 / std::sqrt(cn * static_cast<double>(t + 1));
        for (std::uint64_t i = 0; i < d; i++) {
            for (std::uint64_t j = 0; j < m[i]; j++) {
                e.emplace_back(reg.encode({t, j, i, t, j, i}), tt * weights[i]);
            }
        }
    }
    return SparseState(std::move(reg), std::move(e));
}

}  // namespace detail

/// tau_n (x) sum_{i, j<m_i} (c_i / sqrt m_i) |ij>|ij>.
inline SparseState chi_state(std::uint64_t n, const std::vector<double> &c2, const std::vector<std::uint64_t> &m,
                             const Labels &labels = {}) {
    if (c2.size() != m.size()) {
        throw PreconditionError("coefficient and numerator counts differ");
    }
    std::vector<double> w;
    for (size_t i = 0; i < c2.size(); i++) {
        w.push_back(std::sqrt(c2[i] / static_cast<double>(m[i])));
    }
    return detail::target_state(n, w, m, labels);
}

/// tau_n (x) sum_{i, j<m_i} r^{-1/2} |ij>|ij>.
inline SparseState phi_state(std::uint64_t n, std::uint64_t r, const std::vector<std::uint64_t> &m,
                             const Labels &labels = {}) {
    if (std::accumulate(m.begin(), m.end(), std::uint64_t{0}) != r) {
        throw PreconditionError("numerators do not sum to r");
    }
    return detail::target_state(n, std::vector<double>(m.size(), 1.0 / std::sqrt(static_cast<double>(r))), m, labels);
}

struct FidelityReport {
    /// |<chi_n | U (x) U Psi_n>| from the sparse states.
    double computed = 0;
    /// sum_i c_i^2 / C_n sum_{k<n} 1 / sqrt(m_i (k+1)(floor(k/m_i)+1)).
    double exact_sum = 0;
    /// sum_i c_i^2 Z(n/m_i) / Z(n); a lower bound on the fidelity.
    double z_form = 0;
    double trace_distance = 0;
    /// sqrt(1 - (1 - ln m / ln n)^2) with m = max m_i.
    double distance_bound = 0;
};

/// Closed-form fields of a FidelityReport (exact sum, Z form, distance bound); the state-based fields stay zero.
inline FidelityReport fidelity_closed_forms(const EmbezzleSpec &spec) {
    spec.validate();
    if (spec.n <= spec.m_max()) {
        throw PreconditionError("fidelity needs n > max m_i");
    }
    FidelityReport r;
    const double cn = harmonic_number(spec.n);
    const ZFunction z;
    const double zn = z(static_cast<double>(spec.n));
    for (size_t i = 0; i < spec.d(); i++) {
        const double mi = static_cast<double>(spec.m[i]);
        double s = 0;
        for (std::uint64_t k = 0; k < spec.n; k++) {
            s += 1.0 / std::sqrt(mi * static_cast<double>(k + 1) * static_cast<double>(k / spec.m[i] + 1));
        }
        r.exact_sum += spec.c2[i] * s / cn;
        r.z_form += spec.c2[i] * z(static_cast<double>(spec.n) / mi) / zn;
    }
    const double ratio = 1.0 - std::log(static_cast<double>(spec.m_max())) / std::log(static_cast<double>(spec.n));
    r.distance_bound = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
    return r;
}

/// Fidelity between the target and the mapped embezzling state, with its closed forms; no checks.
inline FidelityReport measure_fidelity(const EmbezzleSpec &spec, const Labels &labels = {}) {
    auto r = fidelity_closed_forms(spec);
    auto mapped = mapped_state(spec, labels);
    auto chi = chi_state(spec.n, spec.c2, spec.m, labels);
    r.computed = fidelity(chi, mapped);
    r.trace_distance = trace_distance_pure(chi, mapped);
    return r;
}

/// measure_fidelity, raising ConsistencyError when a closed form or the distance bound disagrees.
inline FidelityReport embezzlement_fidelity(const EmbezzleSpec &spec, const Labels &labels = {}) {
    auto r = measure_fidelity(spec, labels);
    const double tol = tolerances().probability;
    if (std::abs(r.computed - r.exact_sum) > tol) {
        throw ConsistencyError("direct fidelity " + std::to_string(r.computed) + " disagrees with closed form " +
                               std::to_string(r.exact_sum));
    }
    if (r.computed < r.z_form - tol) {
        throw ConsistencyError("direct fidelity falls below the Z lower bound");
    }
    if (1.0 - r.computed * r.computed > r.distance_bound * r.distance_bound + tol) {
        throw ConsistencyError("trace distance exceeds sqrt(1 - (1 - ln m / ln n)^2)");
    }
    return r;
}

/// Flat index of (i, j) on the [system, ancilla] acting space.
inline Index pair_index(const EmbezzleSpec &spec, std::pair<Index, Index> ij) {
    return ij.first * spec.m_max() + ij.second;
}

inline SystemRegistry acting_space(const EmbezzleSpec &spec, const SideLabels &side) {
    return SystemRegistry{{side.system, spec.d()}, {side.ancilla, spec.m_max()}};
}

/// Chain on [system, ancilla] rotating (i1,j1) into (i2,j2), spectators 2^i 3^j + 2 on the index set.
inline chain::ChainFamily build_INn_chain(const EmbezzleSpec &spec, int N, std::pair<Index, Index> p1,
                                          std::pair<Index, Index> p2, const Labels &labels = {}) {
    auto set = spec.index_set();
    auto in_set = [&](std::pair<Index, Index> p) { return std::find(set.begin(), set.end(), p) != set.end(); };
    if (!in_set(p1) || !in_set(p2) || p1 == p2) {
        throw PreconditionError("chain pair must be two distinct elements of the index set");
    }
    chain::ChainSpec cs;
    cs.N = N;
    cs.j = pair_index(spec, p1);
    cs.k = pair_index(spec, p2);
    cs.scheme = chain::power_of_two_three();
    std::vector<Index> spectators;
    for (const auto &p : set) {
        spectators.push_back(pair_index(spec, p));
    }
    cs.spectators = spectators;
    return chain::build_chain(cs, acting_space(spec, labels.a), acting_space(spec, labels.b));
}

struct INnReport {
    chain::ChainReport mapped;
    chain::ChainReport chi;
    /// 2N (2/r) sin^2(pi/4N); NaN unless c_i^2 = m_i / r exactly.
    double chi_closed_form = std::nan("");
    double trace_distance = 0;
    /// 2N D(U (x) U Psi_n, chi_n).
    double bound = 0;
    double gap = 0;
    bool within_bound = false;
};

inline INnReport correlation_measure_INn(const EmbezzleSpec &spec, int N, std::pair<Index, Index> p1,
                                         std::pair<Index, Index> p2, const Labels &labels = {}) {
    spec.validate();
    auto fam = build_INn_chain(spec, N, p1, p2, labels);
    auto mapped = mapped_state(spec, labels);
    auto chi = chi_state(spec.n, spec.c2, spec.m, labels);
    INnReport r;
    r.mapped = evaluate_chain(mapped, fam);
    r.chi = evaluate_chain(chi, fam);
    if (spec.exact_rationals) {
        const double s = std::sin(std::numbers::pi / (4.0 * N));
        r.chi_closed_form = 2.0 * N * (2.0 / static_cast<double>(spec.r)) * s * s;
    }
    r.trace_distance = trace_distance_pure(mapped, chi);
    r.bound = 2.0 * N * r.trace_distance;
    r.gap = std::abs(r.mapped.value - r.chi.value);
    r.within_bound = r.gap <= r.bound + tolerances().probability;
    return r;
}

/// A half of the index set together with a bijection onto the other half.
struct HalfPairing {
    std::vector<std::pair<Index, Index>> half;
    std::vector<std::pair<Index, Index>> image;  ///< image[s] pairs with half[s]
};

/// First r/2 elements of the lexicographic index set, paired in order with the rest.
inline HalfPairing canonical_pairing(const EmbezzleSpec &spec) {
    auto set = spec.index_set();
    HalfPairing p;
    const size_t h = set.size() / 2;
    p.half.assign(set.begin(), set.begin() + static_cast<std::ptrdiff_t>(h));
    p.image.assign(set.begin() + static_cast<std::ptrdiff_t>(h), set.end());
    return p;
}

inline void validate_pairing(const EmbezzleSpec &spec, const HalfPairing &p) {
    auto set = spec.index_set();
    if (p.half.size() * 2 != spec.r || p.image.size() != p.half.size()) {
        throw PreconditionError("half set must have r/2 = " + std::to_string(spec.r / 2) + " elements");
    }
    std::set<std::pair<Index, Index>> seen;
    for (const auto &x : p.half) {
        if (std::find(set.begin(), set.end(), x) == set.end() || !seen.insert(x).second) {
            throw PreconditionError("half set is not a subset of the index set");
        }
    }
    for (const auto &x : p.image) {
        if (std::find(set.begin(), set.end(), x) == set.end() || !seen.insert(x).second) {
            throw PreconditionError("pairing is not a bijection onto the complement of the half set");
        }
    }
}

/// +1 on span{cos(t/2)|s> + sin(t/2)|p(s)>}, -1 on the complement.
inline Observable half_observable(const EmbezzleSpec &spec, const HalfPairing &p, double theta,
                                  const SystemRegistry &acting, std::string name) {
    std::vector<SparseState> kets;
    for (size_t s = 0; s < p.half.size(); s++) {
        kets.push_back(chain::theta_ket(theta, pair_index(spec, p.half[s]), pair_index(spec, p.image[s]), acting));
    }
    std::vector<Branch> b{{1.0, RankedProjector(acting, std::move(kets))}};
    return Observable(close_branches(std::move(b), -1.0), std::move(name), theta);
}

/// Chain of half-rank observables; A_{2N} is defined as A_0 with flipped signs.
inline chain::ChainFamily build_IJl_chain(const EmbezzleSpec &spec, int N, const HalfPairing &p,
                                          const Labels &labels = {}) {
    validate_pairing(spec, p);
    if (N < 1) {
        throw PreconditionError("chain length N must be positive");
    }
    chain::ChainFamily f;
    f.N = N;
    auto aa = acting_space(spec, labels.a);
    auto bb = acting_space(spec, labels.b);
    const double step = std::numbers::pi / (2.0 * N);
    for (int a = 0; a < 2 * N; a += 2) {
        f.a.push_back(half_observable(spec, p, a * step, aa, "A_" + std::to_string(a)));
    }
    f.a.push_back(f.a.front().flipped("A_" + std::to_string(2 * N), std::numbers::pi));
    for (int b = 1; b < 2 * N; b += 2) {
        f.b.push_back(half_observable(spec, p, b * step, bb, "B_" + std::to_string(b)));
    }
    return f;
}

struct IJlReport {
    chain::ChainReport mapped;
    chain::ChainReport phi;
    /// sin^2(pi/4N), the per-pair value on Phi.
    double phi_pair_closed_form = 0;
    /// D(U (x) U Psi_n, chi_{n,l}).
    double embezzle_distance = 0;
    /// D(chi_{n,l}, Phi_{n,l}).
    double approximation_distance = 0;
    /// 2N (D_embezzle + D_approximation).
    double bound = 0;
    double gap = 0;
    bool within_bound = false;
};

inline IJlReport correlation_measure_IJlNnl(const EmbezzleSpec &spec, int N, const HalfPairing &p,
                                            const Labels &labels = {}) {
    spec.validate();
    auto fam = build_IJl_chain(spec, N, p, labels);
    auto mapped = mapped_state(spec, labels);
    auto chi = chi_state(spec.n, spec.c2, spec.m, labels);
    auto phi = phi_state(spec.n, spec.r, spec.m, labels);
    IJlReport r;
    r.mapped = evaluate_chain(mapped, fam);
    r.phi = evaluate_chain(phi, fam);
    const double s = std::sin(std::numbers::pi / (4.0 * N));
    r.phi_pair_closed_form = s * s;
    r.mapped.closed_form = r.phi.closed_form = 2.0 * N * s * s;
    r.embezzle_distance = trace_distance_pure(mapped, chi);
    r.approximation_distance = trace_distance_pure(chi, phi);
    r.bound = 2.0 * N * (r.embezzle_distance + r.approximation_distance);
    r.gap = std::abs(r.mapped.value - 2.0 * N * s * s);
    r.within_bound = r.gap <= r.bound + tolerances().probability;
    return r;
}

}  // namespace parind::embezzle
