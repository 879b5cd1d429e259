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

// Half-subset sums: any subset sum of r numbers written as a signed
// combination of half-size subset sums, and the averaged bound that follows.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "parind/rational.hpp"

namespace parind::halfsum {

using Subset = std::vector<size_t>;

inline std::string subset_string(const Subset &s) {
    std::string out = "{";
    for (size_t i = 0; i < s.size(); i++) {
        out += (i ? "," : "") + std::to_string(s[i]);
    }
    return out + "}";
}

struct HalfSubsetSystem {
    size_t r = 0;
    Subset J;
    /// Enumeration of the complement of J.
    std::vector<size_t> f;
    size_t x = 0;
    std::vector<Subset> K;
    std::vector<Subset> L;

    size_t half() const { return r / 2; }
};

namespace detail {

inline Subset normalized_subset(size_t r, Subset s) {
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
        throw PreconditionError("repeated index in " + subset_string(s));
    }
    if (!s.empty() && s.back() >= r) {
        throw PreconditionError("index " + std::to_string(s.back()) + " outside 0.." + std::to_string(r - 1));
    }
    return s;
}

inline void require_even(size_t r) {
    if (r == 0 || r % 2 != 0) {
        throw PreconditionError("r must be even and positive, got " + std::to_string(r));
    }
}

inline Subset complement_of(size_t r, const Subset &s) {
    Subset out;
    for (size_t i = 0, j = 0; i < r; i++) {
        if (j < s.size() && s[j] == i) {
            j++;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

}  // namespace detail

/// Builds the K- and L-windows for J (#J <= r/2). `order` enumerates the complement; ascending when empty.
inline HalfSubsetSystem build_system(size_t r, Subset J, std::vector<size_t> order = {}) {
    detail::require_even(r);
    HalfSubsetSystem s;
    s.r = r;
    s.J = detail::normalized_subset(r, std::move(J));
    if (s.J.size() > r / 2) {
        throw PreconditionError("#J=" + std::to_string(s.J.size()) + " exceeds r/2; use the complement");
    }
    auto rest = detail::complement_of(r, s.J);
    if (order.empty()) {
        s.f = rest;
    } else {
        auto sorted = order;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != rest) {
            throw PreconditionError("order does not enumerate the complement of " + subset_string(s.J));
        }
        s.f = std::move(order);
    }
    const size_t h = r / 2;
    const size_t w = r - s.J.size();
    s.x = h - s.J.size();
    for (size_t a = 0; a < h; a++) {
        Subset k = s.J;
        for (size_t t = 0; t < s.x; t++) {
            k.push_back(s.f[(a * s.x + t) % w]);
        }
        std::sort(k.begin(), k.end());
        s.K.push_back(std::move(k));
    }
    for (size_t b = 0; b < s.x; b++) {
        Subset l;
        for (size_t t = 0; t < h; t++) {
            l.push_back(s.f[(b * h + t) % w]);
        }
        std::sort(l.begin(), l.end());
        s.L.push_back(std::move(l));
    }
    for (const auto *family : {&s.K, &s.L}) {
        for (const auto &set : *family) {
            if (set.size() != h || std::adjacent_find(set.begin(), set.end()) != set.end()) {
                throw ConsistencyError("window " + subset_string(set) + " is not a half-size set");
            }
        }
    }
    return s;
}

inline Rational subset_sum(const std::vector<Rational> &p, const Subset &s) {
    Rational total = 0;
    for (size_t i : s) {
        total += p.at(i);
    }
    return total;
}

struct IdentityResult {
    bool holds = false;
    Rational lhs;
    Rational rhs;
    std::string detail;
};

/// Sum over J against (sum_a R_a - sum_b T_b) / (r/2), exactly.
inline IdentityResult identity_check(const HalfSubsetSystem &s, const std::vector<Rational> &p) {
    if (p.size() != s.r) {
        throw PreconditionError("sequence length " + std::to_string(p.size()) + " != r=" + std::to_string(s.r));
    }
    IdentityResult out;
    out.lhs = subset_sum(p, s.J);
    Rational combo = 0;
    for (const auto &k : s.K) {
        combo += subset_sum(p, k);
    }
    for (const auto &l : s.L) {
        combo -= subset_sum(p, l);
    }
    out.rhs = combo / Rational(Integer(s.half()));
    out.holds = out.lhs == out.rhs;
    if (!out.holds) {
        out.detail = "J=" + subset_string(s.J) + ": lhs " + to_string(out.lhs) + " != rhs " + to_string(out.rhs);
    }
    return out;
}

/// Any J: direct system when #J <= r/2, otherwise total minus the complement's identity.
inline IdentityResult subset_identity(size_t r, const Subset &J, const std::vector<Rational> &p) {
    detail::require_even(r);
    auto j = detail::normalized_subset(r, J);
    if (j.size() <= r / 2) {
        return identity_check(build_system(r, j), p);
    }
    auto c = identity_check(build_system(r, detail::complement_of(r, j)), p);
    Rational total = subset_sum(p, detail::complement_of(r, {}));
    IdentityResult out;
    out.lhs = subset_sum(p, j);
    out.rhs = total - c.rhs;
    out.holds = c.holds && out.lhs == out.rhs;
    if (!out.holds) {
        out.detail = "J=" + subset_string(j) + " via complement: " +
                     (c.holds ? to_string(out.lhs) + " != " + to_string(out.rhs) : c.detail);
    }
    return out;
}

/// (r - #J)/(r/2) for 0 < #J <= r/2; the complement's coefficient above r/2; 0 for the empty and full sets.
inline Rational bound_coefficient(size_t r, size_t j_size) {
    detail::require_even(r);
    if (j_size > r) {
        throw PreconditionError("#J exceeds r");
    }
    if (j_size == 0 || j_size == r) {
        return 0;
    }
    size_t effective = j_size <= r / 2 ? j_size : r - j_size;
    return Rational(Integer(r - effective), Integer(r / 2));
}

struct WeightedSequenceFamily {
    std::vector<Rational> weights;
    std::vector<std::vector<Rational>> sequences;

    size_t r() const { return sequences.empty() ? 0 : sequences.front().size(); }

    void validate() const {
        if (weights.size() != sequences.size() || weights.empty()) {
            throw PreconditionError("one sequence per weight required");
        }
        Rational total = 0;
        for (size_t k = 0; k < weights.size(); k++) {
            if (weights[k] < 0) {
                throw PreconditionError("negative weight at point " + std::to_string(k));
            }
            total += weights[k];
            if (sequences[k].size() != r()) {
                throw PreconditionError("sequence " + std::to_string(k) + " has a different length");
            }
            for (const auto &v : sequences[k]) {
                if (v < 0 || v > 1) {
                    throw PreconditionError("sequence " + std::to_string(k) + " has an entry outside [0,1]");
                }
            }
        }
        if (total != 1) {
            throw PreconditionError("weights sum to " + to_string(total));
        }
    }

    /// Weighted average of |sum_S p - target| over points with positive weight.
    Rational average_deviation(const Subset &s, const Rational &target) const {
        Rational out = 0;
        for (size_t k = 0; k < weights.size(); k++) {
            if (weights[k] == 0) {
                continue;
            }
            Rational d = subset_sum(sequences[k], s) - target;
            out += weights[k] * (d < 0 ? Rational(-d) : d);
        }
        return out;
    }

    bool sums_to_one() const {
        for (size_t k = 0; k < weights.size(); k++) {
            if (weights[k] != 0 && subset_sum(sequences[k], detail::complement_of(r(), {})) != 1) {
                return false;
            }
        }
        return true;
    }
};

struct SubsetBound {
    Subset J;
    Rational deviation;    ///< averaged |sum_J p - #J/r|
    Rational coefficient;  ///< bound_coefficient(r, #J)
    Rational bound;        ///< coefficient * eps
    bool covered = true;   ///< false when #J > r/2 and the sequences do not sum to one
    bool holds = false;    ///< deviation < 2 eps and deviation <= coefficient * achieved half-set eps
};

struct LemmaReport {
    size_t r = 0;
    Rational eps;
    bool hypothesis_checked = false;
    bool hypothesis_holds = false;
    /// Largest averaged |sum_I p - 1/2| over half-size I, when enumerated.
    Rational achieved_half_eps;
    std::optional<Subset> violating_half;
    std::vector<SubsetBound> subsets;

    bool passed() const {
        if (hypothesis_checked && !hypothesis_holds) {
            return false;
        }
        return std::all_of(subsets.begin(), subsets.end(), [](const SubsetBound &b) { return b.holds; });
    }
};

inline constexpr size_t kMaxEnumeratedR = 20;

namespace detail {

template <typename F>
void for_each_subset_of_size(size_t r, size_t k, F &&f) {
    Subset s(k);
    for (size_t i = 0; i < k; i++) {
        s[i] = i;
    }
    while (true) {
        f(s);
        size_t i = k;
        while (i > 0 && s[i - 1] == r - k + i - 1) {
            i--;
        }
        if (i == 0) {
            return;
        }
        s[i - 1]++;
        for (size_t j = i; j < k; j++) {
            s[j] = s[j - 1] + 1;
        }
    }
}

}  // namespace detail

/// Every subset of 0..r-1, grouped by size.
inline std::vector<Subset> all_subsets(size_t r) {
    if (r > kMaxEnumeratedR) {
        throw PreconditionError("subset enumeration limited to r <= " + std::to_string(kMaxEnumeratedR));
    }
    std::vector<Subset> out;
    for (size_t k = 0; k <= r; k++) {
        detail::for_each_subset_of_size(r, k, [&](const Subset &s) { out.push_back(s); });
    }
    return out;
}

/// Checks the half-set hypothesis at eps (enumerated when r <= 20) and bounds every requested J.
/// With `assume_hypothesis`, the half-set averages are not enumerated and eps is taken as given.
inline LemmaReport lemma_bound_check(const WeightedSequenceFamily &family, const Rational &eps,
                                     std::optional<std::vector<Subset>> subsets = std::nullopt,
                                     bool assume_hypothesis = false) {
    family.validate();
    const size_t r = family.r();
    detail::require_even(r);
    LemmaReport rep;
    rep.r = r;
    rep.eps = eps;
    rep.achieved_half_eps = eps;
    const Rational half(1, 2);
    if (!assume_hypothesis) {
        if (r > kMaxEnumeratedR) {
            throw PreconditionError("half-set enumeration limited to r <= " + std::to_string(kMaxEnumeratedR));
        }
        rep.hypothesis_checked = true;
        rep.hypothesis_holds = true;
        rep.achieved_half_eps = 0;
        detail::for_each_subset_of_size(r, r / 2, [&](const Subset &i) {
            Rational d = family.average_deviation(i, half);
            rep.achieved_half_eps = std::max(rep.achieved_half_eps, d);
            if (!(d < eps) && rep.hypothesis_holds) {
                rep.hypothesis_holds = false;
                rep.violating_half = i;
            }
        });
    }
    const bool normalized = family.sums_to_one();
    for (auto &j : subsets ? *subsets : all_subsets(r)) {
        SubsetBound b;
        b.J = detail::normalized_subset(r, j);
        b.deviation = family.average_deviation(b.J, Rational(Integer(b.J.size()), Integer(r)));
        b.coefficient = bound_coefficient(r, b.J.size());
        b.bound = b.coefficient * eps;
        b.covered = b.J.size() <= r / 2 || normalized;
        b.holds = b.covered && b.deviation < 2 * eps && b.deviation <= b.coefficient * rep.achieved_half_eps;
        rep.subsets.push_back(std::move(b));
    }
    return rep;
}

}  // namespace parind::halfsum
