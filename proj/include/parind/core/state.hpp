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
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "parind/core/registry.hpp"
#include "parind/core/tolerances.hpp"

namespace parind {

using cplx = std::complex<double>;
using Amplitude = std::pair<Index, cplx>;

/// Sparse vector over a registry's product basis.
///
/// Entries are kept sorted by flat index with no duplicates and no amplitude
/// below the drop threshold. No normalization is implied.
class SparseVector {
   public:
    SparseVector() = default;

    /// Sorts, merges duplicate indices and drops negligible amplitudes.
    SparseVector(SystemRegistry registry, std::vector<Amplitude> entries) : reg_(std::move(registry)) {
        std::stable_sort(entries.begin(), entries.end(),
                         [](const Amplitude &a, const Amplitude &b) { return a.first < b.first; });
        const double drop = tolerances().drop;
        const Index total = reg_.total_dimension();
        entries_.reserve(entries.size());
        for (size_t i = 0; i < entries.size();) {
            Index key = entries[i].first;
            if (key >= total) {
                throw PreconditionError("basis index " + std::to_string(key) + " outside registry");
            }
            cplx sum = 0;
            for (; i < entries.size() && entries[i].first == key; i++) {
                sum += entries[i].second;
            }
            if (std::abs(sum) >= drop) {
                entries_.emplace_back(key, sum);
            }
        }
    }

    const SystemRegistry &registry() const { return reg_; }
    const std::vector<Amplitude> &entries() const { return entries_; }
    size_t nnz() const { return entries_.size(); }

    cplx amplitude(Index flat) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), flat,
                                   [](const Amplitude &a, Index k) { return a.first < k; });
        return (it != entries_.end() && it->first == flat) ? it->second : cplx{};
    }

    cplx amplitude(std::initializer_list<Index> digits) const { return amplitude(reg_.encode(digits)); }

    double norm_squared() const {
        double s = 0;
        for (const auto &[k, a] : entries_) {
            s += std::norm(a);
        }
        return s;
    }

    /// <this|other>; both must live on the same registry (same order).
    cplx inner(const SparseVector &other) const {
        if (!(reg_ == other.reg_)) {
            throw LabelError("inner product between different registries");
        }
        cplx s = 0;
        auto a = entries_.begin();
        auto b = other.entries_.begin();
        while (a != entries_.end() && b != other.entries_.end()) {
            if (a->first < b->first) {
                ++a;
            } else if (b->first < a->first) {
                ++b;
            } else {
                s += std::conj(a->second) * b->second;
                ++a;
                ++b;
            }
        }
        return s;
    }

    SparseVector scaled(cplx factor) const {
        std::vector<Amplitude> e = entries_;
        for (auto &x : e) {
            x.second *= factor;
        }
        return SparseVector(reg_, std::move(e));
    }

    /// this + factor * other.
    SparseVector plus(const SparseVector &other, cplx factor = 1.0) const {
        if (!(reg_ == other.reg_)) {
            throw LabelError("sum of vectors on different registries");
        }
        std::vector<Amplitude> e = entries_;
        for (const auto &[k, a] : other.entries_) {
            e.emplace_back(k, factor * a);
        }
        return SparseVector(reg_, std::move(e));
    }

    /// Same vector expressed over a permutation of its registry.
    SparseVector reordered(const SystemRegistry &target) const {
        if (target == reg_) {
            return *this;
        }
        if (!reg_.same_systems(target)) {
            throw LabelError("registries hold different subsystems");
        }
        Embedding emb(target, reg_);
        std::vector<Amplitude> e;
        e.reserve(entries_.size());
        for (const auto &[k, a] : entries_) {
            e.emplace_back(emb.offset(k), a);
        }
        return SparseVector(target, std::move(e));
    }

    std::vector<cplx> to_dense() const {
        std::vector<cplx> out(reg_.total_dimension());
        for (const auto &[k, a] : entries_) {
            out[k] = a;
        }
        return out;
    }

   protected:
    SystemRegistry reg_;
    std::vector<Amplitude> entries_;
};

/// Unit-norm sparse state.
class SparseState : public SparseVector {
   public:
    SparseState() = default;

    SparseState(SystemRegistry registry, std::vector<Amplitude> entries)
        : SparseState(SparseVector(std::move(registry), std::move(entries))) {}

    explicit SparseState(SparseVector v) : SparseVector(std::move(v)) {
        double n2 = norm_squared();
        if (std::abs(n2 - 1.0) > tolerances().norm) {
            throw PreconditionError("state norm squared is " + std::to_string(n2) + ", expected 1");
        }
    }

    /// Rescales a nonzero vector to unit norm.
    static SparseState normalized(const SparseVector &v) {
        double n = std::sqrt(v.norm_squared());
        if (n == 0) {
            throw PreconditionError("cannot normalize the zero vector");
        }
        return SparseState(v.scaled(1.0 / n));
    }

    static SparseState basis(const SystemRegistry &registry, Index flat) {
        return SparseState(registry, {{flat, 1.0}});
    }

    static SparseState basis(const SystemRegistry &registry, std::initializer_list<Index> digits) {
        return basis(registry, registry.encode(digits));
    }

    static SparseState from_dense(const SystemRegistry &registry, std::span<const cplx> amps) {
        if (amps.size() != registry.total_dimension()) {
            throw PreconditionError("dense vector length does not match registry dimension");
        }
        std::vector<Amplitude> e;
        for (size_t i = 0; i < amps.size(); i++) {
            e.emplace_back(i, amps[i]);
        }
        return SparseState(registry, std::move(e));
    }

    SparseState reordered(const SystemRegistry &target) const {
        return SparseState(SparseVector::reordered(target));
    }
};

}  // namespace parind
