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
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "parind/core/state.hpp"

namespace parind {

/// Orthogonal projector given by an orthonormal ket list, or identity minus that span.
class RankedProjector {
   public:
    RankedProjector() = default;

    RankedProjector(SystemRegistry acting, std::vector<SparseState> kets, bool complemented = false)
        : acting_(std::move(acting)), complemented_(complemented) {
        const double tol = tolerances().norm;
        for (auto &k : kets) {
            kets_.push_back(k.registry() == acting_ ? std::move(k) : k.reordered(acting_));
        }
        for (size_t i = 0; i < kets_.size(); i++) {
            for (size_t j = 0; j < i; j++) {
                if (std::abs(kets_[i].inner(kets_[j])) > tol) {
                    throw PreconditionError("projector kets " + std::to_string(j) + " and " + std::to_string(i) +
                                            " are not orthogonal");
                }
            }
            if (std::abs(kets_[i].norm_squared() - 1.0) > tol) {
                throw PreconditionError("projector ket " + std::to_string(i) + " is not normalized");
            }
        }
        for (size_t k = 0; k < kets_.size(); k++) {
            for (const auto &[i, a] : kets_[k].entries()) {
                lookup_[i].emplace_back(k, a);
            }
        }
    }

    static RankedProjector identity(SystemRegistry acting) { return RankedProjector(std::move(acting), {}, true); }

    /// Projector onto a set of computational basis vectors of the acting space.
    static RankedProjector basis(const SystemRegistry &acting, const std::vector<Index> &indices,
                                 bool complemented = false) {
        std::vector<SparseState> kets;
        for (Index i : indices) {
            kets.push_back(SparseState::basis(acting, i));
        }
        return RankedProjector(acting, std::move(kets), complemented);
    }

    const SystemRegistry &acting() const { return acting_; }
    const std::vector<SparseState> &kets() const { return kets_; }
    bool complemented() const { return complemented_; }

    Index rank() const {
        Index k = kets_.size();
        return complemented_ ? acting_.total_dimension() - k : k;
    }

    RankedProjector complement() const {
        RankedProjector p = *this;
        p.complemented_ = !complemented_;
        return p;
    }

    /// Squared norm of the component of v in the ket span.
    double span_weight(const SparseVector &v) const {
        double w = 0;
        visit_overlaps(v, [&](Index, const std::vector<cplx> &ov) {
            for (const auto &o : ov) {
                w += std::norm(o);
            }
        });
        return w;
    }

    /// Component of v in the ket span.
    SparseVector project_span(const SparseVector &v) const {
        Embedding emb(v.registry(), acting_);
        std::vector<std::vector<std::pair<Index, cplx>>> ket_offsets(kets_.size());
        for (size_t k = 0; k < kets_.size(); k++) {
            for (const auto &[i, a] : kets_[k].entries()) {
                ket_offsets[k].emplace_back(emb.offset(i), a);
            }
        }
        std::vector<Amplitude> out;
        visit_overlaps(v, [&](Index rest, const std::vector<cplx> &ov) {
            for (size_t k = 0; k < ov.size(); k++) {
                if (ov[k] == cplx{}) {
                    continue;
                }
                for (const auto &[off, a] : ket_offsets[k]) {
                    out.emplace_back(rest + off, ov[k] * a);
                }
            }
        });
        return SparseVector(v.registry(), std::move(out));
    }

    /// P v.
    SparseVector apply(const SparseVector &v) const {
        SparseVector s = project_span(v);
        return complemented_ ? v.plus(s, -1.0) : s;
    }

    /// ||P v||^2.
    double weight(const SparseVector &v) const {
        double s = span_weight(v);
        return complemented_ ? std::max(0.0, v.norm_squared() - s) : s;
    }

    /// Equality as operators, up to tolerance.
    bool same_operator(const RankedProjector &other) const {
        if (complemented_ != other.complemented_ || !acting_.same_systems(other.acting_) ||
            kets_.size() != other.kets_.size()) {
            return false;
        }
        const double tol = tolerances().norm;
        for (const auto &k : other.kets_) {
            SparseVector kk = k.registry() == acting_ ? SparseVector(k) : k.reordered(acting_);
            if (std::abs(span_weight(kk) - 1.0) > tol) {
                return false;
            }
        }
        return true;
    }

   private:
    // Calls fn(rest, overlaps) once per group of v's entries sharing the same
    // digits outside the acting subsystems; overlaps[k] = <ket_k|v_rest>.
    template <class Fn>
    void visit_overlaps(const SparseVector &v, Fn &&fn) const {
        if (kets_.empty()) {
            return;
        }
        Embedding emb(v.registry(), acting_);
        std::vector<std::tuple<Index, Index, cplx>> items;
        items.reserve(v.nnz());
        for (const auto &[key, a] : v.entries()) {
            auto [inner, rest] = emb.split(key);
            items.emplace_back(rest, inner, a);
        }
        std::stable_sort(items.begin(), items.end(),
                         [](const auto &x, const auto &y) { return std::get<0>(x) < std::get<0>(y); });
        std::vector<cplx> ov(kets_.size());
        for (size_t i = 0; i < items.size();) {
            Index rest = std::get<0>(items[i]);
            std::fill(ov.begin(), ov.end(), cplx{});
            bool any = false;
            for (; i < items.size() && std::get<0>(items[i]) == rest; i++) {
                auto it = lookup_.find(std::get<1>(items[i]));
                if (it == lookup_.end()) {
                    continue;
                }
                for (const auto &[k, a] : it->second) {
                    ov[k] += std::conj(a) * std::get<2>(items[i]);
                    any = true;
                }
            }
            if (any) {
                fn(rest, ov);
            }
        }
    }

    SystemRegistry acting_;
    std::vector<SparseState> kets_;
    bool complemented_ = false;
    std::unordered_map<Index, std::vector<std::pair<size_t, cplx>>> lookup_;
};

struct Branch {
    double eigenvalue = 0;
    RankedProjector projector;
};

/// Observable as a list of (eigenvalue, projector) branches summing to identity.
///
/// `name` and `angle` are metadata handed to hidden-variable models; they do
/// not affect quantum predictions.
class Observable {
   public:
    Observable() = default;

    explicit Observable(std::vector<Branch> branches, std::string name = {}, std::optional<double> angle = {})
        : branches_(std::move(branches)), name_(std::move(name)), angle_(angle) {
        validate();
    }

    const std::vector<Branch> &branches() const { return branches_; }
    size_t size() const { return branches_.size(); }
    const Branch &operator[](size_t i) const { return branches_[i]; }
    const SystemRegistry &acting() const { return branches_.front().projector.acting(); }
    const std::string &name() const { return name_; }
    std::optional<double> angle() const { return angle_; }

    std::optional<size_t> find(double eigenvalue) const {
        for (size_t i = 0; i < branches_.size(); i++) {
            if (branches_[i].eigenvalue == eigenvalue) {
                return i;
            }
        }
        return std::nullopt;
    }

    std::vector<double> eigenvalues() const {
        std::vector<double> e;
        for (const auto &b : branches_) {
            e.push_back(b.eigenvalue);
        }
        return e;
    }

    /// Copy with eigenvalues +1 and -1 exchanged.
    Observable flipped(std::string name, std::optional<double> angle) const {
        std::vector<Branch> b = branches_;
        for (auto &x : b) {
            if (x.eigenvalue == 1.0 || x.eigenvalue == -1.0) {
                x.eigenvalue = -x.eigenvalue;
            }
        }
        return Observable(std::move(b), std::move(name), angle);
    }

    /// True when `other` equals this observable with eigenvalues +1 and -1 exchanged.
    bool is_flip_of(const Observable &other) const {
        if (size() != other.size()) {
            return false;
        }
        for (const auto &b : branches_) {
            double target = (b.eigenvalue == 1.0 || b.eigenvalue == -1.0) ? -b.eigenvalue : b.eigenvalue;
            auto j = other.find(target);
            if (!j || !b.projector.same_operator(other[*j].projector)) {
                return false;
            }
        }
        return true;
    }

   private:
    void validate() {
        if (branches_.empty()) {
            throw PreconditionError("observable without branches");
        }
        const SystemRegistry &acting = branches_.front().projector.acting();
        const double tol = tolerances().norm;
        int complemented = -1;
        Index rank = 0;
        for (size_t i = 0; i < branches_.size(); i++) {
            const auto &p = branches_[i].projector;
            if (!p.acting().same_systems(acting)) {
                throw PreconditionError("observable branches act on different subsystems");
            }
            for (size_t j = 0; j < i; j++) {
                if (std::abs(branches_[i].eigenvalue - branches_[j].eigenvalue) <= 1e-12) {
                    throw PreconditionError("duplicate eigenvalue " + std::to_string(branches_[i].eigenvalue));
                }
            }
            if (p.complemented()) {
                if (complemented >= 0) {
                    throw PreconditionError("more than one complemented branch");
                }
                complemented = static_cast<int>(i);
            } else {
                rank += p.rank();
            }
        }
        // Pairwise orthogonality of the explicit branches.
        for (size_t i = 0; i < branches_.size(); i++) {
            if (static_cast<int>(i) == complemented) {
                continue;
            }
            for (const auto &k : branches_[i].projector.kets()) {
                SparseVector kv = k.registry() == acting ? SparseVector(k) : k.reordered(acting);
                for (size_t j = 0; j < i; j++) {
                    if (static_cast<int>(j) == complemented) {
                        continue;
                    }
                    if (branches_[j].projector.span_weight(kv) > tol) {
                        throw PreconditionError("branches " + std::to_string(j) + " and " + std::to_string(i) +
                                                " are not orthogonal");
                    }
                }
            }
        }
        if (complemented < 0) {
            if (rank != acting.total_dimension()) {
                throw PreconditionError("branch ranks sum to " + std::to_string(rank) + ", acting dimension is " +
                                        std::to_string(acting.total_dimension()));
            }
            return;
        }
        // The complemented branch must remove exactly the span of the others.
        const auto &closing = branches_[complemented].projector;
        if (closing.kets().size() != rank) {
            throw PreconditionError("complemented branch does not close the remaining span");
        }
        for (size_t i = 0; i < branches_.size(); i++) {
            if (static_cast<int>(i) == complemented) {
                continue;
            }
            for (const auto &k : branches_[i].projector.kets()) {
                SparseVector kv = k.registry() == acting ? SparseVector(k) : k.reordered(acting);
                if (std::abs(closing.span_weight(kv) - 1.0) > tol) {
                    throw PreconditionError("complemented branch does not close the remaining span");
                }
            }
        }
    }

    std::vector<Branch> branches_;
    std::string name_;
    std::optional<double> angle_;
};

/// Closes a list of explicit branches with one complemented branch carrying `eigenvalue`.
/// Returns the branches unchanged when they already span the acting space.
inline std::vector<Branch> close_branches(std::vector<Branch> explicit_branches, double eigenvalue) {
    if (explicit_branches.empty()) {
        throw PreconditionError("nothing to close");
    }
    const SystemRegistry acting = explicit_branches.front().projector.acting();
    std::vector<SparseState> kets;
    for (const auto &b : explicit_branches) {
        for (const auto &k : b.projector.kets()) {
            kets.push_back(k);
        }
    }
    if (kets.size() == acting.total_dimension()) {
        return explicit_branches;
    }
    explicit_branches.push_back({eigenvalue, RankedProjector(acting, std::move(kets), true)});
    return explicit_branches;
}

}  // namespace parind
