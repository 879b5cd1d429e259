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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "parind/core/projector.hpp"

namespace parind {

/// Product state on the concatenated registry. Labels must be disjoint.
inline SparseVector tensor(const SparseVector &left, const SparseVector &right) {
    SystemRegistry reg = left.registry().concat(right.registry());
    const Index scale = right.registry().total_dimension();
    std::vector<Amplitude> e;
    e.reserve(left.nnz() * right.nnz());
    for (const auto &[i, a] : left.entries()) {
        for (const auto &[j, b] : right.entries()) {
            e.emplace_back(i * scale + j, a * b);
        }
    }
    return SparseVector(std::move(reg), std::move(e));
}

inline SparseState tensor(const SparseState &left, const SparseState &right) {
    return SparseState(tensor(static_cast<const SparseVector &>(left), static_cast<const SparseVector &>(right)));
}

/// <psi|P|psi>.
inline double born_probability(const SparseState &state, const RankedProjector &projector) {
    return std::clamp(projector.weight(state), 0.0, 1.0);
}

namespace detail {

inline void require_disjoint(const std::vector<const SystemRegistry *> &groups) {
    std::set<std::string> seen;
    for (const auto *g : groups) {
        for (const auto &s : g->subsystems()) {
            if (!seen.insert(s.label).second) {
                throw LabelError("joint measurement groups overlap on '" + s.label + "'");
            }
        }
    }
}

}  // namespace detail

/// Born value of the product of projectors acting on disjoint subsystem groups.
inline double joint_probability(const SparseState &state, const std::vector<RankedProjector> &projectors) {
    if (projectors.empty()) {
        return 1.0;
    }
    std::vector<const SystemRegistry *> groups;
    for (const auto &p : projectors) {
        groups.push_back(&p.acting());
    }
    detail::require_disjoint(groups);
    SparseVector v = state;
    for (size_t i = 0; i + 1 < projectors.size(); i++) {
        v = projectors[i].apply(v);
    }
    return std::clamp(projectors.back().weight(v), 0.0, 1.0);
}

/// Joint outcome distribution of several observables on disjoint groups.
///
/// Entry order is row-major over the branch indices of the observables, the
/// last observable varying fastest.
inline std::vector<double> joint_distribution(const SparseState &state, const std::vector<Observable> &observables) {
    std::vector<const SystemRegistry *> groups;
    size_t total = 1;
    for (const auto &o : observables) {
        groups.push_back(&o.acting());
        total *= o.size();
    }
    detail::require_disjoint(groups);
    std::vector<double> out(total, 0.0);
    if (observables.empty()) {
        out[0] = 1.0;
        return out;
    }
    std::function<void(const SparseVector &, size_t, size_t)> rec = [&](const SparseVector &v, size_t depth,
                                                                         size_t base) {
        const Observable &o = observables[depth];
        if (depth + 1 == observables.size()) {
            for (size_t b = 0; b < o.size(); b++) {
                out[base * o.size() + b] = std::clamp(o[b].projector.weight(v), 0.0, 1.0);
            }
            return;
        }
        for (size_t b = 0; b < o.size(); b++) {
            SparseVector w = o[b].projector.apply(v);
            if (w.nnz() == 0) {
                continue;
            }
            rec(w, depth + 1, base * o.size() + b);
        }
    };
    rec(state, 0, 0);
    return out;
}

struct SchmidtDecomposition {
    std::vector<double> coefficients;
    std::vector<SparseState> left;
    std::vector<SparseState> right;
};

/// Schmidt decomposition across a bipartition of the registry's labels.
inline SchmidtDecomposition schmidt_decompose(const SparseState &state, const std::vector<std::string> &left_labels,
                                              const std::vector<std::string> &right_labels) {
    const SystemRegistry &reg = state.registry();
    std::set<std::string> covered;
    for (const auto &l : left_labels) {
        reg.position(l);
        covered.insert(l);
    }
    for (const auto &l : right_labels) {
        reg.position(l);
        if (!covered.insert(l).second) {
            throw LabelError("label '" + l + "' on both sides of the bipartition");
        }
    }
    if (covered.size() != reg.size()) {
        throw PreconditionError("bipartition does not cover the registry");
    }
    SystemRegistry lreg = reg.restrict_to(left_labels);
    SystemRegistry rreg = reg.restrict_to(right_labels);
    Embedding lemb(reg, lreg);
    Embedding remb(reg, rreg);

    // Compress to the rows and columns that carry support.
    std::map<Index, Index> rows, cols;
    std::vector<std::tuple<Index, Index, cplx>> cells;
    for (const auto &[k, a] : state.entries()) {
        Index li = lemb.split(k).first;
        Index ri = remb.split(k).first;
        rows.emplace(li, rows.size());
        cols.emplace(ri, cols.size());
        cells.emplace_back(li, ri, a);
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()),
                                                static_cast<Eigen::Index>(cols.size()));
    for (const auto &[li, ri, a] : cells) {
        m(static_cast<Eigen::Index>(rows[li]), static_cast<Eigen::Index>(cols[ri])) = a;
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &sv = svd.singularValues();
    SchmidtDecomposition out;
    const double cut = std::sqrt(tolerances().probability);
    for (Eigen::Index i = 0; i < sv.size(); i++) {
        if (sv(i) <= cut) {
            continue;
        }
        std::vector<Amplitude> le, re;
        for (const auto &[li, row] : rows) {
            le.emplace_back(li, svd.matrixU()(static_cast<Eigen::Index>(row), i));
        }
        for (const auto &[ri, col] : cols) {
            re.emplace_back(ri, std::conj(svd.matrixV()(static_cast<Eigen::Index>(col), i)));
        }
        out.coefficients.push_back(sv(i));
        out.left.push_back(SparseState::normalized(SparseVector(lreg, std::move(le))));
        out.right.push_back(SparseState::normalized(SparseVector(rreg, std::move(re))));
    }
    double total = 0;
    for (double c : out.coefficients) {
        total += c * c;
    }
    if (std::abs(total - 1.0) > tolerances().norm) {
        throw ConsistencyError("Schmidt coefficients square-sum to " + std::to_string(total));
    }
    return out;
}

/// Reassembles sum_i c_i |left_i>|right_i> over the registry `target`.
inline SparseVector schmidt_reconstruct(const SchmidtDecomposition &s, const SystemRegistry &target) {
    std::vector<Amplitude> e;
    SystemRegistry reg;
    for (size_t i = 0; i < s.coefficients.size(); i++) {
        SparseVector t = tensor(static_cast<const SparseVector &>(s.left[i]),
                                static_cast<const SparseVector &>(s.right[i]));
        reg = t.registry();
        for (const auto &[k, a] : t.entries()) {
            e.emplace_back(k, s.coefficients[i] * a);
        }
    }
    return SparseVector(reg, std::move(e)).reordered(target);
}

/// |<a|b>|. Registries must hold the same subsystems; order may differ.
inline double fidelity(const SparseState &a, const SparseState &b) {
    if (!a.registry().same_systems(b.registry())) {
        throw LabelError("fidelity between states on different registries");
    }
    cplx ip = b.registry() == a.registry() ? a.inner(b) : a.inner(b.reordered(a.registry()));
    return std::clamp(std::abs(ip), 0.0, 1.0);
}

/// Trace distance of two pure states, sqrt(1 - F^2).
inline double trace_distance_pure(const SparseState &a, const SparseState &b) {
    double f = fidelity(a, b);
    return std::sqrt(std::max(0.0, 1.0 - f * f));
}

/// Injective partial basis map with a phase per mapped basis vector.
///
/// Acts on the subsystems of `acting`; inputs and outputs are flat indices of
/// that registry. Basis vectors outside the domain have no defined image.
class StructuredMap {
   public:
    struct Image {
        Index target;
        cplx phase;
    };

    StructuredMap(SystemRegistry acting, const std::vector<std::tuple<Index, Index, cplx>> &table)
        : acting_(std::move(acting)) {
        std::set<Index> targets;
        for (const auto &[from, to, phase] : table) {
            if (from >= acting_.total_dimension() || to >= acting_.total_dimension()) {
                throw PreconditionError("structured map entry outside the acting space");
            }
            if (std::abs(std::abs(phase) - 1.0) > tolerances().norm) {
                throw PreconditionError("structured map phase is not unimodular");
            }
            if (!targets.insert(to).second) {
                throw PreconditionError("structured map is not injective at " + acting_.describe(to));
            }
            if (!table_.emplace(from, Image{to, phase}).second) {
                throw PreconditionError("structured map lists " + acting_.describe(from) + " twice");
            }
        }
    }

    /// Identity on every basis vector of a (small) acting space.
    static StructuredMap identity(const SystemRegistry &acting) {
        std::vector<std::tuple<Index, Index, cplx>> t;
        for (Index i = 0; i < acting.total_dimension(); i++) {
            t.emplace_back(i, i, 1.0);
        }
        return StructuredMap(acting, t);
    }

    const SystemRegistry &acting() const { return acting_; }
    size_t domain_size() const { return table_.size(); }

    const Image *find(Index from) const {
        auto it = table_.find(from);
        return it == table_.end() ? nullptr : &it->second;
    }

   private:
    SystemRegistry acting_;
    std::unordered_map<Index, Image> table_;
};

/// Applies a structured map to a state; fails if the support leaves the domain.
inline SparseState apply_structured_map(const StructuredMap &map, const SparseState &state) {
    Embedding emb(state.registry(), map.acting());
    std::vector<Amplitude> e;
    e.reserve(state.nnz());
    for (const auto &[k, a] : state.entries()) {
        auto [inner, rest] = emb.split(k);
        const auto *img = map.find(inner);
        if (img == nullptr) {
            throw DomainError("basis vector (" + state.registry().describe(k) +
                              ") lies outside the structured map's domain");
        }
        e.emplace_back(rest + emb.offset(img->target), a * img->phase);
    }
    return SparseState(state.registry(), std::move(e));
}

/// Applies a dense operator acting on one group of subsystems.
inline SparseVector apply_local_operator(const SparseVector &v, const SystemRegistry &acting,
                                         const Eigen::MatrixXcd &op) {
    const auto dim = static_cast<Eigen::Index>(acting.total_dimension());
    if (op.rows() != dim || op.cols() != dim) {
        throw PreconditionError("operator shape does not match the acting space");
    }
    Embedding emb(v.registry(), acting);
    std::vector<Amplitude> e;
    for (const auto &[k, a] : v.entries()) {
        auto [inner, rest] = emb.split(k);
        for (Eigen::Index r = 0; r < dim; r++) {
            cplx x = op(r, static_cast<Eigen::Index>(inner));
            if (x != cplx{}) {
                e.emplace_back(rest + emb.offset(static_cast<Index>(r)), x * a);
            }
        }
    }
    return SparseVector(v.registry(), std::move(e));
}

}  // namespace parind
