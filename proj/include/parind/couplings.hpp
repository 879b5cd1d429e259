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

// Measurement couplings: a system entangled with pointer registers so that
// pointer readouts reproduce the measurement statistics.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "parind/qcore.hpp"

namespace parind::couplings {

/// Hermitian PSD square root through the eigendecomposition.
inline Eigen::MatrixXcd principal_sqrt(const Eigen::MatrixXcd &f) {
    if ((f - f.adjoint()).norm() > tolerances().norm) {
        throw PreconditionError("operator is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); i++) {
        if (ev(i) < -tolerances().norm) {
            throw PreconditionError("operator has negative eigenvalue " + std::to_string(ev(i)));
        }
        ev(i) = std::sqrt(std::max(ev(i), 0.0));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// Measurement operators M_j on one group of subsystems; effects F_j = M_j^dagger M_j.
class PovmElementSet {
   public:
    PovmElementSet(SystemRegistry acting, std::vector<Eigen::MatrixXcd> kraus)
        : acting_(std::move(acting)), kraus_(std::move(kraus)) {
        validate();
    }

    /// Factorizes each effect by its principal square root.
    static PovmElementSet from_effects(const SystemRegistry &acting, const std::vector<Eigen::MatrixXcd> &effects) {
        std::vector<Eigen::MatrixXcd> k;
        for (const auto &f : effects) {
            k.push_back(principal_sqrt(f));
        }
        return PovmElementSet(acting, std::move(k));
    }

    /// Projective special case.
    static PovmElementSet from_projectors(const std::vector<RankedProjector> &projectors) {
        if (projectors.empty()) {
            throw PreconditionError("empty projector set");
        }
        const auto &acting = projectors.front().acting();
        const auto dim = static_cast<Eigen::Index>(acting.total_dimension());
        std::vector<Eigen::MatrixXcd> k;
        for (const auto &p : projectors) {
            Eigen::MatrixXcd m(dim, dim);
            for (Eigen::Index c = 0; c < dim; c++) {
                auto col = p.apply(SparseState::basis(acting, static_cast<Index>(c)));
                for (Eigen::Index r = 0; r < dim; r++) {
                    m(r, c) = col.amplitude(static_cast<Index>(r));
                }
            }
            k.push_back(std::move(m));
        }
        return PovmElementSet(acting, std::move(k));
    }

    /// Qubit trine: F_j = (2/3)[theta_j], theta_j = 2 pi j / 3.
    static PovmElementSet trine(const SystemRegistry &acting) {
        if (acting.total_dimension() != 2) {
            throw PreconditionError("trine POVM needs a qubit");
        }
        std::vector<Eigen::MatrixXcd> effects;
        for (int j = 0; j < 3; j++) {
            double t = 2.0 * std::numbers::pi * j / 3.0;
            Eigen::Vector2cd v(std::cos(t / 2), std::sin(t / 2));
            effects.push_back((2.0 / 3.0) * v * v.adjoint());
        }
        return from_effects(acting, effects);
    }

    const SystemRegistry &acting() const { return acting_; }
    const std::vector<Eigen::MatrixXcd> &kraus() const { return kraus_; }
    size_t size() const { return kraus_.size(); }

    std::vector<Eigen::MatrixXcd> effects() const {
        std::vector<Eigen::MatrixXcd> f;
        for (const auto &m : kraus_) {
            f.push_back(m.adjoint() * m);
        }
        return f;
    }

    /// Frobenius norm of sum_j F_j - identity.
    double completeness_error() const {
        const auto dim = static_cast<Eigen::Index>(acting_.total_dimension());
        Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(dim, dim);
        for (const auto &f : effects()) {
            s += f;
        }
        return (s - Eigen::MatrixXcd::Identity(dim, dim)).norm();
    }

    /// <psi| F_j |psi>.
    double probability(const SparseState &psi, size_t j) const {
        return apply_local_operator(psi, acting_, kraus_.at(j)).norm_squared();
    }

   private:
    void validate() const {
        if (kraus_.empty()) {
            throw PreconditionError("empty POVM");
        }
        const auto dim = static_cast<Eigen::Index>(acting_.total_dimension());
        for (const auto &m : kraus_) {
            if (m.rows() != dim || m.cols() != dim) {
                throw PreconditionError("measurement operator shape does not match the acting space");
            }
        }
        double err = completeness_error();
        if (err > tolerances().norm) {
            throw PreconditionError("effects do not sum to identity (deviation " + std::to_string(err) + ")");
        }
    }

    SystemRegistry acting_;
    std::vector<Eigen::MatrixXcd> kraus_;
};

namespace detail {

inline SystemRegistry pointer_registry(const std::string &label, size_t outcomes) {
    return SystemRegistry{{label, static_cast<Index>(outcomes)}};
}

inline SparseVector pointer_ket(const SystemRegistry &pointer, size_t j) {
    return SparseState::basis(pointer, static_cast<Index>(j));
}

inline bool negligible(double weight) { return weight <= tolerances().drop; }

inline void require_complete(const std::vector<RankedProjector> &projectors) {
    if (projectors.empty()) {
        throw PreconditionError("empty projector set");
    }
    std::vector<Branch> b;
    for (size_t j = 0; j < projectors.size(); j++) {
        b.push_back({static_cast<double>(j), projectors[j]});
    }
    try {
        Observable check(std::move(b));
    } catch (const PreconditionError &e) {
        throw PreconditionError(std::string("incomplete projector set: ") + e.what());
    }
}

}  // namespace detail

/// sum_j E_j psi (x) |j>_pointer; zero-weight branches vanish.
inline SparseState first_kind_coupling(const SparseState &psi, const std::vector<RankedProjector> &projectors,
                                       const std::string &pointer) {
    detail::require_complete(projectors);
    auto preg = detail::pointer_registry(pointer, projectors.size());
    SparseVector out(psi.registry().concat(preg), {});
    for (size_t j = 0; j < projectors.size(); j++) {
        auto branch = projectors[j].apply(psi);
        if (detail::negligible(branch.norm_squared())) {
            continue;
        }
        out = out.plus(tensor(branch, detail::pointer_ket(preg, j)));
    }
    return SparseState(std::move(out));
}

/// sum_j c_j |post_j> |j>_first |j>_second with c_j = ||E_j psi||. `psi` lives on the measured space only.
inline SparseState second_kind_coupling(const SparseState &psi, const std::vector<RankedProjector> &projectors,
                                        const std::vector<SparseVector> &post_states, const std::string &first,
                                        const std::string &second) {
    detail::require_complete(projectors);
    const auto &acting = projectors.front().acting();
    if (!psi.registry().same_systems(acting)) {
        throw PreconditionError("second-kind coupling needs a state on the measured subsystems only");
    }
    if (post_states.size() != projectors.size()) {
        throw PreconditionError("one post-measurement state per projector required");
    }
    for (size_t j = 0; j < post_states.size(); j++) {
        if (!post_states[j].registry().same_systems(acting)) {
            throw PreconditionError("post state " + std::to_string(j) + " lives on other subsystems");
        }
        if (std::abs(post_states[j].norm_squared() - 1.0) > tolerances().norm) {
            throw PreconditionError("post state " + std::to_string(j) + " is not normalized");
        }
    }
    auto r1 = detail::pointer_registry(first, projectors.size());
    auto r2 = detail::pointer_registry(second, projectors.size());
    SparseVector out(psi.registry().concat(r1).concat(r2), {});
    for (size_t j = 0; j < projectors.size(); j++) {
        double w = born_probability(psi, projectors[j]);
        if (detail::negligible(w)) {
            continue;
        }
        auto post = post_states[j].reordered(psi.registry());
        auto term = tensor(tensor(post, detail::pointer_ket(r1, j)), detail::pointer_ket(r2, j));
        out = out.plus(term, std::sqrt(w));
    }
    return SparseState(std::move(out));
}

/// sum_j (M_j psi) |j>_first |j>_second.
inline SparseState povm_coupling(const SparseState &psi, const PovmElementSet &povm, const std::string &first,
                                 const std::string &second) {
    auto r1 = detail::pointer_registry(first, povm.size());
    auto r2 = detail::pointer_registry(second, povm.size());
    SparseVector out(psi.registry().concat(r1).concat(r2), {});
    for (size_t j = 0; j < povm.size(); j++) {
        auto branch = apply_local_operator(psi, povm.acting(), povm.kraus()[j]);
        if (detail::negligible(branch.norm_squared())) {
            continue;
        }
        out = out.plus(tensor(tensor(branch, detail::pointer_ket(r1, j)), detail::pointer_ket(r2, j)));
    }
    return SparseState(std::move(out));
}

/// Pr(pointer reads j).
inline double pointer_probability(const SparseState &state, const std::string &pointer, size_t j) {
    auto acting = state.registry().restrict_to({pointer});
    return born_probability(state, RankedProjector::basis(acting, {static_cast<Index>(j)}));
}

}  // namespace parind::couplings
