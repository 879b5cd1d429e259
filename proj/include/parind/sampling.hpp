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

// Seeded random instances for sweeps: states, unitaries, projector splits, Kraus sets.

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "parind/qcore.hpp"

namespace parind::sampling {

using Rng = std::mt19937_64;

/// Independent stream for grid point `index` of a run seeded with `seed`.
inline Rng stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

inline SparseState random_state(Rng &rng, const SystemRegistry &reg) {
    std::normal_distribution<double> g;
    std::vector<cplx> a(reg.total_dimension());
    for (auto &x : a) {
        x = {g(rng), g(rng)};
    }
    double norm = 0;
    for (const auto &x : a) {
        norm += std::norm(x);
    }
    for (auto &x : a) {
        x /= std::sqrt(norm);
    }
    return SparseState::from_dense(reg, a);
}

/// QR of a complex Gaussian matrix.
inline Eigen::MatrixXcd random_unitary(Rng &rng, Eigen::Index dim) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index i = 0; i < dim; i++) {
        for (Eigen::Index j = 0; j < dim; j++) {
            m(i, j) = {g(rng), g(rng)};
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    return qr.householderQ();
}

/// Random partition of the acting dimension into positive ranks.
inline std::vector<size_t> random_ranks(Rng &rng, size_t dim) {
    std::vector<size_t> ranks;
    size_t left = dim;
    while (left > 0) {
        size_t k = std::uniform_int_distribution<size_t>(1, left)(rng);
        ranks.push_back(k);
        left -= k;
    }
    return ranks;
}

/// Complete orthogonal projector set from consecutive column blocks of a random unitary.
inline std::vector<RankedProjector> random_split(Rng &rng, const SystemRegistry &acting,
                                                 const std::vector<size_t> &ranks) {
    const auto dim = static_cast<Eigen::Index>(acting.total_dimension());
    Eigen::MatrixXcd u = random_unitary(rng, dim);
    std::vector<RankedProjector> out;
    Eigen::Index c = 0;
    for (size_t k : ranks) {
        std::vector<SparseState> kets;
        for (size_t i = 0; i < k; i++, c++) {
            std::vector<cplx> col(u.col(c).data(), u.col(c).data() + dim);
            kets.push_back(SparseState::from_dense(acting, col));
        }
        out.emplace_back(acting, std::move(kets));
    }
    if (c != dim) {
        throw PreconditionError("projector ranks do not add up to the acting dimension");
    }
    return out;
}

/// Measurement operators M_j cut from an isometry, so sum_j M_j^dag M_j = 1.
inline std::vector<Eigen::MatrixXcd> random_kraus(Rng &rng, Eigen::Index dim, Eigen::Index outcomes) {
    Eigen::MatrixXcd v = random_unitary(rng, dim * outcomes).leftCols(dim);
    std::vector<Eigen::MatrixXcd> out;
    for (Eigen::Index j = 0; j < outcomes; j++) {
        out.push_back(v.middleRows(j * dim, dim));
    }
    return out;
}

}  // namespace parind::sampling
