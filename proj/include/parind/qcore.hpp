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

#include "parind/core/errors.hpp"
#include "parind/core/ops.hpp"
#include "parind/core/projector.hpp"
#include "parind/core/registry.hpp"
#include "parind/core/state.hpp"
#include "parind/core/tolerances.hpp"

namespace parind {

/// (|00> + |11>)/sqrt(2) on two qubits.
inline SparseState bell_state(const std::string &a = "A", const std::string &b = "B") {
    const double h = 1.0 / std::sqrt(2.0);
    return SparseState(SystemRegistry{{a, 2}, {b, 2}}, {{0, h}, {3, h}});
}

/// sum_i c_i |i>|i> from squared coefficients.
inline SparseState schmidt_state(const std::vector<double> &c_squared, const std::string &a = "A",
                                 const std::string &b = "B") {
    const Index d = c_squared.size();
    SystemRegistry reg{{a, d}, {b, d}};
    std::vector<Amplitude> e;
    for (Index i = 0; i < d; i++) {
        if (c_squared[i] < 0) {
            throw PreconditionError("negative squared Schmidt coefficient");
        }
        e.emplace_back(i * d + i, std::sqrt(c_squared[i]));
    }
    return SparseState(std::move(reg), std::move(e));
}

}  // namespace parind
