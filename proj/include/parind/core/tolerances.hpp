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

namespace parind {

struct Tolerances {
    /// Norm and orthogonality checks.
    double norm = 1e-10;
    /// Comparisons between probabilities.
    double probability = 1e-12;
    /// Amplitudes with smaller modulus are never stored.
    double drop = 1e-15;
};

/// Process-wide tolerances. Set once at startup, read everywhere else.
inline Tolerances &tolerances() {
    static Tolerances t;
    return t;
}

}  // namespace parind
