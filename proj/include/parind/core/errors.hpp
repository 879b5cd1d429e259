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

#include <stdexcept>
#include <string>

namespace parind {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unknown, duplicate, or overlapping subsystem labels.
struct LabelError : Error {
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
struct PreconditionError : Error {
    using Error::Error;
};

/// A state's support leaves the domain of a structured map.
struct DomainError : Error {
    using Error::Error;
};

/// A computed quantity disagrees with an identity it must satisfy.
struct ConsistencyError : Error {
    using Error::Error;
};

/// A hidden-variable model produced malformed output or cannot handle a scenario.
struct ModelError : Error {
    using Error::Error;
};

}  // namespace parind
