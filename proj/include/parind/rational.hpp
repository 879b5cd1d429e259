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

#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <string>
#include <string_view>

#include "parind/core/errors.hpp"

namespace parind {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational &q) { return q.convert_to<double>(); }

inline std::string to_string(const Rational &q) {
    if (boost::multiprecision::denominator(q) == 1) {
        return boost::multiprecision::numerator(q).str();
    }
    return boost::multiprecision::numerator(q).str() + "/" + boost::multiprecision::denominator(q).str();
}

/// Parses "p", "p/q" or "-p/q" with integer p, q. Anything else is not an exact rational.
inline Rational parse_rational(std::string_view text) {
    auto is_int = [](std::string_view s) {
        if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
            s.remove_prefix(1);
        }
        if (s.empty()) {
            return false;
        }
        for (char c : s) {
            if (!std::isdigit(static_cast<unsigned char>(c))) {
                return false;
            }
        }
        return true;
    };
    auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
    if (!is_int(num) || !is_int(den)) {
        throw PreconditionError("'" + std::string(text) + "' is not an exact rational");
    }
    Integer d(std::string(den[0] == '+' ? den.substr(1) : den));
    if (d == 0) {
        throw PreconditionError("zero denominator in '" + std::string(text) + "'");
    }
    Integer n(std::string(num[0] == '+' ? num.substr(1) : num));
    return Rational(n, d);
}

}  // namespace parind
