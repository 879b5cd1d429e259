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

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parind/core/errors.hpp"

namespace parind {

/// Flat basis index. Row-major over the registry: the last subsystem varies fastest.
using Index = std::uint64_t;

struct Subsystem {
    std::string label;
    Index dim = 1;

    bool operator==(const Subsystem &) const = default;
};

/// Ordered list of labelled subsystems with mixed-radix index arithmetic.
class SystemRegistry {
   public:
    SystemRegistry() = default;

    explicit SystemRegistry(std::vector<Subsystem> subsystems) : subs_(std::move(subsystems)) {
        strides_.assign(subs_.size(), 1);
        long double total = 1;
        for (size_t i = 0; i < subs_.size(); i++) {
            if (subs_[i].dim == 0) {
                throw PreconditionError("subsystem '" + subs_[i].label + "' has dimension 0");
            }
            for (size_t j = 0; j < i; j++) {
                if (subs_[j].label == subs_[i].label) {
                    throw LabelError("duplicate subsystem label '" + subs_[i].label + "'");
                }
            }
            total *= static_cast<long double>(subs_[i].dim);
        }
        if (total > static_cast<long double>(std::numeric_limits<Index>::max() / 2)) {
            throw PreconditionError("total dimension does not fit a 63-bit index");
        }
        for (size_t i = subs_.size(); i-- > 1;) {
            strides_[i - 1] = strides_[i] * subs_[i].dim;
        }
        total_ = subs_.empty() ? 1 : strides_[0] * subs_[0].dim;
    }

    SystemRegistry(std::initializer_list<Subsystem> subsystems)
        : SystemRegistry(std::vector<Subsystem>(subsystems)) {}

    size_t size() const { return subs_.size(); }
    bool empty() const { return subs_.empty(); }
    const Subsystem &operator[](size_t pos) const { return subs_[pos]; }
    const std::vector<Subsystem> &subsystems() const { return subs_; }
    Index total_dimension() const { return total_; }
    Index stride(size_t pos) const { return strides_[pos]; }

    std::optional<size_t> find(std::string_view label) const {
        for (size_t i = 0; i < subs_.size(); i++) {
            if (subs_[i].label == label) {
                return i;
            }
        }
        return std::nullopt;
    }

    bool contains(std::string_view label) const { return find(label).has_value(); }

    size_t position(std::string_view label) const {
        auto p = find(label);
        if (!p) {
            throw LabelError("unknown subsystem label '" + std::string(label) + "'");
        }
        return *p;
    }

    Index dim(std::string_view label) const { return subs_[position(label)].dim; }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        for (const auto &s : subs_) {
            out.push_back(s.label);
        }
        return out;
    }

    Index digit(Index flat, size_t pos) const { return (flat / strides_[pos]) % subs_[pos].dim; }

    std::vector<Index> decode(Index flat) const {
        std::vector<Index> d(subs_.size());
        for (size_t i = 0; i < subs_.size(); i++) {
            d[i] = digit(flat, i);
        }
        return d;
    }

    Index encode(std::span<const Index> digits) const {
        if (digits.size() != subs_.size()) {
            throw PreconditionError("multi-index has wrong length");
        }
        Index flat = 0;
        for (size_t i = 0; i < subs_.size(); i++) {
            if (digits[i] >= subs_[i].dim) {
                throw PreconditionError("basis index " + std::to_string(digits[i]) + " out of range for '" +
                                        subs_[i].label + "'");
            }
            flat += digits[i] * strides_[i];
        }
        return flat;
    }

    Index encode(std::initializer_list<Index> digits) const {
        return encode(std::span<const Index>(digits.begin(), digits.size()));
    }

    /// "A=0,B=1" style rendering of a basis index, used in diagnostics.
    std::string describe(Index flat) const {
        std::string out;
        for (size_t i = 0; i < subs_.size(); i++) {
            if (i) {
                out += ",";
            }
            out += subs_[i].label + "=" + std::to_string(digit(flat, i));
        }
        return out;
    }

    /// Concatenation; labels must be disjoint.
    SystemRegistry concat(const SystemRegistry &other) const {
        std::vector<Subsystem> all = subs_;
        for (const auto &s : other.subs_) {
            if (contains(s.label)) {
                throw LabelError("label collision on '" + s.label + "'");
            }
            all.push_back(s);
        }
        return SystemRegistry(std::move(all));
    }

    /// Registry restricted to the given labels, in the given order.
    SystemRegistry restrict_to(std::span<const std::string> labels) const {
        std::vector<Subsystem> out;
        for (const auto &l : labels) {
            out.push_back(subs_[position(l)]);
        }
        return SystemRegistry(std::move(out));
    }

    SystemRegistry restrict_to(std::initializer_list<std::string> labels) const {
        return restrict_to(std::span<const std::string>(labels.begin(), labels.size()));
    }

    /// Same labels with the same dimensions, in any order.
    bool same_systems(const SystemRegistry &other) const {
        if (size() != other.size()) {
            return false;
        }
        for (const auto &s : subs_) {
            auto p = other.find(s.label);
            if (!p || other[*p].dim != s.dim) {
                return false;
            }
        }
        return true;
    }

    bool operator==(const SystemRegistry &other) const { return subs_ == other.subs_; }

   private:
    std::vector<Subsystem> subs_;
    std::vector<Index> strides_;
    Index total_ = 1;
};

/// Where the subsystems of a smaller registry sit inside a larger one.
///
/// Splits a flat index of the large registry into the part addressed by the
/// small registry (as a flat index of the small registry) and the remainder.
class Embedding {
   public:
    Embedding(const SystemRegistry &outer, const SystemRegistry &inner) : inner_(inner) {
        for (size_t i = 0; i < inner.size(); i++) {
            size_t p = outer.position(inner[i].label);
            if (outer[p].dim != inner[i].dim) {
                throw LabelError("subsystem '" + inner[i].label + "' has dimension " +
                                 std::to_string(inner[i].dim) + ", state has " + std::to_string(outer[p].dim));
            }
            outer_stride_.push_back(outer.stride(p));
        }
    }

    /// Offset contributed to the outer index by an inner flat index.
    Index offset(Index inner_flat) const {
        Index off = 0;
        for (size_t i = 0; i < inner_.size(); i++) {
            off += inner_.digit(inner_flat, i) * outer_stride_[i];
        }
        return off;
    }

    /// Splits an outer index into (inner flat index, outer index with inner digits zeroed).
    std::pair<Index, Index> split(Index outer_flat) const {
        Index inner = 0;
        Index off = 0;
        for (size_t i = 0; i < inner_.size(); i++) {
            Index d = (outer_flat / outer_stride_[i]) % inner_[i].dim;
            inner += d * inner_.stride(i);
            off += d * outer_stride_[i];
        }
        return {inner, outer_flat - off};
    }

   private:
    SystemRegistry inner_;
    std::vector<Index> outer_stride_;
};

}  // namespace parind
