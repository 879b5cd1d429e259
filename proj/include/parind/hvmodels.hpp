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

// Built-in hidden-variable models used as audit fixtures.

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "parind/hvaudit.hpp"

namespace parind::hv {

/// Every point reproduces the quantum joint distribution.
class TrivialModel : public HVModel {
   public:
    explicit TrivialModel(size_t points = 1) : points_(points) {
        if (points == 0) {
            throw ModelError("trivial model needs at least one point");
        }
    }
    std::string name() const override { return "trivial"; }
    LambdaSpace lambda_space() const override {
        std::vector<std::string> p;
        for (size_t i = 0; i < points_; i++) {
            p.push_back("t" + std::to_string(i));
        }
        return LambdaSpace::uniform(p);
    }
    std::vector<double> distribution(const Scenario &s, size_t) const override { return born_distribution(s); }

   private:
    size_t points_;
};

namespace detail {

inline double angle_of(const Observable &o, const std::string &model) {
    if (!o.angle()) {
        throw ModelError(model + " needs angle metadata on " + (o.name().empty() ? "an observable" : o.name()));
    }
    return *o.angle();
}

/// Product of per-party deterministic outcomes (+1 or -1) as a joint distribution.
inline std::vector<double> deterministic_product(const Scenario &s, const std::vector<double> &values,
                                                 const std::string &model) {
    auto m = s.measured();
    size_t flat = 0;
    for (size_t k = 0; k < m.size(); k++) {
        const auto &o = *s.settings[m[k]];
        auto i = o.find(values[k]);
        if (!i) {
            throw ModelError(model + ": " + o.name() + " has no eigenvalue " + std::to_string(values[k]));
        }
        flat = flat * o.size() + *i;
    }
    std::vector<double> d(s.outcome_count(), 0.0);
    d[flat] = 1.0;
    return d;
}

}  // namespace detail

/// Two points, sign s = +1 or -1; an observable at angle theta reads s below pi/2 and -s from pi/2 on.
class DeterministicChainModel : public HVModel {
   public:
    std::string name() const override { return "deterministic-chain"; }
    LambdaSpace lambda_space() const override { return LambdaSpace::uniform({"+", "-"}); }
    std::vector<double> distribution(const Scenario &s, size_t lambda) const override {
        const double sign = lambda == 0 ? 1.0 : -1.0;
        std::vector<double> values;
        for (size_t i : s.measured()) {
            double theta = detail::angle_of(*s.settings[i], name());
            values.push_back(theta < std::numbers::pi / 2 - 1e-12 ? sign : -sign);
        }
        return detail::deterministic_product(s, values, name());
    }
};

/// Points at angles k pi/16 (k < 32); an observable at theta reads +1 when theta - lambda,
/// wrapped into [-pi, pi), lies in [-pi/2, pi/2), and -1 otherwise.
class LocalCosineResponseModel : public HVModel {
   public:
    explicit LocalCosineResponseModel(size_t points = 32) : points_(points) {
        if (points == 0 || points % 2 != 0) {
            throw ModelError("local-cosine model needs an even, positive number of points");
        }
    }
    std::string name() const override { return "local-cosine"; }
    LambdaSpace lambda_space() const override {
        std::vector<std::string> p;
        for (size_t k = 0; k < points_; k++) {
            p.push_back(std::to_string(k) + "pi/" + std::to_string(points_ / 2));
        }
        return LambdaSpace::uniform(p);
    }
    std::vector<double> distribution(const Scenario &s, size_t lambda) const override {
        const double step = 2.0 * std::numbers::pi / static_cast<double>(points_);
        const double lam = static_cast<double>(lambda) * step;
        std::vector<double> values;
        for (size_t i : s.measured()) {
            double diff = std::remainder(detail::angle_of(*s.settings[i], name()) - lam, 2.0 * std::numbers::pi);
            if (diff >= std::numbers::pi - 1e-12) {
                diff -= 2.0 * std::numbers::pi;
            }
            bool plus = diff >= -std::numbers::pi / 2 - 1e-12 && diff < std::numbers::pi / 2 - 1e-12;
            values.push_back(plus ? 1.0 : -1.0);
        }
        return detail::deterministic_product(s, values, name());
    }

   private:
    size_t points_;
};

/// Quantum on average, but at each of two points the first party's +1 probability moves by
/// +delta or -delta whenever another party measures. The rest of the joint distribution keeps
/// its quantum marginal.
class SignallingToyModel : public HVModel {
   public:
    explicit SignallingToyModel(double delta = 0.1) : delta_(delta) {
        if (!(delta > 0 && delta < 0.5)) {
            throw ModelError("signalling shift must lie in (0, 1/2)");
        }
    }
    std::string name() const override { return "signalling-toy"; }
    double delta() const { return delta_; }
    LambdaSpace lambda_space() const override { return LambdaSpace::uniform({"up", "down"}); }
    std::vector<double> distribution(const Scenario &s, size_t lambda) const override {
        auto d = born_distribution(s);
        auto m = s.measured();
        if (m.size() < 2 || m.front() != 0) {
            return d;
        }
        const auto &x = *s.settings[0];
        auto plus = x.find(1.0);
        auto minus = x.find(-1.0);
        if (!plus || !minus) {
            throw ModelError(name() + ": first party's observable needs eigenvalues +1 and -1");
        }
        const double shift = lambda == 0 ? delta_ : -delta_;
        const size_t rest = d.size() / x.size();
        for (size_t r = 0; r < rest; r++) {
            double weight = 0;
            for (size_t i = 0; i < x.size(); i++) {
                weight += d[i * rest + r];
            }
            double &up = d[*plus * rest + r];
            double &down = d[*minus * rest + r];
            up += shift * weight;
            down -= shift * weight;
            if (up < -1e-15 || down < -1e-15) {
                throw ModelError(name() + " is undefined on " + s.name + ": shift exceeds a joint probability");
            }
            up = std::max(up, 0.0);
            down = std::max(down, 0.0);
        }
        return d;
    }

   private:
    double delta_;
};

/// Fixture by name: trivial, deterministic-chain, local-cosine, signalling-toy.
inline std::unique_ptr<HVModel> make_fixture(const std::string &name) {
    if (name == "trivial") {
        return std::make_unique<TrivialModel>();
    }
    if (name == "deterministic-chain") {
        return std::make_unique<DeterministicChainModel>();
    }
    if (name == "local-cosine") {
        return std::make_unique<LocalCosineResponseModel>();
    }
    if (name == "signalling-toy") {
        return std::make_unique<SignallingToyModel>();
    }
    throw PreconditionError("unknown model fixture '" + name + "'");
}

inline std::vector<std::string> fixture_names() {
    return {"trivial", "deterministic-chain", "local-cosine", "signalling-toy"};
}

}  // namespace parind::hv
