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

#include <gtest/gtest.h>

#include <cstdlib>

#include "lab/commands.hpp"
#include "lab/config.hpp"

using namespace parind::lab;

namespace {

ExperimentConfig config(const std::string &command, const Json &fields = Json::object()) {
    ExperimentConfig cfg;
    cfg.command = command;
    apply_config_json(fields, cfg);
    return cfg;
}

std::vector<std::string> lines(const std::string &text) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        out.push_back(text.substr(start, end - start));
        start = end == std::string::npos ? text.size() : end + 1;
    }
    return out;
}

std::string join(const std::vector<std::string> &ls) {
    std::string s;
    for (const auto &l : ls) {
        s += l + "\n";
    }
    return s;
}

TEST(LabConfig, CoefficientsAcceptFractionsAndRest) {
    auto c = parse_coefficients("1/3,2/3", ',');
    ASSERT_TRUE(c.exact.has_value());
    EXPECT_EQ(c.values.size(), 2u);
    auto p = parse_coefficients("1/pi,rest", ',');
    EXPECT_FALSE(p.exact.has_value());
    EXPECT_NEAR(p.values[1], 1 - 1 / 3.141592653589793, 1e-15);
    EXPECT_THROW(parse_coefficients("1/2,1/3", ','), ConfigError);
    EXPECT_THROW(parse_coefficients("-1/2,3/2", ','), ConfigError);
}

TEST(LabConfig, UnknownKeysAndBadListsAreRejected) {
    EXPECT_THROW(config("chain", {{"frobnicate", 1}}), ConfigError);
    EXPECT_THROW(run_command(config("chain", {{"N", "0"}})), ConfigError);
    EXPECT_THROW(run_command(config("embezzle", {{"coeffs", "1/pi,rest"}})), ConfigError);
    EXPECT_THROW(run_command(config("audit", {{"model", "no-such-model"}})), ConfigError);
}

TEST(LabConfig, LaterFieldsOverrideEarlierOnes) {
    ExperimentConfig cfg;
    cfg.command = "chain";
    apply_config_json({{"N", "1,2"}, {"seed", 5}}, cfg);
    apply_config_json({{"N", "4"}}, cfg);
    EXPECT_EQ(cfg.N, std::vector<int>{4});
    EXPECT_EQ(cfg.seed, 5u);
}

TEST(LabConfig, EnvironmentOverridesWorkers) {
    auto cfg = config("couple", {{"workers", 3}});
    ::setenv("PARIND_LAB_WORKERS", "2", 1);
    EXPECT_EQ(cfg.resolved_workers(), 2u);
    ::unsetenv("PARIND_LAB_WORKERS");
    EXPECT_EQ(cfg.resolved_workers(), 3u);
}

TEST(LabReport, ChainReportValidates) {
    auto out = run_command(config("chain", {{"N", "1,2,4"}}));
    EXPECT_TRUE(out.passed());
    EXPECT_EQ(out.rows, 3u);
    auto v = validate_text(out.report, schemas(), true);
    EXPECT_TRUE(v.valid());
    EXPECT_EQ(v.command, "chain");
}

TEST(LabReport, CorruptedCellIsReportedByCoordinate) {
    auto ls = lines(run_command(config("chain", {{"N", "1,2,4"}})).report);
    ASSERT_GE(ls.size(), 4u);
    auto &row = ls[3];
    auto first = row.find(',');
    auto second = row.find(',', first + 1);
    auto third = row.find(',', second + 1);
    row = row.substr(0, second + 1) + "0.25" + row.substr(third);
    auto v = validate_text(join(ls), schemas(), true);
    ASSERT_FALSE(v.valid());
    EXPECT_NE(v.issues.front().where.find("line 4, column 3 (I_N)"), std::string::npos) << v.issues.front().where;
}

TEST(LabReport, StrictRejectsAddedColumnLenientAccepts) {
    auto ls = lines(run_command(config("chain", {{"N", "2"}})).report);
    ls[1] += ",extra";
    for (size_t i = 2; i < ls.size(); i++) {
        ls[i] += ",1";
    }
    const auto text = join(ls);
    EXPECT_FALSE(validate_text(text, schemas(), true).valid());
    auto lenient = validate_text(text, schemas(), false);
    EXPECT_TRUE(lenient.valid());
    EXPECT_FALSE(lenient.notes.empty());
}

TEST(LabReport, JsonCorruptionUsesPointerCoordinates) {
    auto out = run_command(config("chain", {{"N", "1,2"}, {"format", "json"}}));
    auto j = Json::parse(out.report);
    j["rows"][1]["I_N"] = 0.5;
    auto v = validate_text(dump(j), schemas(), true);
    ASSERT_FALSE(v.valid());
    EXPECT_EQ(v.issues.front().where, "/rows/1/I_N");
}

TEST(LabReport, SampledReportsAreDeterministicAcrossWorkerCounts) {
    auto one = run_command(config("couple", {{"samples", 60}, {"seed", 9}, {"workers", 1}}));
    auto four = run_command(config("couple", {{"samples", 60}, {"seed", 9}, {"workers", 4}}));
    EXPECT_EQ(one.report, four.report);
    auto other = run_command(config("couple", {{"samples", 60}, {"seed", 10}, {"workers", 4}}));
    EXPECT_NE(one.report, other.report);
}

TEST(LabAudit, DeterministicChainIsRefutedAndValidates) {
    auto out = run_command(config("audit", {{"model", "deterministic-chain"}, {"N-max", 4}}));
    EXPECT_FALSE(out.passed());
    auto j = Json::parse(out.report);
    EXPECT_EQ(j["refuted_at"], 2);
    EXPECT_TRUE(validate_text(out.report, schemas(), true).valid());
    j["refuted_at"] = 3;
    EXPECT_FALSE(validate_text(dump(j), schemas(), true).valid());
}

TEST(LabAudit, TrivialModelPasses) {
    auto out = run_command(config("audit", {{"model", "trivial"}, {"N-max", 4}}));
    EXPECT_TRUE(out.passed());
}

}  // namespace
