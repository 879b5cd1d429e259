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

// Report tables, their CSV/JSON encodings, and schema validation.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace parind::lab {

using Json = nlohmann::ordered_json;
using Cell = std::variant<std::string, std::int64_t, double>;

inline constexpr int kSchemaVersion = 1;

/// Shortest text that parses back to the same double.
std::string format_double(double v);
std::string cell_text(const Cell &c);

struct Table {
    std::string command;
    double tol = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string to_csv(const Table &t);
Json to_json(const Table &t);
/// Two-space indented JSON with a trailing newline.
std::string dump(const Json &j);

/// One problem found by validation, located by a cell or field coordinate.
struct Issue {
    std::string where;
    std::string message;
};

struct Validation {
    std::string command;
    std::string format;
    size_t rows = 0;
    std::vector<Issue> issues;
    /// Tolerated differences in lenient mode.
    std::vector<std::string> notes;

    bool valid() const { return issues.empty(); }
};

/// Read access to one data row plus a sink for cell-level issues.
class RowView {
   public:
    RowView(std::map<std::string, std::string> cells, std::function<std::string(const std::string &)> locate,
            std::vector<Issue> &issues)
        : cells_(std::move(cells)), locate_(std::move(locate)), issues_(&issues) {}

    const std::string &text(const std::string &column) const;
    /// Parsed number; flags the cell and returns NaN when it is not numeric.
    double num(const std::string &column) const;
    std::optional<std::int64_t> integer(const std::string &column) const;
    void flag(const std::string &column, const std::string &message) const;
    /// Flags the cell unless it holds `expected` within abs + rel tolerance.
    void expect_close(const std::string &column, double expected, double tol = 1e-12) const;
    void expect_text(const std::string &column, const std::string &expected) const;
    bool flagged() const { return flagged_; }

   private:
    std::map<std::string, std::string> cells_;
    std::function<std::string(const std::string &)> locate_;
    std::vector<Issue> *issues_;
    mutable bool flagged_ = false;
};

struct RowContext {
    double tol = 0;
    std::uint64_t seed = 0;
    size_t index = 0;
    /// Earlier data rows, already checked.
    const std::vector<std::map<std::string, std::string>> *previous = nullptr;
};

/// Column layout of one table command and the recomputation applied to each row.
struct Schema {
    std::string command;
    std::vector<std::string> columns;
    std::function<void(const RowView &, const RowContext &)> check;
};

/// Validator for JSON documents that are not tables.
using DocumentCheck = std::function<void(const Json &, bool strict, Validation &)>;

struct SchemaRegistry {
    std::map<std::string, Schema> tables;
    std::map<std::string, DocumentCheck> documents;
};

Validation validate_text(const std::string &text, const SchemaRegistry &registry, bool strict);

/// Builds rows in schema column order; every column must be set exactly once.
class RowBuilder {
   public:
    explicit RowBuilder(const std::vector<std::string> &columns) : columns_(&columns), cells_(columns.size()) {}
    RowBuilder &set(const std::string &column, Cell value);
    std::vector<Cell> finish() const;

   private:
    const std::vector<std::string> *columns_;
    std::vector<std::optional<Cell>> cells_;
};

}  // namespace parind::lab
