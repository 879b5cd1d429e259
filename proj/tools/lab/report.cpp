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

#include "lab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace parind::lab {

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string cell_text(const Cell &c) {
    if (const auto *s = std::get_if<std::string>(&c)) {
        return *s;
    }
    if (const auto *i = std::get_if<std::int64_t>(&c)) {
        return std::to_string(*i);
    }
    return format_double(std::get<double>(c));
}

namespace {

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + '"';
}

std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); i++) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                i++;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

Json cell_json(const Cell &c) {
    if (const auto *s = std::get_if<std::string>(&c)) {
        return *s;
    }
    if (const auto *i = std::get_if<std::int64_t>(&c)) {
        return *i;
    }
    double d = std::get<double>(c);
    if (!std::isfinite(d)) {
        return format_double(d);
    }
    return d;
}

std::string json_scalar_text(const Json &v) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_number_integer()) {
        return std::to_string(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
        return format_double(v.get<double>());
    }
    if (v.is_boolean()) {
        return v.get<bool>() ? "true" : "false";
    }
    return v.dump();
}

double parse_number(const std::string &s, bool &ok) {
    if (s == "nan") {
        ok = true;
        return std::nan("");
    }
    if (s == "inf" || s == "-inf") {
        ok = true;
        return s[0] == '-' ? -INFINITY : INFINITY;
    }
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    ok = res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty();
    return v;
}

/// key=value tokens of the CSV header comment.
std::map<std::string, std::string> header_tokens(const std::string &line) {
    std::map<std::string, std::string> out;
    std::istringstream in(line.substr(1));
    std::string tok;
    while (in >> tok) {
        auto eq = tok.find('=');
        if (eq != std::string::npos) {
            out[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
    }
    return out;
}

struct TableInput {
    std::string command;
    double tol = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> columns;
    std::vector<std::map<std::string, std::string>> rows;
    std::vector<std::function<std::string(const std::string &)>> locators;
};

void check_rows(const TableInput &in, const Schema &schema, Validation &v) {
    std::vector<std::map<std::string, std::string>> previous;
    for (size_t i = 0; i < in.rows.size(); i++) {
        std::map<std::string, std::string> cells;
        bool complete = true;
        for (const auto &c : schema.columns) {
            auto it = in.rows[i].find(c);
            if (it == in.rows[i].end()) {
                complete = false;
                continue;
            }
            cells[c] = it->second;
        }
        if (!complete) {
            continue;
        }
        RowView row(cells, in.locators[i], v.issues);
        RowContext ctx{in.tol, in.seed, i, &previous};
        try {
            schema.check(row, ctx);
        } catch (const std::exception &e) {
            v.issues.push_back({in.locators[i](""), std::string("row cannot be recomputed: ") + e.what()});
        }
        previous.push_back(std::move(cells));
    }
    v.rows = in.rows.size();
}

void compare_columns(const std::vector<std::string> &found, const Schema &schema, bool strict,
                     const std::string &where, Validation &v) {
    std::set<std::string> expected(schema.columns.begin(), schema.columns.end());
    std::set<std::string> seen;
    for (const auto &c : found) {
        if (!seen.insert(c).second) {
            v.issues.push_back({where, "duplicate column '" + c + "'"});
        }
        if (!expected.count(c)) {
            if (strict) {
                v.issues.push_back({where, "unexpected column '" + c + "' (use lenient mode to accept added columns)"});
            } else {
                v.notes.push_back("ignored added column '" + c + "'");
            }
        }
    }
    for (const auto &c : schema.columns) {
        if (!seen.count(c)) {
            v.issues.push_back({where, "missing column '" + c + "'"});
        }
    }
    if (strict && v.issues.empty() && found != schema.columns) {
        v.issues.push_back({where, "columns out of order"});
    }
}

void validate_csv(const std::string &text, const SchemaRegistry &reg, bool strict, Validation &v) {
    v.format = "csv";
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.empty() || line[0] != '#') {
        v.issues.push_back({"line 1", "missing '# parind-lab ...' header comment"});
        return;
    }
    auto head = header_tokens(line);
    if (head["schema"] != std::to_string(kSchemaVersion)) {
        v.issues.push_back({"line 1", "unsupported schema version '" + head["schema"] + "'"});
        return;
    }
    TableInput t;
    t.command = head["command"];
    v.command = t.command;
    auto schema_it = reg.tables.find(t.command);
    if (schema_it == reg.tables.end()) {
        v.issues.push_back({"line 1", "unknown table command '" + t.command + "'"});
        return;
    }
    bool ok = false;
    t.tol = parse_number(head["tol"], ok);
    if (!ok) {
        v.issues.push_back({"line 1", "header tol is not a number"});
        return;
    }
    try {
        t.seed = std::stoull(head["seed"]);
    } catch (const std::exception &) {
        v.issues.push_back({"line 1", "header seed is not an unsigned integer"});
        return;
    }
    if (!std::getline(in, line)) {
        v.issues.push_back({"line 2", "missing column header"});
        return;
    }
    t.columns = split_csv_line(line);
    compare_columns(t.columns, schema_it->second, strict, "line 2", v);
    if (!v.valid()) {
        return;
    }
    size_t line_no = 2;
    while (std::getline(in, line)) {
        line_no++;
        if (line.empty()) {
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != t.columns.size()) {
            v.issues.push_back({"line " + std::to_string(line_no), "expected " + std::to_string(t.columns.size()) +
                                                                        " fields, found " +
                                                                        std::to_string(fields.size())});
            continue;
        }
        std::map<std::string, std::string> row;
        for (size_t c = 0; c < fields.size(); c++) {
            row[t.columns[c]] = fields[c];
        }
        t.rows.push_back(std::move(row));
        auto cols = t.columns;
        t.locators.push_back([line_no, cols](const std::string &column) {
            auto it = std::find(cols.begin(), cols.end(), column);
            if (it == cols.end()) {
                return "line " + std::to_string(line_no);
            }
            return "line " + std::to_string(line_no) + ", column " + std::to_string(it - cols.begin() + 1) + " (" +
                   column + ")";
        });
    }
    check_rows(t, schema_it->second, v);
}

void validate_json_table(const Json &doc, const Schema &schema, bool strict, Validation &v) {
    static const std::vector<std::string> kTop{"schema", "command", "tol", "seed", "columns", "rows"};
    for (const auto &[k, _] : doc.items()) {
        if (std::find(kTop.begin(), kTop.end(), k) == kTop.end()) {
            if (strict) {
                v.issues.push_back({"/" + k, "unexpected field"});
            } else {
                v.notes.push_back("ignored added field '" + k + "'");
            }
        }
    }
    TableInput t;
    t.command = schema.command;
    if (!doc.contains("tol") || !doc["tol"].is_number() || !doc.contains("seed") ||
        !doc["seed"].is_number_unsigned() || !doc.contains("rows") || !doc["rows"].is_array() ||
        !doc.contains("columns") || !doc["columns"].is_array()) {
        v.issues.push_back({"/", "table needs numeric tol, unsigned seed, columns and rows arrays"});
        return;
    }
    t.tol = doc["tol"].get<double>();
    t.seed = doc["seed"].get<std::uint64_t>();
    for (const auto &c : doc["columns"]) {
        t.columns.push_back(c.is_string() ? c.get<std::string>() : c.dump());
    }
    compare_columns(t.columns, schema, strict, "/columns", v);
    if (!v.valid()) {
        return;
    }
    const auto &rows = doc["rows"];
    for (size_t i = 0; i < rows.size(); i++) {
        const std::string base = "/rows/" + std::to_string(i);
        if (!rows[i].is_object()) {
            v.issues.push_back({base, "row is not an object"});
            continue;
        }
        std::map<std::string, std::string> row;
        for (const auto &[k, val] : rows[i].items()) {
            if (std::find(t.columns.begin(), t.columns.end(), k) == t.columns.end()) {
                v.issues.push_back({base + "/" + k, "field not listed in columns"});
                continue;
            }
            row[k] = json_scalar_text(val);
        }
        for (const auto &c : t.columns) {
            if (!row.count(c)) {
                v.issues.push_back({base + "/" + c, "missing field"});
            }
        }
        t.rows.push_back(std::move(row));
        t.locators.push_back([base](const std::string &column) { return column.empty() ? base : base + "/" + column; });
    }
    check_rows(t, schema, v);
}

void validate_json(const std::string &text, const SchemaRegistry &reg, bool strict, Validation &v) {
    v.format = "json";
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const std::exception &e) {
        v.issues.push_back({"/", std::string("not valid JSON: ") + e.what()});
        return;
    }
    if (!doc.is_object() || !doc.contains("schema") || doc["schema"] != kSchemaVersion || !doc.contains("command") ||
        !doc["command"].is_string()) {
        v.issues.push_back({"/", "missing schema version " + std::to_string(kSchemaVersion) + " or command"});
        return;
    }
    v.command = doc["command"].get<std::string>();
    if (auto it = reg.tables.find(v.command); it != reg.tables.end()) {
        validate_json_table(doc, it->second, strict, v);
        return;
    }
    if (auto it = reg.documents.find(v.command); it != reg.documents.end()) {
        it->second(doc, strict, v);
        return;
    }
    v.issues.push_back({"/command", "unknown command '" + v.command + "'"});
}

}  // namespace

std::string to_csv(const Table &t) {
    std::string out = "# parind-lab schema=" + std::to_string(kSchemaVersion) + " command=" + t.command +
                      " tol=" + format_double(t.tol) + " seed=" + std::to_string(t.seed) + "\n";
    for (size_t c = 0; c < t.columns.size(); c++) {
        out += (c ? "," : "") + csv_field(t.columns[c]);
    }
    out += "\n";
    for (const auto &row : t.rows) {
        for (size_t c = 0; c < row.size(); c++) {
            out += (c ? "," : "") + csv_field(cell_text(row[c]));
        }
        out += "\n";
    }
    return out;
}

Json to_json(const Table &t) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["command"] = t.command;
    j["tol"] = t.tol;
    j["seed"] = t.seed;
    j["columns"] = t.columns;
    j["rows"] = Json::array();
    for (const auto &row : t.rows) {
        Json r = Json::object();
        for (size_t c = 0; c < row.size(); c++) {
            r[t.columns[c]] = cell_json(row[c]);
        }
        j["rows"].push_back(std::move(r));
    }
    return j;
}

std::string dump(const Json &j) { return j.dump(2) + "\n"; }

const std::string &RowView::text(const std::string &column) const {
    auto it = cells_.find(column);
    if (it == cells_.end()) {
        throw std::logic_error("schema check reads unknown column " + column);
    }
    return it->second;
}

double RowView::num(const std::string &column) const {
    bool ok = false;
    double v = parse_number(text(column), ok);
    if (!ok) {
        flag(column, "'" + text(column) + "' is not a number");
        return std::nan("");
    }
    return v;
}

std::optional<std::int64_t> RowView::integer(const std::string &column) const {
    const auto &s = text(column);
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
        flag(column, "'" + s + "' is not an integer");
        return std::nullopt;
    }
    return v;
}

void RowView::flag(const std::string &column, const std::string &message) const {
    flagged_ = true;
    issues_->push_back({locate_(column), message});
}

void RowView::expect_close(const std::string &column, double expected, double tol) const {
    double v = num(column);
    if (std::isnan(v) && std::isnan(expected)) {
        return;
    }
    if (std::isnan(v) || std::isnan(expected) || std::abs(v - expected) > tol * (1 + std::abs(expected))) {
        flag(column, "recorded " + text(column) + ", recomputed " + format_double(expected));
    }
}

void RowView::expect_text(const std::string &column, const std::string &expected) const {
    if (text(column) != expected) {
        flag(column, "recorded '" + text(column) + "', recomputed '" + expected + "'");
    }
}

Validation validate_text(const std::string &text, const SchemaRegistry &registry, bool strict) {
    Validation v;
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        validate_json(text, registry, strict, v);
    } else {
        validate_csv(text, registry, strict, v);
    }
    return v;
}

RowBuilder &RowBuilder::set(const std::string &column, Cell value) {
    auto it = std::find(columns_->begin(), columns_->end(), column);
    if (it == columns_->end()) {
        throw std::logic_error("unknown report column " + column);
    }
    auto &slot = cells_[static_cast<size_t>(it - columns_->begin())];
    if (slot) {
        throw std::logic_error("report column set twice: " + column);
    }
    slot = std::move(value);
    return *this;
}

std::vector<Cell> RowBuilder::finish() const {
    std::vector<Cell> out;
    for (size_t i = 0; i < cells_.size(); i++) {
        if (!cells_[i]) {
            throw std::logic_error("report column left unset: " + (*columns_)[i]);
        }
        out.push_back(*cells_[i]);
    }
    return out;
}

}  // namespace parind::lab
