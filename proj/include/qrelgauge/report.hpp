#pragma once

// Analysis reports: a name, ordered string metadata, and named tables of
// typed cells. Reports serialize to one JSON document or to one CSV file per
// table. Numbers are written with 6 significant digits unless full precision
// is requested, in which case JSON output round-trips exactly.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qrelgauge/error.hpp"

namespace qrelgauge {

using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns.size())
            throw Error(Errc::ConfigError, "table '" + name + "': row has " + std::to_string(row.size()) +
                                               " cells, expected " + std::to_string(columns.size()));
        rows.push_back(std::move(row));
    }

    friend bool operator==(const Table&, const Table&) = default;
};

struct Report {
    std::string name;
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<Table> tables;

    void set_meta(std::string key, std::string value) {
        for (auto& [k, v] : meta)
            if (k == key) {
                v = std::move(value);
                return;
            }
        meta.emplace_back(std::move(key), std::move(value));
    }

    const Table& table(std::string_view table_name) const {
        for (const auto& t : tables)
            if (t.name == table_name)
                return t;
        throw Error(Errc::ConfigError, "report '" + name + "' has no table '" + std::string(table_name) + "'");
    }

    friend bool operator==(const Report&, const Report&) = default;
};

enum class Precision { Significant6, Full };

/// Non-finite values become strings so every format can carry them.
inline Cell number_cell(double v) {
    if (std::isnan(v))
        return std::string("nan");
    if (std::isinf(v))
        return std::string(v > 0 ? "inf" : "-inf");
    return v;
}

inline std::string format_number(double v, Precision precision) {
    char buf[40];
    std::snprintf(buf, sizeof buf, precision == Precision::Full ? "%.17g" : "%.6g", v);
    return buf;
}

namespace detail {

inline double round_significant(double v, Precision precision) {
    if (precision == Precision::Full || !std::isfinite(v))
        return v;
    return std::strtod(format_number(v, precision).c_str(), nullptr);
}

inline nlohmann::ordered_json cell_to_json(const Cell& c, Precision precision) {
    return std::visit(
        [&](const auto& v) -> nlohmann::ordered_json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>)
                return nullptr;
            else if constexpr (std::is_same_v<T, double>)
                return round_significant(v, precision);
            else
                return v;
        },
        c);
}

inline Cell cell_from_json(const nlohmann::json& j) {
    if (j.is_null())
        return std::monostate{};
    if (j.is_number_integer())
        return j.get<std::int64_t>();
    if (j.is_number_float())
        return j.get<double>();
    if (j.is_string())
        return j.get<std::string>();
    throw Error(Errc::SchemaError, "unsupported report cell: " + j.dump());
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace detail

inline std::string emit_json(const Report& report, Precision precision = Precision::Significant6) {
    nlohmann::ordered_json doc;
    doc["name"] = report.name;
    doc["meta"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.meta)
        doc["meta"][k] = v;
    doc["tables"] = nlohmann::ordered_json::array();
    for (const auto& t : report.tables) {
        nlohmann::ordered_json jt;
        jt["name"] = t.name;
        jt["columns"] = t.columns;
        jt["rows"] = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) {
            auto jr = nlohmann::ordered_json::array();
            for (const auto& c : row)
                jr.push_back(detail::cell_to_json(c, precision));
            jt["rows"].push_back(std::move(jr));
        }
        doc["tables"].push_back(std::move(jt));
    }
    return doc.dump(2) + "\n";
}

inline Report parse_report_json(std::string_view text) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::ParseError, std::string("report JSON: ") + e.what());
    }
    try {
        Report r;
        r.name = doc.at("name").get<std::string>();
        for (const auto& [k, v] : doc.at("meta").items())
            r.meta.emplace_back(k, v.get<std::string>());
        for (const auto& jt : doc.at("tables")) {
            Table t;
            t.name = jt.at("name").get<std::string>();
            t.columns = jt.at("columns").get<std::vector<std::string>>();
            for (const auto& jr : jt.at("rows")) {
                std::vector<Cell> row;
                for (const auto& c : jr)
                    row.push_back(detail::cell_from_json(c));
                t.add_row(std::move(row));
            }
            r.tables.push_back(std::move(t));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::SchemaError, std::string("report JSON: ") + e.what());
    }
}

/// One table as CSV: header line then one line per row; null cells are empty.
inline std::string emit_csv(const Table& table, Precision precision = Precision::Significant6) {
    std::string out;
    auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i)
                out += ',';
            out += detail::csv_escape(fields[i]);
        }
        out += '\n';
    };
    if (table.columns.empty())
        return out;
    line(table.columns);
    for (const auto& row : table.rows) {
        std::vector<std::string> fields;
        for (const auto& c : row)
            fields.push_back(std::visit(
                [&](const auto& v) -> std::string {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::monostate>)
                        return "";
                    else if constexpr (std::is_same_v<T, std::int64_t>)
                        return std::to_string(v);
                    else if constexpr (std::is_same_v<T, double>)
                        return format_number(v, precision);
                    else
                        return v;
                },
                c));
        line(fields);
    }
    return out;
}

} // namespace qrelgauge
