// SPDX-License-Identifier: Apache-2.0
#include "table.hpp"

#include <charconv>
#include <cmath>

#include <json.hpp>

namespace tailrisk_cli {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

struct CsvCell {
    std::string operator()(double x) const { return format_number(x); }
    std::string operator()(std::int64_t x) const { return std::to_string(x); }
    std::string operator()(std::uint64_t x) const { return std::to_string(x); }
    std::string operator()(const std::string& s) const {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + '"';
    }
};

struct JsonCell {
    nlohmann::ordered_json operator()(double x) const {
        if (std::isnan(x)) return nullptr;
        if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
        return x;
    }
    nlohmann::ordered_json operator()(std::int64_t x) const { return x; }
    nlohmann::ordered_json operator()(std::uint64_t x) const { return x; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
};

}  // namespace

void write_csv(std::ostream& out, const Metadata& meta, const Table& table) {
    out << "# tailrisk " << meta.version << " seed=" << meta.seed << " pool=" << meta.pool_hash << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << std::visit(CsvCell{}, row[i]);
        out << '\n';
    }
}

void write_json(std::ostream& out, const Metadata& meta, const Table& table) {
    nlohmann::ordered_json doc;
    doc["metadata"] = {{"version", meta.version}, {"seed", meta.seed}, {"pool_hash", meta.pool_hash}};
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = std::visit(JsonCell{}, row[i]);
        doc["rows"].push_back(std::move(obj));
    }
    out << doc.dump(2) << '\n';
}

}  // namespace tailrisk_cli
