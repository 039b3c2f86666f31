// SPDX-License-Identifier: Apache-2.0
#include "pool_config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <type_traits>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace tailrisk::pool_config {
namespace {

using recovery::MeanMap;
using recovery::MeanMapKind;
using recovery::RecoveryModel;

struct Value {
    std::optional<std::string> text;
    double number = 0.0;
    int line = 0;
};

using Table = std::map<std::string, Value>;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

bool valid_key(std::string_view key) {
    if (key.empty()) return false;
    for (char c : key)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
    return key.front() != '.' && key.back() != '.';
}

double parse_real(std::string_view s, int line) {
    s = trim(s);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr == s.data()) throw ConfigError("expected a number, got '" + std::string(s) + "'", line);
    if (ptr != end) throw ConfigError("trailing characters after number '" + std::string(s) + "'", line);
    return v;
}

Value parse_scalar(std::string_view s, int line) {
    s = trim(s);
    Value v;
    v.line = line;
    if (s.empty()) throw ConfigError("missing value", line);
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') throw ConfigError("unterminated string", line);
        v.text = std::string(s.substr(1, s.size() - 2));
        return v;
    }
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        const double num = parse_real(s.substr(0, slash), line);
        const double den = parse_real(s.substr(slash + 1), line);
        if (den == 0.0) throw ConfigError("zero denominator", line);
        v.number = num / den;
        return v;
    }
    v.number = parse_real(s, line);
    return v;
}

void insert(Table& table, const std::string& key, Value v, int line) {
    if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'", line);
    if (!table.emplace(key, std::move(v)).second) throw ConfigError("duplicate key '" + key + "'", line);
}

// `{ a = 1, b = "x" }` flattened into prefix.a, prefix.b.
void parse_inline_table(std::string_view body, const std::string& prefix, Table& table, int line) {
    body = trim(body);
    if (body.size() < 2 || body.back() != '}') throw ConfigError("unterminated inline table", line);
    body = body.substr(1, body.size() - 2);
    std::size_t start = 0;
    bool in_string = false;
    for (std::size_t i = 0; i <= body.size(); ++i) {
        if (i < body.size() && body[i] == '"') in_string = !in_string;
        if (i == body.size() || (body[i] == ',' && !in_string)) {
            const auto item = trim(body.substr(start, i - start));
            start = i + 1;
            if (item.empty()) continue;
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) throw ConfigError("expected key = value in inline table", line);
            insert(table, prefix + "." + std::string(trim(item.substr(0, eq))),
                   parse_scalar(item.substr(eq + 1), line), line);
        }
    }
}

const Value& require(const Table& t, const std::string& key, int line) {
    auto it = t.find(key);
    if (it == t.end()) throw ConfigError("missing required key '" + key + "'", line);
    return it->second;
}

double require_number(const Table& t, const std::string& key, int line) {
    const Value& v = require(t, key, line);
    if (v.text) throw ConfigError("key '" + key + "' must be a number", v.line);
    return v.number;
}

pool::TypeSpec build_type(const Table& t, int header_line) {
    static const std::map<std::string, std::vector<std::string>> allowed = {
        {"point_mass", {"r0"}},
        {"beta_affine", {"base", "slope", "anchor", "nodes"}},
        {"beta_quadratic", {"base", "slope", "curvature", "anchor", "nodes"}},
        {"beta_constant", {"base", "anchor", "nodes"}},
    };

    const Value& kind_v = require(t, "recovery.kind", header_line);
    if (!kind_v.text) throw ConfigError("recovery.kind must be a string", kind_v.line);
    const std::string kind = *kind_v.text;
    auto spec = allowed.find(kind);
    if (spec == allowed.end()) throw ConfigError("unknown recovery kind '" + kind + "'", kind_v.line);

    for (const auto& [key, v] : t) {
        if (key == "weight" || key == "default_prob" || key == "recovery.kind") continue;
        if (key.rfind("recovery.", 0) == 0) {
            const std::string param = key.substr(9);
            const auto& ok = spec->second;
            if (std::find(ok.begin(), ok.end(), param) == ok.end())
                throw ConfigError("parameter '" + param + "' is not valid for recovery kind '" + kind + "'", v.line);
            continue;
        }
        throw ConfigError("unknown key '" + key + "'", v.line);
    }

    const double weight = require_number(t, "weight", header_line);
    const double p = require_number(t, "default_prob", header_line);
    const auto num = [&](const char* k) { return require_number(t, std::string("recovery.") + k, header_line); };
    std::size_t nodes = RecoveryModel::kDefaultNodes;
    if (auto it = t.find("recovery.nodes"); it != t.end()) {
        const double n = it->second.number;
        if (it->second.text || n < 2 || n != std::floor(n) || n > 4096)
            throw ConfigError("recovery.nodes must be an integer in [2, 4096]", it->second.line);
        nodes = static_cast<std::size_t>(n);
    }
    const double anchor = t.count("recovery.anchor") ? num("anchor") : 0.0;

    try {
        if (kind == "point_mass") return {weight, p, RecoveryModel::point_mass(num("r0"))};
        if (kind == "beta_affine")
            return {weight, p, RecoveryModel::beta(MeanMap::affine(num("base"), num("slope"), anchor), nodes)};
        if (kind == "beta_quadratic")
            return {weight, p,
                    RecoveryModel::beta(MeanMap::quadratic(num("base"), num("slope"), num("curvature"), anchor), nodes)};
        MeanMap m = MeanMap::constant(num("base"));
        m.anchor = anchor;
        return {weight, p, RecoveryModel::beta(m, nodes)};
    } catch (const DomainError& e) {
        throw ConfigError(e.what(), header_line);
    }
}

std::string format_real(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    std::string s(buf.data(), ptr);
    // Keep numbers recognisably real in the text form.
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

}  // namespace

pool::PoolSpec parse(std::string_view text) {
    enum class Section { None, Pool, Type };
    Section section = Section::None;
    std::vector<std::pair<Table, int>> types;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const auto line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line == "[pool]") {
            if (section != Section::None) throw ConfigError("[pool] must appear once, before any types", line_no);
            section = Section::Pool;
            continue;
        }
        if (line == "[[pool.types]]") {
            if (section == Section::None) throw ConfigError("[[pool.types]] before [pool]", line_no);
            section = Section::Type;
            types.emplace_back(Table{}, line_no);
            continue;
        }
        if (line.front() == '[') throw ConfigError("unknown section " + std::string(line), line_no);

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected key = value", line_no);
        const std::string key(trim(line.substr(0, eq)));
        const auto rhs = trim(line.substr(eq + 1));
        if (section != Section::Type) throw ConfigError("key '" + key + "' outside a [[pool.types]] entry", line_no);
        Table& table = types.back().first;
        if (!rhs.empty() && rhs.front() == '{') {
            if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'", line_no);
            parse_inline_table(rhs, key, table, line_no);
        } else {
            insert(table, key, parse_scalar(rhs, line_no), line_no);
        }
    }
    if (section == Section::None) throw ConfigError("missing [pool] section");
    if (types.empty()) throw ConfigError("pool declares no [[pool.types]]");

    std::vector<pool::TypeSpec> specs;
    specs.reserve(types.size());
    for (const auto& [table, header] : types) specs.push_back(build_type(table, header));
    try {
        return pool::PoolSpec(std::move(specs));
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

std::string serialize(const pool::PoolSpec& spec) {
    std::string out = "[pool]\n";
    for (const auto& t : spec.types()) {
        out += "\n[[pool.types]]\n";
        out += "weight = " + format_real(t.weight) + "\n";
        out += "default_prob = " + format_real(t.p) + "\n";
        std::visit(
            [&](const auto& law) {
                using T = std::decay_t<decltype(law)>;
                if constexpr (std::is_same_v<T, recovery::PointMass>) {
                    out += "recovery.kind = \"point_mass\"\n";
                    out += "recovery.r0 = " + format_real(law.r0) + "\n";
                } else {
                    const MeanMap& m = law.mean_map;
                    out += "recovery.kind = \"" + std::string(recovery::to_string(m.kind)) + "\"\n";
                    out += "recovery.base = " + format_real(m.base) + "\n";
                    if (m.kind != MeanMapKind::Constant) out += "recovery.slope = " + format_real(m.slope) + "\n";
                    if (m.kind == MeanMapKind::Quadratic)
                        out += "recovery.curvature = " + format_real(m.curvature) + "\n";
                    out += "recovery.anchor = " + format_real(m.anchor) + "\n";
                    if (t.recovery.quadrature_nodes() != RecoveryModel::kDefaultNodes)
                        out += "recovery.nodes = " + std::to_string(t.recovery.quadrature_nodes()) + "\n";
                }
            },
            t.recovery.law());
    }
    return out;
}

std::string pool_hash(const pool::PoolSpec& spec) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize(spec)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = hex[h & 0xF];
    return s;
}

}  // namespace tailrisk::pool_config
