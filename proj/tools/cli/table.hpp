// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace tailrisk_cli {

using Cell = std::variant<double, std::int64_t, std::uint64_t, std::string>;

/// Column-ordered result rows, written as CSV or JSON.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct Metadata {
    std::string version;
    std::uint64_t seed = 0;
    std::string pool_hash;
};

/// Shortest round-trip decimal; "inf", "-inf" and "nan" otherwise.
std::string format_number(double x);

/// Leading "# tailrisk <version> seed=<seed> pool=<hash>" line, a header
/// row and one line per row, all LF-terminated.
void write_csv(std::ostream& out, const Metadata& meta, const Table& table);

/// {"metadata": {...}, "rows": [{column: value, ...}, ...]}. Infinite
/// numbers become the string "inf", NaN becomes null.
void write_json(std::ostream& out, const Metadata& meta, const Table& table);

}  // namespace tailrisk_cli
