#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

namespace hlucb::csv {

struct Row {
  std::size_t line = 0;  // 1-based line in the source
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
};

// Plain comma-separated text without quoting. Fields are whitespace-trimmed,
// blank lines skipped. Every row must have as many fields as the header.
// Throws Error{Parse} citing `source` and the line number.
Table parse(std::istream& in, const std::string& source);
Table read_file(const std::string& path);

// Throws unless the header matches `expected` exactly.
void require_header(const Table& table, const std::vector<std::string>& expected,
                    const std::string& source);

}  // namespace hlucb::csv
