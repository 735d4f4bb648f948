#include "csv.hpp"

#include <fstream>
#include <sstream>

#include "error.hpp"

namespace hlucb::csv {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Table parse(std::istream& in, const std::string& source) {
  Table table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      std::ostringstream msg;
      msg << source << ":" << line_no << ": expected " << table.header.size()
          << " fields, found " << fields.size();
      fail(ErrorCode::Parse, msg.str());
    }
    table.rows.push_back(Row{line_no, std::move(fields)});
  }
  if (!have_header) fail(ErrorCode::Parse, source + ": missing header line");
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  return parse(in, path);
}

void require_header(const Table& table, const std::vector<std::string>& expected,
                    const std::string& source) {
  if (table.header == expected) return;
  std::string want;
  for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
  fail(ErrorCode::Parse, source + ":1: expected header '" + want + "'");
}

}  // namespace hlucb::csv
