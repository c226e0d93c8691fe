#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace urbangraph::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

// Reads a comma-separated table. Blank lines and lines starting with '#' are
// skipped; fields are trimmed. The first non-skipped line is the header.
struct Table {
  std::vector<std::string> header;
  std::size_t header_line = 0;
  std::vector<Row> rows;
};

Table read(std::istream& in, std::string_view source_name);

// Column lookup by header name; throws a parse error naming `source` if absent.
std::size_t column(const Table& table, std::string_view name, std::string_view source);

std::int64_t parse_int(std::string_view text, std::size_t line, std::string_view source);
double parse_double(std::string_view text, std::size_t line, std::string_view source);

}  // namespace urbangraph::csv
