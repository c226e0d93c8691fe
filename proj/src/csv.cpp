#include "urbangraph/csv.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "urbangraph/error.hpp"

namespace urbangraph {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidIndex: return "invalid-index";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Data: return "data";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::EmptyPopulation: return "empty-population";
    case ErrorKind::DegeneratePerturbation: return "degenerate-perturbation";
    case ErrorKind::DegenerateGroup: return "degenerate-group";
    case ErrorKind::ModelDegenerate: return "model-degenerate";
    case ErrorKind::Feasibility: return "feasibility";
  }
  return "unknown";
}

namespace csv {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Table read(std::istream& in, std::string_view source_name) {
  Table table;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (!have_header) {
      table.header = split(body);
      table.header_line = number;
      have_header = true;
      continue;
    }
    Row row{number, split(body)};
    if (row.fields.size() != table.header.size()) {
      fail(ErrorKind::Parse,
           fmt::format("{}:{}: expected {} fields, found {}", source_name, number,
                       table.header.size(), row.fields.size()));
    }
    table.rows.push_back(std::move(row));
  }
  if (in.bad()) {
    fail(ErrorKind::Io, fmt::format("{}: read error", source_name));
  }
  if (!have_header) {
    fail(ErrorKind::Parse, fmt::format("{}: missing header line", source_name));
  }
  return table;
}

std::size_t column(const Table& table, std::string_view name, std::string_view source) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == name) return i;
  }
  fail(ErrorKind::Parse, fmt::format("{}:{}: missing column '{}'", source, table.header_line, name));
}

std::int64_t parse_int(std::string_view text, std::size_t line, std::string_view source) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    fail(ErrorKind::Parse, fmt::format("{}:{}: '{}' is not an integer", source, line, text));
  }
  return value;
}

double parse_double(std::string_view text, std::size_t line, std::string_view source) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty() || !std::isfinite(value)) {
    fail(ErrorKind::Parse, fmt::format("{}:{}: '{}' is not a finite number", source, line, text));
  }
  return value;
}

}  // namespace csv
}  // namespace urbangraph
