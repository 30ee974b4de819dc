#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "sustain/error.hpp"

namespace sustain::csv {

// Comma-separated table with a header row. No quoting; blank lines and
// lines starting with '#' are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // source line of each row

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ValidationError("CSV is missing column '" + std::string(name) + "'");
  }
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline Table read(std::istream& in, bool has_header = true) {
  Table t;
  std::string line;
  std::size_t n = 0;
  bool header_done = !has_header;
  while (std::getline(in, line)) {
    ++n;
    const auto trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    auto cells = split(trimmed);
    if (!header_done) {
      t.header = std::move(cells);
      header_done = true;
      continue;
    }
    if (has_header && cells.size() != t.header.size()) {
      throw ValidationError("CSV line " + std::to_string(n) + " has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(n);
  }
  return t;
}

inline double to_double(const std::string& cell, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("CSV line " + std::to_string(line) + ": '" + cell + "' is not a number");
  }
}

}  // namespace sustain::csv
