#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "multcancel/core/errors.hpp"
#include "multcancel/core/format.hpp"

namespace multcancel::report {

// Flat table written as CSV, one row per tuple/alpha or sample.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    if (row.size() != header.size()) throw ConfigError("table '" + name + "': row width does not match the header");
    rows.push_back(std::move(row));
  }
};

// Two-column plot data (x y per line).
struct Series {
  std::string name;
  std::string x_label, y_label;
  std::vector<std::pair<double, double>> points;
};

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline void write_table(const std::filesystem::path& path, const Table& t) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path.string() + "' (config key 'out')");
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << csv_cell(t.header[i]);
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
    os << '\n';
  }
}

inline void write_series(const std::filesystem::path& path, const Series& s) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path.string() + "' (config key 'out')");
  os << "# " << s.x_label << ' ' << s.y_label << '\n';
  for (const auto& [x, y] : s.points) os << format_number(x) << ' ' << format_number(y) << '\n';
}

}  // namespace multcancel::report
