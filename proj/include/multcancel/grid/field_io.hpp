#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "multcancel/grid/grid.hpp"

namespace multcancel {

// CSV layout:
//   # kind=physical|spectral
//   # <key>=<value>          (optional metadata, one per line)
//   dim,half_extent,points_per_axis
//   <n>,<L>,<M>
//   re,im
//   <re>,<im>                (M^n rows, row-major, last axis fastest)
struct FieldFile {
  std::string kind;
  Grid grid;
  std::vector<cplx> values;
  std::map<std::string, std::string> metadata;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_field_csv(std::ostream& os, const std::string& kind, const Grid& grid,
                            const std::vector<cplx>& values,
                            const std::map<std::string, std::string>& metadata = {}) {
  os << "# kind=" << kind << "\n";
  for (const auto& [k, v] : metadata) os << "# " << k << "=" << v << "\n";
  os << "dim,half_extent,points_per_axis\n";
  os << grid.dim() << "," << format_double(grid.half_extent()) << "," << grid.points_per_axis() << "\n";
  os << "re,im\n";
  for (const auto& v : values) os << format_double(v.real()) << "," << format_double(v.imag()) << "\n";
}

inline void write_field_csv(std::ostream& os, const SampledField& f,
                            const std::map<std::string, std::string>& metadata = {}) {
  write_field_csv(os, "physical", f.grid(), f.values(), metadata);
}

inline void write_field_csv(std::ostream& os, const SpectralField& f,
                            const std::map<std::string, std::string>& metadata = {}) {
  write_field_csv(os, "spectral", f.grid(), f.values(), metadata);
}

inline FieldFile read_field_csv(std::istream& is) {
  FieldFile out;
  std::string line;
  int stage = 0;
  std::size_t expected = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto body = line.substr(1);
      while (!body.empty() && body.front() == ' ') body.erase(body.begin());
      auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      auto key = body.substr(0, eq);
      auto value = body.substr(eq + 1);
      if (key == "kind")
        out.kind = value;
      else
        out.metadata[key] = value;
      continue;
    }
    if (stage == 0) {
      stage = 1;  // column names
      continue;
    }
    if (stage == 1) {
      int n = 0, M = 0;
      double L = 0.0;
      char c1 = 0, c2 = 0;
      std::istringstream ls(line);
      if (!(ls >> n >> c1 >> L >> c2 >> M) || c1 != ',' || c2 != ',')
        throw ConfigError("field file: malformed grid header '" + line + "'");
      out.grid = make_grid(n, L, M);
      expected = out.grid.size();
      out.values.reserve(expected);
      stage = 2;
      continue;
    }
    if (stage == 2) {
      stage = 3;  // re,im
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("field file: malformed value row '" + line + "'");
    try {
      out.values.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ConfigError("field file: malformed value row '" + line + "'");
    }
  }
  if (stage < 3) throw ConfigError("field file: missing header");
  if (out.values.size() != expected)
    throw ConfigError("field file: expected " + std::to_string(expected) + " values, found " +
                      std::to_string(out.values.size()));
  return out;
}

inline FieldFile read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open field file '" + path + "'");
  return read_field_csv(is);
}

}  // namespace multcancel
