#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "multcancel/atoms/atoms.hpp"
#include "multcancel/grid/field_io.hpp"

namespace multcancel {

// One slot of a battery tuple: d^beta bump(center, radius).
struct AtomSpec {
  MultiIndex beta;
  std::vector<double> center;
  double radius = 1.0;
};

// m-tuples of certified atoms with a common vanishing order N and a target
// exponent per slot.
struct AtomBattery {
  int m = 0;
  int n = 0;
  int N = 0;
  std::vector<double> p;
  std::vector<std::vector<AtomSpec>> specs;
  std::vector<std::vector<SmoothAtom>> tuples;

  std::size_t size() const { return tuples.size(); }
};

inline constexpr std::size_t kDefaultBatteryTuples = 8;

// Splits |beta| = k over n axes: pattern 0 puts it on the first axis,
// 1 on the last, 2 spreads it as evenly as possible.
inline MultiIndex split_order(int k, int n, int pattern) {
  MultiIndex b = zero_index(n);
  if (n == 1 || pattern == 0) {
    b[0] = k;
  } else if (pattern == 1) {
    b[static_cast<std::size_t>(n - 1)] = k;
  } else {
    for (int i = 0; i < k; ++i) ++b[static_cast<std::size_t>(i % n)];
  }
  return b;
}

// Tuple t uses bits (order, radius, center) = (t>>2, t>>1, t) & 1; slot j
// rotates each bit by j so tuples mix parities, sizes and positions.
// Orders are N+1 or N+2, radii 1/2 or 1, centers 0 or e_1.
inline std::vector<std::vector<AtomSpec>> default_battery_specs(int m, int n, int N,
                                                                std::size_t tuples = kDefaultBatteryTuples) {
  std::vector<std::vector<AtomSpec>> out;
  for (std::size_t t = 0; t < std::min<std::size_t>(tuples, 8); ++t) {
    const int ob = static_cast<int>((t >> 2) & 1), rb = static_cast<int>((t >> 1) & 1), cb = static_cast<int>(t & 1);
    std::vector<AtomSpec> tuple;
    for (int j = 0; j < m; ++j) {
      AtomSpec s;
      const int k = N + 1 + (ob + j) % 2;
      s.beta = split_order(k, n, static_cast<int>((t + static_cast<std::size_t>(j)) % 3));
      s.radius = ((rb + j) % 2) ? 1.0 : 0.5;
      s.center.assign(static_cast<std::size_t>(n), 0.0);
      if ((cb + j) % 2) s.center[0] = 1.0;
      tuple.push_back(std::move(s));
    }
    out.push_back(std::move(tuple));
  }
  return out;
}

inline SmoothAtom build_atom(const AtomSpec& s, const Grid& grid, double p) {
  return normalize(derivative_atom(s.beta, s.center, s.radius, grid), p);
}

// Builds and certifies every slot. Each atom must vanish to order >= N.
inline AtomBattery make_battery(std::vector<std::vector<AtomSpec>> specs, const Grid& grid, int N,
                                const std::vector<double>& p) {
  AtomBattery b;
  if (specs.empty()) throw ConfigError("atom battery is empty");
  b.m = static_cast<int>(specs.front().size());
  b.n = grid.dim();
  b.N = N;
  b.p = p;
  if (static_cast<int>(p.size()) != b.m)
    throw ConfigError("atom battery has " + std::to_string(b.m) + " slots but " + std::to_string(p.size()) +
                      " exponents");
  std::map<std::string, SmoothAtom> cache;
  for (std::size_t t = 0; t < specs.size(); ++t) {
    if (static_cast<int>(specs[t].size()) != b.m)
      throw ConfigError("battery tuple " + std::to_string(t + 1) + " has " + std::to_string(specs[t].size()) +
                        " slots, expected " + std::to_string(b.m));
    std::vector<SmoothAtom> tuple;
    for (int j = 0; j < b.m; ++j) {
      const auto& s = specs[t][static_cast<std::size_t>(j)];
      if (order(s.beta) - 1 < N)
        throw ConfigError("battery tuple " + std::to_string(t + 1) + " slot " + std::to_string(j + 1) +
                          ": |beta| = " + std::to_string(order(s.beta)) + " gives vanishing order below N = " +
                          std::to_string(N));
      const double pj = p[static_cast<std::size_t>(j)];
      const std::string key = to_string(s.beta) + format_point(s.center) + format_number(s.radius) + "/" +
                              format_number(pj);
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, build_atom(s, grid, pj)).first;
      tuple.push_back(it->second);
    }
    b.tuples.push_back(std::move(tuple));
  }
  b.specs = std::move(specs);
  return b;
}

inline AtomBattery default_battery(int m, const Grid& grid, int N, const std::vector<double>& p,
                                   std::size_t tuples = kDefaultBatteryTuples) {
  return make_battery(default_battery_specs(m, grid.dim(), N, tuples), grid, N, p);
}

inline std::vector<double> parse_point(const std::string& text, int n) {
  std::vector<double> v;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cur, &used));
      if (used != cur.size()) throw std::invalid_argument(cur);
    } catch (const std::exception&) {
      throw ConfigError("invalid coordinate '" + cur + "' in '" + text + "'");
    }
    cur.clear();
  };
  for (char ch : text) {
    if (ch == ',' || ch == ' ' || ch == '(' || ch == ')')
      flush();
    else
      cur.push_back(ch);
  }
  flush();
  if (static_cast<int>(v.size()) != n)
    throw ConfigError("point '" + text + "' must have " + std::to_string(n) + " coordinates");
  return v;
}

// Battery file: one tuple per line, slots separated by '|', each slot
// "<beta> <center> <radius>", e.g.  (2) (0) 0.5 | (3) (1) 1
// Blank lines and lines starting with '#' are ignored.
inline std::vector<std::vector<AtomSpec>> parse_battery(std::istream& is, int n) {
  std::vector<std::vector<AtomSpec>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<AtomSpec> tuple;
    std::stringstream ls(line);
    std::string slot;
    while (std::getline(ls, slot, '|')) {
      std::istringstream ss(slot);
      std::string beta, center, radius;
      if (!(ss >> beta >> center >> radius))
        throw ConfigError("battery line " + std::to_string(lineno) + ": expected '<beta> <center> <radius>' per slot");
      AtomSpec s;
      s.beta = parse_multiindex(beta, n);
      s.center = parse_point(center, n);
      try {
        s.radius = std::stod(radius);
      } catch (const std::exception&) {
        throw ConfigError("battery line " + std::to_string(lineno) + ": invalid radius '" + radius + "'");
      }
      tuple.push_back(std::move(s));
    }
    out.push_back(std::move(tuple));
  }
  if (out.empty()) throw ConfigError("battery file contains no tuples");
  return out;
}

inline std::vector<std::vector<AtomSpec>> read_battery_file(const std::string& path, int n) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open battery file '" + path + "'");
  return parse_battery(is, n);
}

// Atom serialization: the field CSV plus metadata describing the support
// cube, vanishing order and provenance (and the recipe of closed forms).
inline void write_atom_csv(std::ostream& os, const SmoothAtom& a) {
  std::map<std::string, std::string> meta;
  meta["atom.provenance"] = a.provenance();
  meta["atom.vanishing_order"] = std::to_string(a.vanishing_order());
  meta["atom.cube_center"] = format_point(a.cube().center);
  meta["atom.cube_side"] = format_number(a.cube().side);
  meta["atom.p"] = format_number(a.p());
  meta["atom.representation"] = a.closed_form() ? "closed_form" : "spectral";
  meta["atom.moment_residual"] = format_number(a.moment_residual());
  meta["atom.grid_moment_residual"] = format_number(a.grid_moment_residual());
  if (a.recipe()) {
    meta["atom.beta"] = to_string(a.recipe()->beta);
    meta["atom.center"] = format_point(a.recipe()->center);
    meta["atom.radius"] = format_number(a.recipe()->radius);
    meta["atom.scale"] = format_number(a.recipe()->scale);
  }
  write_field_csv(os, a.field(), meta);
}

inline std::string meta_value(const FieldFile& f, const std::string& key) {
  auto it = f.metadata.find(key);
  if (it == f.metadata.end()) throw ConfigError("atom file is missing the metadata key '" + key + "'");
  return it->second;
}

// Re-certifies a serialized atom. Closed forms are rebuilt from their recipe
// (and must match the stored samples); other atoms are certified as sampled
// data at the spectral tolerance.
inline SmoothAtom read_atom_csv(std::istream& is) {
  FieldFile f = read_field_csv(is);
  if (f.kind != "physical") throw ConfigError("atom file must hold a physical field");
  const int n = f.grid.dim();
  SupportCube cube{parse_point(meta_value(f, "atom.cube_center"), n), std::stod(meta_value(f, "atom.cube_side"))};
  const int N = std::stoi(meta_value(f, "atom.vanishing_order"));
  const double p = std::stod(meta_value(f, "atom.p"));
  SampledField field(f.grid, f.values);
  if (f.metadata.count("atom.beta")) {
    BumpRecipe r{parse_multiindex(meta_value(f, "atom.beta"), n), parse_point(meta_value(f, "atom.center"), n),
                 std::stod(meta_value(f, "atom.radius")), std::stod(meta_value(f, "atom.scale"))};
    auto a = atom_from_recipe(r, f.grid, p);
    double diff = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) diff = std::max(diff, std::abs(field[i] - a.field()[i]));
    if (diff > 1e-12 * a.sup_bound())
      throw ConstructionError("atom file samples differ from their recipe by " + format_number(diff));
    if (a.vanishing_order() < N) throw ConstructionError("atom file claims a vanishing order above its recipe");
    return a;
  }
  return SmoothAtom::certify(std::move(field), std::move(cube), N, SmoothAtom::Representation::Spectral,
                             meta_value(f, "atom.provenance"), {}, p);
}

}  // namespace multcancel
