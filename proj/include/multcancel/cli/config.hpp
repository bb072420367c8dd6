#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "multcancel/core/errors.hpp"
#include "multcancel/core/format.hpp"
#include "multcancel/grid/grid.hpp"

namespace multcancel::cli {

struct KeySpec {
  const char* key;
  const char* section;
  const char* fallback;
  const char* help;
};

// Every config key, its section in the config file and its default. The
// command-line flag of a key is --<key>.
inline const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"command", "run", "", "symbol-eval|cancel-check|decay-check|atom-make|atom-verify|apply|identity|equivalence|maximal|weakconv|suite"},
      {"out", "run", "multcancel-out", "output directory"},
      {"seed", "run", "42", "sampler seed"},
      {"symbol", "symbol", "", "builtin symbol name"},
      {"symbol-expr", "symbol", "", "symbol expression text, e.g. x[1][1]*x[2][2]/(x[1][1]^2+x[2][2]^2)"},
      {"symbol-params", "symbol", "", "builtin parameters as space separated key=value pairs"},
      {"m", "symbol", "0", "block count of symbol-expr (0 infers it)"},
      {"n", "symbol", "0", "block dimension of symbol-expr (0 infers it)"},
      {"grid", "grid", "1,4,2048", "grid as n,L,M"},
      {"p", "exponents", "", "exponents p_1,...,p_m (default 2 each)"},
      {"battery", "atoms", "default", "default or the path of a battery file"},
      {"tuples", "atoms", "8", "number of default battery tuples"},
      {"tuple", "atoms", "1", "battery tuple used by apply, decay-check and maximal (1-based)"},
      {"beta", "atoms", "", "derivative multiindex of atom-make, e.g. (2) or (1,1)"},
      {"center", "atoms", "", "atom center, e.g. (0,0)"},
      {"radius", "atoms", "1", "atom bump radius"},
      {"atom-file", "atoms", "", "atom CSV read by atom-verify"},
      {"N", "checks", "-1", "cancellation or vanishing order (-1 derives it from p)"},
      {"block", "checks", "0", "differentiated block, 1-based (0 means m)"},
      {"order", "checks", "1", "derivative order of decay-check"},
      {"alpha", "checks", "", "multiindices for identity, e.g. (0);(1); empty means |alpha| <= 1"},
      {"algorithm", "checks", "fft_last_block", "naive|fft_last_block"},
      {"delta", "checks", "-1", "tube radius of the frequency quadrature (-1 means 2 dxi)"},
      {"tolerance", "checks", "-1", "identity tolerance (-1 means 1e-2)"},
      {"points", "checks", "", "symbol-eval points separated by ';', coordinates by ','"},
      {"k-list", "weakconv", "4,8,16,32", "oscillation frequencies"},
      {"j-min", "maximal", "-4", "smallest dyadic scale exponent"},
      {"j-max", "maximal", "2", "largest dyadic scale exponent"},
      {"hp-p", "maximal", "-1", "exponent of the quasinorm (-1 means the Hoelder target)"},
      {"grid-scale", "suite", "1", "factor applied to M of the suite identity grids (1 or 0.5)"},
  };
  return keys;
}

inline const KeySpec* find_key(const std::string& key) {
  for (const auto& k : config_keys())
    if (key == k.key) return &k;
  return nullptr;
}

class RunConfig {
 public:
  void set(const std::string& key, const std::string& value) {
    if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = value;
  }

  bool has(const std::string& key) const {
    auto it = values_.find(key);
    return it != values_.end() && !it->second.empty();
  }

  std::string str(const std::string& key) const {
    const KeySpec* k = find_key(key);
    if (!k) throw ConfigError("unknown config key '" + key + "'");
    auto it = values_.find(key);
    return it != values_.end() ? it->second : std::string(k->fallback);
  }

  double real(const std::string& key) const { return parse_real(key, str(key)); }

  int integer(const std::string& key) const {
    const std::string s = str(key);
    try {
      std::size_t used = 0;
      int v = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': expected an integer, got '" + s + "'");
    }
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (item.empty()) continue;
      out.push_back(parse_real(key, item));
    }
    return out;
  }

  Grid grid(const std::string& key = "grid") const {
    auto v = reals(key);
    if (v.size() != 3 || v[0] != std::floor(v[0]) || v[2] != std::floor(v[2]))
      throw ConfigError("config key '" + key + "': expected n,L,M, got '" + str(key) + "'");
    try {
      return make_grid(static_cast<int>(v[0]), v[1], static_cast<int>(v[2]));
    } catch (const Error& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }

  // Every key with its resolved value, in declaration order.
  nlohmann::ordered_json resolved() const {
    nlohmann::ordered_json j;
    for (const auto& k : config_keys()) j[k.section][k.key] = str(k.key);
    return j;
  }

 private:
  static double parse_real(const std::string& key, const std::string& s) {
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': expected a number, got '" + s + "'");
    }
  }

  std::map<std::string, std::string> values_;
};

// Sectioned key=value file. Keys must sit in their own section; keys in the
// root (no section) are accepted as well.
inline void load_config_file(const std::string& path, RunConfig& cfg) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config file '" + path + "': " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      cfg.set(name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) {
      const KeySpec* k = find_key(key);
      if (!k) throw ConfigError("config file '" + path + "': unknown key '" + name + "." + key + "'");
      if (name != k->section)
        throw ConfigError("config file '" + path + "': key '" + key + "' belongs in section [" + k->section +
                          "], found in [" + name + "]");
      cfg.set(key, leaf.data());
    }
  }
}

}  // namespace multcancel::cli
