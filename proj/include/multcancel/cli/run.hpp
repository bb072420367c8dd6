#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "multcancel/cli/suite.hpp"
#include "multcancel/core/version.hpp"

namespace multcancel::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitVerdictFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::Grid:
    case ErrorKind::Degenerate:
      return kExitConfig;
    default:
      return kExitNumerical;
  }
}

inline CommandResult dispatch(const RunConfig& cfg) {
  using Fn = CommandResult (*)(const RunConfig&);
  static const std::map<std::string, Fn> table = {
      {"symbol-eval", cmd_symbol_eval}, {"cancel-check", cmd_cancel_check}, {"decay-check", cmd_decay_check},
      {"atom-make", cmd_atom_make},     {"atom-verify", cmd_atom_verify},   {"apply", cmd_apply},
      {"identity", cmd_identity},       {"equivalence", cmd_equivalence},   {"maximal", cmd_maximal},
      {"weakconv", cmd_weakconv},       {"suite", cmd_suite}};
  const std::string c = cfg.str("command");
  if (c.empty()) throw ConfigError("config key 'command' is required");
  auto it = table.find(c);
  if (it == table.end()) throw ConfigError("config key 'command': unknown command '" + c + "'");
  return it->second(cfg);
}

// Writes <out>/<command>.json plus the CSV tables, plot data and artifacts.
inline void write_outputs(const RunConfig& cfg, const CommandResult& r) {
  namespace fs = std::filesystem;
  const fs::path out = cfg.str("out");
  const std::string c = cfg.str("command");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("config key 'out': cannot create '" + out.string() + "': " + ec.message());
  report::Json doc{{"tool", kToolName},
                   {"version", kToolVersion},
                   {"command", c},
                   {"config", cfg.resolved()},
                   {"verdict", r.pass ? "pass" : "fail"},
                   {"result", r.result}};
  {
    std::ofstream os(out / (c + ".json"));
    if (!os) throw ConfigError("config key 'out': cannot write '" + (out / (c + ".json")).string() + "'");
    os << doc.dump(2) << '\n';
  }
  for (const auto& t : r.tables) report::write_table(out / (t.name == c ? c + ".csv" : c + "_" + t.name + ".csv"), t);
  for (const auto& s : r.series) report::write_series(out / (c + "_" + s.name + ".dat"), s);
  for (const auto& [name, content] : r.files) {
    std::ofstream os(out / name);
    if (!os) throw ConfigError("config key 'out': cannot write '" + (out / name).string() + "'");
    os << content;
  }
}

inline int run(const RunConfig& cfg, std::ostream& log = std::cerr) {
  try {
    CommandResult r = dispatch(cfg);
    write_outputs(cfg, r);
    log << cfg.str("command") << ": " << (r.pass ? "pass" : "fail") << " (report in "
        << (std::filesystem::path(cfg.str("out")) / (cfg.str("command") + ".json")).string() << ")\n";
    return r.pass ? kExitPass : kExitVerdictFailed;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace multcancel::cli
