// multcancel: config-driven front end. Flags mirror config keys and override
// values read from --config.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "multcancel/cli/run.hpp"

int main(int argc, char** argv) {
  using namespace multcancel;
  CLI::App app{std::string(kToolName) + " " + kToolVersion + ": multilinear multiplier cancellation checks"};
  app.set_version_flag("--version", kToolVersion);
  std::string config_path;
  app.add_option("--config", config_path, "sectioned key=value config file");
  std::map<std::string, std::string> flags;
  for (const auto& k : cli::config_keys()) {
    std::string help = std::string(k.help) + " [" + k.section + "]";
    if (*k.fallback) help += " (default " + std::string(k.fallback) + ")";
    app.add_option(std::string("--") + k.key, flags[k.key], help);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  cli::RunConfig cfg;
  try {
    if (!config_path.empty()) cli::load_config_file(config_path, cfg);
    for (const auto& k : cli::config_keys()) {
      auto* opt = app.get_option(std::string("--") + k.key);
      if (opt->count() > 0) cfg.set(k.key, flags[k.key]);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitConfig;
  }
  return cli::run(cfg, std::cerr);
}
