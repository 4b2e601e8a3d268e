// qpbo: command-line front end.
//
//   qpbo <subcommand> [-c config.ini] [--set section.key=value ...] [-o dir]
//
// QPBO_OUTPUT_DIR overrides -o.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <qpbo/app.hpp>

int main(int argc, char** argv) {
  using namespace qpbo;
  CLI::App cli{"Quasi-periodic Benjamin-Ono numerics"};
  cli.require_subcommand(1);
  std::string config_path, out_dir;
  std::vector<std::string> sets;
  cli.add_option("-c,--config", config_path, "INI configuration file");
  cli.add_option("--set", sets, "override one entry, section.key=value (repeatable)");
  cli.add_option("-o,--output", out_dir, "output directory (default: out)");
  cli.set_version_flag("--version", std::string(tool_version));
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"simulate", "integrate the truncated flow, write observables and the trajectory"},
      {"gauge-check", "gauge residual, reconstruction identities and bootstrap quantities of a trajectory"},
      {"estimates", "ensemble ratio checks of the functional inequalities"},
      {"cauchy", "Cauchy study of regularized truncated solutions"},
      {"dioph", "continued fractions, small divisors and embedding thresholds"},
      {"norms", "norms of the configured initial field"}};
  for (const auto& [name, help] : subs) cli.add_subcommand(name, help)->fallthrough();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::usage_error;
  }
  const std::string sub = cli.get_subcommands().front()->get_name();

  Config cfg;
  try {
    if (!config_path.empty()) cfg = Config::from_file(config_path);
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError(kv, "expected --set section.key=value");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
  } catch (const ConfigError& e) {
    std::cerr << "qpbo " << sub << ": config error: " << e.what() << "\n";
    return app::usage_error;
  }
  return app::run(sub, cfg, resolve_output_dir(out_dir));
}
