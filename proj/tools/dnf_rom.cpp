#include "dnf/cli/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Direct normal form reduced-order model pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  struct Entry {
    const char* name;
    const char* help;
    dnf::cli::Command command;
  };
  const Entry entries[] = {
      {"run", "Modes, reduced model and frequency responses", dnf::cli::Command::Run},
      {"modes", "Mode shapes only", dnf::cli::Command::Modes},
      {"check", "Reduced model residuals and resonances without continuation", dnf::cli::Command::Check},
  };
  for (const auto& e : entries)
    app.add_subcommand(e.name, e.help)->add_option("config", config_path, "Configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  dnf::cli::Command command = dnf::cli::Command::Run;
  for (const auto& e : entries)
    if (app.got_subcommand(e.name)) command = e.command;

  try {
    const auto config = dnf::cli::load_config(config_path);
    const auto result = dnf::cli::run_pipeline(config, command);
    for (const auto& p : result.artifacts) std::cout << p.string() << "\n";
    if (!result.passed) {
      std::cerr << "dnf-rom: residual thresholds not met; see report.json\n";
      return 3;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "dnf-rom: error: " << e.what() << "\n";
    return dnf::cli::exit_code_for(e);
  }
}
