#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "infodeleg/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimal delegation of information provision"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::size_t grid = 0;
  std::string scenario;
  const std::pair<const char*, const char*> commands[] = {
      {"full-delegation", "Unrestricted best reply (upper censorship) and assumption report"},
      {"mic-sweep", "Sweep the MIC family over its feasible top-atom range"},
      {"optimize", "Designer-optimal MIC experiment and its implementing restriction"},
      {"verify", "Certificate, oracle and structure checks; exit 3 if any fails"},
      {"oracle", "Discretized LP best reply to the prior, with CSV dumps"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    sub->add_option("--grid", grid, "Oracle grid size, odd and >= 51 (overrides oracle.n)");
    sub->add_option("--scenario", scenario, "uninformed_dm or m_shaped (overrides scenario.name)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : infodeleg::cli::kConfigFailure;
  }

  infodeleg::cli::Overrides o;
  if (!out_dir.empty()) o.out_dir = out_dir;
  if (grid != 0) o.grid = grid;
  if (!scenario.empty()) o.scenario = scenario;
  return infodeleg::cli::dispatch(app.get_subcommands().front()->get_name(), config, o, std::cout, std::cerr);
}
