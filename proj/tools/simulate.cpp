// simulate: run one configured task and write its tables and manifest.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rabi/config.hpp"
#include "rabi/error.hpp"
#include "rabi/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dissipative quantum Rabi model: correlation dynamics and coupling regimes"};
  std::string config_path;
  std::string output_dir;
  int threads = 1;
  std::vector<std::string> overrides;
  bool quiet = false;

  app.add_option("config", config_path, "Path to the JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--output", output_dir, "Output directory (overrides output.directory)");
  app.add_option("-j,--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--override", overrides, "Dotted key=value assignment applied before validation")->take_all();
  app.add_flag("-q,--quiet", quiet, "Suppress progress output");
  app.set_version_flag("--version", RABI_VERSION);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rabi::kExitConfigError;
  }

  rabi::RunConfig config;
  try {
    config = rabi::parse_config(config_path, overrides);
  } catch (const rabi::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return rabi::kExitConfigError;
  }

  rabi::RunOptions options;
  options.output_directory = output_dir;
  options.threads = threads;
  options.log = quiet ? nullptr : &std::cerr;

  const rabi::RunReport report = rabi::run(config, options);
  if (!quiet) {
    std::cerr << "config_hash " << report.config_hash << "\n";
    for (const auto& p : report.outputs) std::cerr << "wrote " << p.string() << "\n";
  }
  if (report.exit_code != rabi::kExitSuccess) std::cerr << "error: " << report.message << "\n";
  return report.exit_code;
}
