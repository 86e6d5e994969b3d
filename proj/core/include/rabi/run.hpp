#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rabi/config.hpp"

namespace rabi {

enum ExitCode : int {
  kExitSuccess = 0,
  kExitConfigError = 1,
  kExitNumericalFailure = 2,
  kExitPartialSweep = 3,
};

struct RunOptions {
  std::filesystem::path output_directory;  // empty: use the config's output.directory
  int threads = 1;
  std::ostream* log = nullptr;
};

struct RunReport {
  int exit_code = kExitSuccess;
  std::string config_hash;
  std::vector<std::filesystem::path> outputs;
  std::string message;
};

/// Executes the configured task and writes manifest.json plus the task's
/// tables into the output directory. Never throws for solver failures; they
/// surface through the exit code and the manifest.
RunReport run(const RunConfig& config, const RunOptions& options = {});

}  // namespace rabi
