#pragma once

// Subcommands of the command-line front end. Each writes its datasets under
// config.out_dir and returns the paths it wrote.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "scwdr/config.hpp"

namespace scwdr {

/// Runtime or model-validity failure; the CLI exits with status 3.
class RunError : public std::runtime_error {
 public:
  explicit RunError(const std::string& what) : std::runtime_error(what) {}
};

using WrittenFiles = std::vector<std::filesystem::path>;

WrittenFiles cmd_phase_scan(const RunConfig& config, std::ostream& log);
WrittenFiles cmd_visibility(const RunConfig& config, std::ostream& log);
WrittenFiles cmd_tomography(const RunConfig& config, std::ostream& log);
/// Loss sweep for the configured scheme(s); optimized per point when
/// `optimize` is set (or config.optimize).
WrittenFiles cmd_keyrate(const RunConfig& config, bool optimize, std::ostream& log);
WrittenFiles cmd_optimize(const RunConfig& config, std::ostream& log);

/// Full command line: parses arguments, runs one subcommand and returns the
/// process exit code (0 success, 2 usage/config error, 3 runtime error).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scwdr
