#pragma once

// Run configuration: a flat `section.key = value` text file. Later
// assignments (including command-line overrides) replace earlier ones.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scwdr/interface_sim.hpp"
#include "scwdr/optimizer.hpp"

namespace scwdr {

/// Bad configuration or usage; the CLI exits with status 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class OutputFormat { Csv, Json };

struct RunConfig {
  DetectorSpec detector{0.1, 50.0, 3.3e-9, 10e-9};
  FilterSpec filter{0.99, 1e-4};
  CoefficientMode coefficients = CoefficientMode::Verbatim;

  // Interference scans. Without an explicit alpha0 the carrier amplitude is
  // tuned so the m = +1 peak signal rate equals peak_rate.
  std::optional<double> alpha0;
  double peak_rate = 1e4;
  double path_phase = -1.5707963267948966;  // e^{i phase} on the V arm
  double scan_beta = 0.15;
  std::vector<double> phis;
  std::vector<double> betas;
  SidebandSelection sidebands = SidebandSelection::All;
  int visibility_points = 720;

  // Tomography.
  double tomo_duration = 10.0;
  std::uint64_t seed = 1;
  double tomo_alpha0 = 0.15;
  double tomo_beta = 0.15;
  double tomo_v_phase_offset = 0.0;
  std::string tomo_records;  // reconstruct this CSV instead of simulating

  // Key rates.
  std::vector<double> losses_db;
  std::string scheme = "both";
  double key_alpha0 = 0.5;
  double key_beta = 0.5;
  double f_ec = 1.25;
  bool optimize = false;
  OptimizationBounds bounds{};
  bool warm_start = true;

  // Output.
  std::string out_dir = ".";
  OutputFormat format = OutputFormat::Csv;
  unsigned threads = 0;  // 0: all available processors

  RunConfig();

  /// Applies one `key = value` assignment.
  void set(std::string_view key, std::string_view value);
  void validate() const;
  std::string serialize() const;

  ProtocolParams protocol() const;
  std::vector<Scheme> schemes() const;
};

/// Parses config text on top of the defaults (or on top of `base`).
RunConfig parse_config(std::string_view text);
RunConfig parse_config(std::string_view text, RunConfig base);
RunConfig load_config(const std::string& path);

/// "a,b,c" or an inclusive linear range "start:stop:count".
std::vector<double> parse_number_list(std::string_view text);

std::vector<double> default_phase_grid();

}  // namespace scwdr
