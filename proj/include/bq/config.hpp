// Run configuration: flat "key = value" text with '#' comments. Every value is
// checked before any computation or file output starts.
#pragma once

#include "bq/monitors.hpp"
#include "bq/solver.hpp"

#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bq {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  GridSpec grid;
  FlowParams params;
  StepperConfig stepper;
  InitKind init = InitKind::taylor_green;
  std::uint64_t seed = 0;
  InitOptions init_options;
  long diag_every = 1;        // steps between CSV rows
  long checkpoint_every = 0;  // steps between checkpoints; 0 writes only the final one
  std::string out_dir = "out";
  std::optional<double> monitor_q;
  std::optional<double> monitor_s;
  double oss_C_user = 1.0;  // delta = C_user |theta0|_inf^{-2 beta / (2 - beta)}
  std::optional<double> oss_L;  // shift radius; defaults to side_length / 16

  /// Keys given explicitly (file or command line), in the order they were set.
  std::vector<std::string> explicit_keys;

  double oss_radius() const { return oss_L ? *oss_L : grid.side_length / 16.0; }
  /// Throws ConfigError naming the offending key.
  void validate() const;
  MonitorSettings monitor_settings() const;
};

/// Every recognised key.
const std::vector<std::string>& config_keys();

/// Sets one key from its textual value; throws ConfigError on unknown keys or bad values.
void set_config_value(RunConfig& c, const std::string& key, const std::string& value);

/// Parses a config stream; errors carry "source:line: key: message".
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Applies "key=value" overrides (command-line --set).
void apply_overrides(RunConfig& c, const std::vector<std::string>& assignments);

/// Output directory, honouring the BQSIM_OUT_DIR environment override.
std::string resolved_out_dir(const RunConfig& c);

/// Canonical text form (every key), parseable by parse_config.
std::string format_config(const RunConfig& c);

}  // namespace bq
