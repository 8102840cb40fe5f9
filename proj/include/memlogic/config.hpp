#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "memlogic/analysis.hpp"

namespace memlogic {

enum class ExportFormat { Csv, Json, Both };

ExportFormat parse_export_format(std::string_view s);

/// Everything a CLI run needs. Config files are flat `key = value` lines
/// with `#` comments; keys are dotted, e.g. `device.hrs_sigma_c2c = 0.45`.
struct RunConfig {
  ExperimentConfig experiment;
  std::string preset = "table3-logic";
  std::vector<std::string> gate_names;  // empty selects the experiment defaults
  std::string gate_library;             // optional library file searched before builtins
  std::string output_dir = "out";
  ExportFormat format = ExportFormat::Csv;
  std::size_t characterize_cells = 10;
  std::size_t n_inputs = 2;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, int line, std::string key, const std::string& what);
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// Applies one setting. `preset` replaces every device.* value.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// A `preset` line is applied before all other keys regardless of position.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_config(const std::string& path);

std::vector<std::string> config_keys();

/// Fills experiment.gates from gate_names, looking names up in the gate
/// library file first and the builtins second. Throws UnknownGate.
void resolve_gates(RunConfig& cfg);

}  // namespace memlogic
