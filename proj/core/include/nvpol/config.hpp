// INI-style configuration for the command line tool.
//
// Strict parsing: unknown sections or keys, duplicate keys, malformed
// numbers, and out-of-range values are all errors, each reported with the
// file name and line number. Every key has a default, so an empty document
// is valid.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "nvpol/rate_model.hpp"
#include "nvpol/readout.hpp"
#include "nvpol/register_params.hpp"

namespace nvpol {

struct SweepConfig {
  std::string wavelength = "532";      // preset label for the sweep laser
  double init_duration_ns = 4000.0;
  int cycles = 1;                      // cycles for the duration sweep
  double repolarize_duration_ns = 700.0;  // duration for the cycles sweep
  double duration_min_ns = 0.0;
  double duration_max_ns = 3000.0;
  double duration_step_ns = 20.0;
  int cycles_min = 1;
  int cycles_max = 4;
};

struct ConfigDocument {
  RegisterParams register_params;
  // Preset table used to resolve wavelength labels in pulse programs and
  // sweeps. Starts as {520, 532, 594}; [rates.<label>] sections override or
  // extend it.
  std::map<std::string, RateConstants> rate_presets;
  double mw_fidelity = 0.95;
  double rf_fidelity = 0.95;
  RamseySettings readout;
  SweepConfig sweep;
  std::uint64_t seed = 1;
  double integrator_step_ns = 0.1;

  static ConfigDocument defaults();
  void validate() const;  // throws ConfigError on out-of-range values
};

// Parses `text`; `origin` names the source in error messages.
ConfigDocument parse_config(std::string_view text, std::string_view origin);

// Reads and parses a file. Throws ConfigError when unreadable.
ConfigDocument load_config(const std::filesystem::path& path);

}  // namespace nvpol
