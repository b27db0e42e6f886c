#pragma once

// Flat "key = value" run configurations with repeated [phase] blocks, and
// the built-in presets for the six experiments and the cubic variant.
//
//   problem = linear
//   dimension = 2
//   topology = 2,96,96,96,96,96,96,1
//   theta = pi/6
//   ...
//   [phase]
//   order = 4
//   delta0 = 2e-4
//   interval = 1000, 200, reset
//   interval = 1000, 200

#include <iosfwd>
#include <string>
#include <vector>

#include "nnpde/run_config.hpp"

namespace nnpde {

/// Throws ConfigError naming the offending key (or "line N" for syntax errors).
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);

/// Fully resolved config; parse_config(write_config(c)) == c field for field.
void write_config(std::ostream& os, const RunConfig& config);

std::vector<std::string> preset_names();
/// Throws ConfigError("preset", ...) for an unknown name.
RunConfig preset(const std::string& name);

/// The three-phase schedules shared by all dimensions.
std::vector<PhaseConfig> linear_schedule();
std::vector<PhaseConfig> nonlinear_schedule();

}  // namespace nnpde
