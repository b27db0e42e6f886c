#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnpde/network.hpp"
#include "nnpde/problems.hpp"

namespace nnpde {

/// Invalid user configuration; `field` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Training diverged or produced a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  int epochs = 0;
  int renorm_interval = 0;  // r_int; 0 disables renormalization
  bool reset_steps_at_end = false;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct PhaseConfig {
  int order = 4;          // s
  double delta0 = 2e-4;   // initial RProp step
  std::vector<Interval> intervals;
  int total_epochs() const;
  friend bool operator==(const PhaseConfig&, const PhaseConfig&) = default;
};

enum class RPropVariant { irprop_minus, rprop_minus };

struct RPropConfig {
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double weight_limit = 20.0;
  bool clamp_thresholds = true;
  RPropVariant variant = RPropVariant::irprop_minus;
};

struct RunConfig {
  std::string name;
  ProblemSpec problem;
  Topology topology{{2, 96, 96, 96, 96, 96, 96, 1}};
  double theta = 0.0;
  double lambda = 0.0;
  long interior_target = 0;  // 0: take the lattice as generated
  std::vector<PhaseConfig> phases;
  RPropConfig rprop;
  double renorm_threshold = 4.0;
  std::uint64_t seed_weights = 1;
  std::uint64_t seed_grid = 1;
  std::uint64_t seed_directions = 1;
  std::uint64_t seed_validation = 1;
  int precision = 64;
  long test_count = 4000;
  bool reproducible = false;
  long chunk_points = 0;
  std::string output_dir;

  /// Throws ConfigError on inconsistent fields.
  void check() const;
};

}  // namespace nnpde
