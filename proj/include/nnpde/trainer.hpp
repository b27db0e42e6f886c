#pragma once

// RProp training with phase schedules and periodic direction renormalization.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nnpde/geometry.hpp"
#include "nnpde/network.hpp"
#include "nnpde/problems.hpp"
#include "nnpde/run_config.hpp"

namespace nnpde {

/// Per-parameter step sizes and previous gradients, shaped like the weights.
template <typename Real>
struct RPropState {
  WeightSet<Real> steps;
  WeightSet<Real> previous_gradient;

  RPropState(const WeightSet<Real>& like, double delta0);
  void reset(double delta0);
};

/// One sign-based update. Throws NumericalError on a non-finite gradient entry;
/// `epoch` only feeds the diagnostic.
template <typename Real>
void rprop_step(RPropState<Real>& state, const WeightSet<Real>& gradient, WeightSet<Real>& weights,
                const RPropConfig& config, long epoch = -1);

struct LogEntry {
  long epoch = 0;
  int phase = 0;     // 1-based
  int interval = 0;  // 1-based
  double cost = 0.0;
  double rms_v0 = 0.0;
  double seconds = 0.0;
};

struct TrainingLog {
  std::vector<LogEntry> entries;
  void write_csv(std::ostream& os) const;
};

struct TrainingContext {
  const Problem* problem = nullptr;
  const Eigen::MatrixXd* points = nullptr;
  RPropConfig rprop;
  double renorm_threshold = 4.0;
  EvaluationOptions evaluation;
  int phase_index = 1;
  long first_epoch = 1;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::function<void(const LogEntry&)> on_epoch;
};

/// Runs the intervals of one phase. Directions are renormalized in place at
/// epochs r_int, 2 r_int, ... of each interval, before that epoch's step.
template <typename Real>
void run_phase(const PhaseConfig& phase, const TrainingContext& context, DirectionField& directions,
               WeightSet<Real>& weights, TrainingLog& log);

template <typename Real>
struct ExperimentResult {
  PointCloud grid;
  DirectionField directions;
  WeightSet<Real> weights;
  TrainingLog log;
  ValidationReport report;
  std::vector<CostBreakdown> phase_end;  // residual breakdown after each phase
};

/// Grid of surface and interior points described by the config.
PointCloud build_grid(const RunConfig& config);

/// Grid, directions, weights, all phases (s = 4, 3, 2 in the presets),
/// validation; artifacts are written when config.output_dir is set.
/// On a non-finite value the last good weights are checkpointed and
/// NumericalError is rethrown.
template <typename Real>
ExperimentResult<Real> run_experiment(const RunConfig& config,
                                      const std::function<void(const LogEntry&)>& on_epoch = {});

/// Checkpoint: weights block followed by an RProp step block of the same layout.
template <typename Real>
void write_checkpoint(const std::filesystem::path& path, const WeightSet<Real>& weights,
                      const RPropState<Real>* state);

}  // namespace nnpde
