#include "nnpde/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "nnpde/weights_io.hpp"

namespace nnpde {

int PhaseConfig::total_epochs() const {
  int total = 0;
  for (const auto& i : intervals) total += i.epochs;
  return total;
}

void RunConfig::check() const {
  if (problem.dimension < 2 || problem.dimension > 5) throw ConfigError("dimension", "must be in 2..5");
  if (problem.variant == Variant::cubic_x3 && problem.dimension < 3)
    throw ConfigError("variant", "cubic_x3 needs dimension >= 3");
  if (topology.widths().front() != problem.dimension)
    throw ConfigError("topology", "input width must equal the dimension");
  if (topology.widths().back() != 1) throw ConfigError("topology", "output width must be 1");
  if (!(theta > 0.0) || theta > std::numbers::pi) throw ConfigError("theta", "must be in (0, pi]");
  if (!(lambda > 0.0) || lambda >= 1.0) throw ConfigError("lambda", "must be in (0, 1)");
  if (interior_target < 0) throw ConfigError("interior_target", "must be non-negative");
  if (phases.empty()) throw ConfigError("phase", "at least one phase is required");
  for (const auto& p : phases) {
    if (p.order < 2 || p.order > 4) throw ConfigError("phase.order", "must be 2, 3 or 4");
    if (!(p.delta0 > 0.0)) throw ConfigError("phase.delta0", "must be positive");
    if (p.intervals.empty()) throw ConfigError("phase.interval", "a phase needs at least one interval");
    for (const auto& i : p.intervals) {
      if (i.epochs <= 0) throw ConfigError("phase.interval", "epochs must be positive");
      if (i.renorm_interval < 0) throw ConfigError("phase.interval", "r_int must be non-negative");
    }
  }
  if (!(rprop.eta_plus > 1.0)) throw ConfigError("eta_plus", "must exceed 1");
  if (!(rprop.eta_minus > 0.0 && rprop.eta_minus < 1.0)) throw ConfigError("eta_minus", "must be in (0, 1)");
  if (!(rprop.weight_limit > 0.0)) throw ConfigError("weight_limit", "must be positive");
  if (!(renorm_threshold > 0.0)) throw ConfigError("renorm_threshold", "must be positive");
  if (precision != 32 && precision != 64) throw ConfigError("precision", "must be 32 or 64");
  if (test_count <= 0) throw ConfigError("test_count", "must be positive");
  if (chunk_points < 0) throw ConfigError("chunk_points", "must be non-negative");
}

template <typename Real>
RPropState<Real>::RPropState(const WeightSet<Real>& like, double delta0) : steps(like), previous_gradient(like) {
  reset(delta0);
}

template <typename Real>
void RPropState<Real>::reset(double delta0) {
  if (!(delta0 > 0.0)) throw std::invalid_argument("initial RProp step must be positive");
  for (auto& l : steps.layers) {
    l.weights.setConstant(static_cast<Real>(delta0));
    l.thresholds.setConstant(static_cast<Real>(delta0));
  }
  for (auto& l : previous_gradient.layers) {
    l.weights.setZero();
    l.thresholds.setZero();
  }
}

namespace {

template <typename Real, typename Derived>
void check_finite(const Eigen::MatrixBase<Derived>& g, Eigen::Index& offset, long epoch) {
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    // row-major numbering to match the weights file
    const Eigen::Index r = k / g.cols(), c = k % g.cols();
    if (!std::isfinite(static_cast<double>(g(r, c)))) {
      std::ostringstream msg;
      msg << "non-finite gradient at epoch " << epoch << ", parameter index " << offset + k;
      throw NumericalError(msg.str());
    }
  }
  offset += g.size();
}

template <typename Real, typename W, typename S, typename P, typename G>
void update(W& w, S& step, P& prev, const G& grad, const RPropConfig& cfg, bool clamp) {
  const Real eta_plus = static_cast<Real>(cfg.eta_plus);
  const Real eta_minus = static_cast<Real>(cfg.eta_minus);
  const Real limit = static_cast<Real>(cfg.weight_limit);
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    Real g = grad.data()[k];
    const Real sign_product = g * prev.data()[k];
    Real& delta = step.data()[k];
    if (sign_product > 0) {
      delta *= eta_plus;
    } else if (sign_product < 0) {
      delta *= eta_minus;
      if (cfg.variant == RPropVariant::irprop_minus) g = 0;
    }
    Real& value = w.data()[k];
    if (g > 0)
      value -= delta;
    else if (g < 0)
      value += delta;
    if (clamp) value = std::clamp(value, -limit, limit);
    prev.data()[k] = g;
  }
}

}  // namespace

template <typename Real>
void rprop_step(RPropState<Real>& state, const WeightSet<Real>& gradient, WeightSet<Real>& weights,
                const RPropConfig& config, long epoch) {
  if (!gradient.same_shape(weights) || !state.steps.same_shape(weights))
    throw ShapeError("gradient, state and weights differ in shape");
  Eigen::Index offset = 0;
  for (const auto& l : gradient.layers) {
    check_finite<Real>(l.weights, offset, epoch);
    check_finite<Real>(l.thresholds, offset, epoch);
  }
  for (std::size_t i = 0; i < weights.layers.size(); ++i) {
    update<Real>(weights.layers[i].weights, state.steps.layers[i].weights, state.previous_gradient.layers[i].weights,
                 gradient.layers[i].weights, config, true);
    update<Real>(weights.layers[i].thresholds, state.steps.layers[i].thresholds,
                 state.previous_gradient.layers[i].thresholds, gradient.layers[i].thresholds, config,
                 config.clamp_thresholds);
  }
}

void TrainingLog::write_csv(std::ostream& os) const {
  os << "epoch,phase,interval,cost,rms_v0,seconds\n";
  const auto old = os.precision(17);
  for (const auto& e : entries)
    os << e.epoch << ',' << e.phase << ',' << e.interval << ',' << e.cost << ',' << e.rms_v0 << ',' << e.seconds
       << '\n';
  os.precision(old);
}

template <typename Real>
void run_phase(const PhaseConfig& phase, const TrainingContext& context, DirectionField& directions,
               WeightSet<Real>& weights, TrainingLog& log) {
  if (!context.problem || !context.points) throw std::invalid_argument("training context lacks problem or grid");
  const Problem& problem = *context.problem;
  const Eigen::MatrixXd& points = *context.points;
  const SlotSet slots(problem.dimension(), phase.order);
  if (phase.total_epochs() == 0) return;

  ResidualCost<Real> cost(problem, slots, points, directions);
  RPropState<Real> state(weights, phase.delta0);
  long epoch = context.first_epoch;
  for (std::size_t iv = 0; iv < phase.intervals.size(); ++iv) {
    const Interval& interval = phase.intervals[iv];
    for (int e = 1; e <= interval.epochs; ++e, ++epoch) {
      if (interval.renorm_interval > 0 && e % interval.renorm_interval == 0) {
        const SlotBatch<Real> out = forward(points, cost.directions(), weights, slots);
        cost.set_directions(renormalize(cost.directions(), out, slots, context.renorm_threshold));
      }
      const Gradient<Real> grad = cost_gradient(points, cost.directions(), weights, slots, cost, context.evaluation);
      if (!std::isfinite(grad.cost)) {
        directions = cost.directions();
        throw NumericalError("non-finite cost at epoch " + std::to_string(epoch));
      }
      rprop_step(state, grad.weights, weights, context.rprop, epoch);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - context.start).count();
      log.entries.push_back({epoch, context.phase_index, static_cast<int>(iv) + 1, grad.cost, cost.last_rms_v0(),
                             seconds});
      if (context.on_epoch) context.on_epoch(log.entries.back());
    }
    if (interval.reset_steps_at_end) state.reset(phase.delta0);
  }
  directions = cost.directions();
}

PointCloud build_grid(const RunConfig& config) {
  GridSpec spec{config.problem.dimension, config.theta, config.lambda, config.seed_grid};
  const PointCloud surface = surface_grid(spec);
  const PointCloud interior =
      config.interior_target > 0 ? interior_grid_near_count(spec, config.interior_target) : interior_grid(spec);
  return concatenate(surface, interior);
}

template <typename Real>
void write_checkpoint(const std::filesystem::path& path, const WeightSet<Real>& weights,
                      const RPropState<Real>* state) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_weights(out, weights);
  if (state) write_weights(out, state->steps, "rprop-steps");
}

template <typename Real>
ExperimentResult<Real> run_experiment(const RunConfig& config,
                                      const std::function<void(const LogEntry&)>& on_epoch) {
  config.check();
  const Problem problem(config.problem);
  ExperimentResult<Real> result;
  result.grid = build_grid(config);
  result.directions = direction_pairs(result.grid.size(), config.problem.dimension, config.seed_directions);
  result.weights = init_weights<Real>(config.topology, config.seed_weights);

  const std::filesystem::path out_dir = config.output_dir;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream grid_csv(out_dir / "grid.csv");
    write_grid_csv(grid_csv, result.grid);
  }

  TrainingContext context;
  context.problem = &problem;
  context.points = &result.grid.coords;
  context.rprop = config.rprop;
  context.renorm_threshold = config.renorm_threshold;
  context.evaluation.chunk_points = config.chunk_points;
  context.on_epoch = on_epoch;

  double last_rms = 0.0;
  for (std::size_t p = 0; p < config.phases.size(); ++p) {
    const PhaseConfig& phase = config.phases[p];
    context.phase_index = static_cast<int>(p) + 1;
    context.first_epoch = result.log.entries.empty() ? 1 : result.log.entries.back().epoch + 1;
    try {
      run_phase(phase, context, result.directions, result.weights, result.log);
    } catch (const NumericalError&) {
      // run_phase leaves the weights of the last completed step
      if (!out_dir.empty()) {
        write_checkpoint<Real>(out_dir / "checkpoint.txt", result.weights, nullptr);
        std::ofstream log_csv(out_dir / "training_log.csv");
        result.log.write_csv(log_csv);
      }
      throw;
    }
    const SlotSet slots(problem.dimension(), phase.order);
    const SlotBatch<Real> out = forward(result.grid.coords, result.directions, result.weights, slots);
    result.phase_end.push_back(
        cost(residual_jets(problem, out, slots, result.grid.coords, result.directions), phase.order));
    last_rms = result.phase_end.back().rms_v0;
  }

  result.report.problem = config.problem;
  result.report.result = validate(problem, result.weights, config.test_count, config.seed_validation);
  result.report.rms_v0_final = last_rms;

  if (!out_dir.empty()) {
    save_weights(out_dir / "weights.txt", result.weights);
    std::ofstream log_csv(out_dir / "training_log.csv");
    result.log.write_csv(log_csv);
    std::ofstream report(out_dir / "validation_report.txt");
    write_validation_report(report, result.report);
  }
  return result;
}

template struct RPropState<float>;
template struct RPropState<double>;
template void rprop_step<float>(RPropState<float>&, const WeightSet<float>&, WeightSet<float>&, const RPropConfig&,
                                long);
template void rprop_step<double>(RPropState<double>&, const WeightSet<double>&, WeightSet<double>&,
                                 const RPropConfig&, long);
template void run_phase<float>(const PhaseConfig&, const TrainingContext&, DirectionField&, WeightSet<float>&,
                               TrainingLog&);
template void run_phase<double>(const PhaseConfig&, const TrainingContext&, DirectionField&, WeightSet<double>&,
                                TrainingLog&);
template ExperimentResult<float> run_experiment<float>(const RunConfig&, const std::function<void(const LogEntry&)>&);
template ExperimentResult<double> run_experiment<double>(const RunConfig&,
                                                      const std::function<void(const LogEntry&)>&);
template void write_checkpoint<float>(const std::filesystem::path&, const WeightSet<float>&,
                                      const RPropState<float>*);
template void write_checkpoint<double>(const std::filesystem::path&, const WeightSet<double>&,
                                       const RPropState<double>*);

}  // namespace nnpde
