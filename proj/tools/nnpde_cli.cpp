#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "nnpde/config.hpp"
#include "nnpde/fdbaseline.hpp"
#include "nnpde/gradcheck.hpp"
#include "nnpde/trainer.hpp"
#include "nnpde/weights_io.hpp"

namespace fs = std::filesystem;
using namespace nnpde;

namespace {

constexpr int kUsage = 2;
constexpr int kNumerical = 3;

struct CommonOptions {
  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::optional<int> precision;
  bool reproducible = false;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "run configuration file");
  cmd->add_option("--preset", o.preset_name, "built-in configuration");
  cmd->add_option("--seed", o.seed, "weight initialization seed");
  cmd->add_option("--precision", o.precision, "32 or 64")->check(CLI::IsMember({32, 64}));
  cmd->add_flag("--reproducible", o.reproducible, "deterministic reductions");
  cmd->add_option("--out", o.out, "output directory");
}

RunConfig resolve(const CommonOptions& o, bool required = true) {
  if (!o.config_path.empty() && !o.preset_name.empty())
    throw ConfigError("config", "give either --config or --preset, not both");
  RunConfig c;
  if (!o.config_path.empty())
    c = load_config(o.config_path);
  else if (!o.preset_name.empty())
    c = preset(o.preset_name);
  else if (required)
    throw ConfigError("config", "one of --config or --preset is required");
  else
    c = preset("2d-linear");
  if (o.seed) c.seed_weights = *o.seed;
  if (o.precision) c.precision = *o.precision;
  if (o.reproducible) c.reproducible = true;
  if (!o.out.empty()) c.output_dir = o.out;
  c.check();
  return c;
}

/// One run per output directory.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / "run.lock") {
    fs::create_directories(dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) throw ConfigError("out", "output directory is locked by another run: " + path_.string());
    std::fclose(f);
  }
  ~DirectoryLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
};

template <typename Real>
int solve(RunConfig config, int progress) {
  if (config.output_dir.empty()) config.output_dir = (fs::path("runs") / config.name).string();
  const fs::path dir = config.output_dir;
  DirectoryLock lock(dir);
  {
    std::ofstream echo(dir / "config.txt");
    write_config(echo, config);
  }
  auto report = [progress](const LogEntry& e) {
    if (progress > 0 && e.epoch % progress == 0)
      std::cerr << "epoch " << e.epoch << "  phase " << e.phase << "  cost " << e.cost << "  rms_v0 " << e.rms_v0
                << "  " << std::fixed << std::setprecision(1) << e.seconds << "s" << std::defaultfloat
                << std::setprecision(6) << '\n';
  };
  const ExperimentResult<Real> r = run_experiment<Real>(config, report);
  std::cout << "grid_points = " << r.grid.size() << '\n';
  write_validation_report(std::cout, r.report);
  std::cout << "artifacts = " << dir.string() << '\n';
  return 0;
}

template <typename Real>
ValidationResult revalidate(const RunConfig& c, const fs::path& weights) {
  const WeightSet<Real> w = load_weights<Real>(weights);
  return validate(Problem(c.problem), w, c.test_count, c.seed_validation);
}

int validate_cmd(const CommonOptions& o, const std::string& run_dir, std::string weights, std::optional<long> count) {
  RunConfig c;
  std::optional<ValidationReport> stored;
  if (!run_dir.empty()) {
    c = load_config((fs::path(run_dir) / "config.txt").string());
    if (weights.empty()) weights = (fs::path(run_dir) / "weights.txt").string();
    std::ifstream in(fs::path(run_dir) / "validation_report.txt");
    if (in) stored = read_validation_report(in);
  } else {
    c = resolve(o);
    if (weights.empty()) throw ConfigError("weights", "--weights or --run is required");
  }
  if (count) c.test_count = *count;
  const int bits = stored_precision(weights);
  const ValidationResult v = bits == 32 ? revalidate<float>(c, weights) : revalidate<double>(c, weights);
  ValidationReport rep{c.problem, v, stored ? stored->rms_v0_final : 0.0};
  write_validation_report(std::cout, rep);
  if (stored && !count) {
    const bool same = stored->result.eps_max == v.eps_max && stored->result.eps_median == v.eps_median;
    std::cout << "matches_report = " << (same ? "true" : "false") << '\n';
    if (!same) return kNumerical;
  }
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    std::ofstream f(fs::path(o.out) / "validation_report.txt");
    write_validation_report(f, rep);
  }
  return 0;
}

template <typename Real>
int gradcheck(const RunConfig& c, double step, double tolerance) {
  const int n = c.problem.dimension;
  const Topology topo({n, 8, 8, 1});
  const WeightSet<Real> w = init_weights<Real>(topo, c.seed_weights);
  const PointCloud pts = ball_sample(n, 5, c.seed_grid);
  const DirectionField dirs = direction_pairs(5, n, c.seed_directions);
  const Problem problem(c.problem);
  bool ok = true;
  std::cout << "topology = " << topo.to_string() << "\nparameters = " << topo.parameter_count() << '\n';
  for (int s = 2; s <= 4; ++s) {
    const GradientCheckResult r = gradient_check(problem, w, pts.coords, dirs, s, step);
    std::cout << "order " << s << ": cost = " << r.cost << ", max_rel_error = " << r.max_rel_error
              << ", max_abs_error = " << r.max_abs_error << '\n';
    ok = ok && r.max_rel_error <= tolerance;
  }
  if (sizeof(Real) == 4) {
    std::cout << "tolerance " << tolerance << " reported only at 32-bit precision\n";
    return 0;
  }
  std::cout << (ok ? "PASS" : "FAIL") << " (tolerance " << tolerance << ")\n";
  return ok ? 0 : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural-network solver for Poisson boundary value problems on the unit ball"};
  app.require_subcommand(1);

  CommonOptions solve_o, validate_o, grad_o;
  int progress = 100;
  auto* solve_cmd = app.add_subcommand("solve", "train a network and validate it");
  add_common(solve_cmd, solve_o);
  solve_cmd->add_option("--progress", progress, "log every N epochs to stderr (0: silent)");

  std::string run_dir, weights_path;
  std::optional<long> test_count;
  auto* validate_cmd_ = app.add_subcommand("validate", "re-evaluate a weights file on random test points");
  add_common(validate_cmd_, validate_o);
  validate_cmd_->add_option("--run", run_dir, "output directory of a solve run");
  validate_cmd_->add_option("--weights", weights_path, "weights file");
  validate_cmd_->add_option("--test-count", test_count, "number of test points");

  double grad_step = 0.0;
  auto* grad_cmd = app.add_subcommand("gradcheck", "compare gradients against central differences");
  add_common(grad_cmd, grad_o);
  grad_cmd->add_option("--step", grad_step, "difference step (default 1e-6, or 1e-2 at 32-bit)");

  std::string fd_out;
  std::vector<double> spacings{1.0 / 16, 1.0 / 32, 1.0 / 64};
  auto* fd_cmd = app.add_subcommand("fd", "finite-difference convergence study on the disc");
  fd_cmd->add_option("--spacing", spacings, "grid spacings");
  fd_cmd->add_option("--out", fd_out, "output directory");

  CostModelOptions cm;
  bool no_round = false;
  std::string cm_out;
  auto* cm_cmd = app.add_subcommand("costmodel", "extrapolated finite-difference solve times");
  cm_cmd->add_option("--delta", cm.delta, "target error");
  cm_cmd->add_option("--hardware-ratio", cm.hardware_ratio, "compute ratio to the reference hardware");
  cm_cmd->add_option("--eps-constant", cm.eps_constant, "stencil error constant");
  cm_cmd->add_option("--spacing-dimension", cm.spacing_dimension, "dimension whose 2n sets h");
  cm_cmd->add_flag("--no-round", no_round, "keep h unrounded");
  cm_cmd->add_option("--out", cm_out, "output directory");

  std::string preset_to_show;
  auto* presets_cmd = app.add_subcommand("presets", "list presets or print one");
  presets_cmd->add_option("name", preset_to_show, "preset to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*solve_cmd) {
      const RunConfig c = resolve(solve_o);
      return c.precision == 32 ? solve<float>(c, progress) : solve<double>(c, progress);
    }
    if (*validate_cmd_) return validate_cmd(validate_o, run_dir, weights_path, test_count);
    if (*grad_cmd) {
      RunConfig c = resolve(grad_o, false);
      if (c.precision == 32) return gradcheck<float>(c, grad_step > 0 ? grad_step : 1e-2, 1e-2);
      return gradcheck<double>(c, grad_step > 0 ? grad_step : 1e-6, 1e-5);
    }
    if (*fd_cmd) {
      const Problem p({ProblemKind::linear, 2, Variant::standard});
      const auto rows = convergence_study(p, spacings);
      write_convergence_csv(std::cout, rows);
      for (std::size_t i = 1; i < rows.size(); ++i)
        std::cout << "ratio h=" << rows[i - 1].h << "->" << rows[i].h << ": "
                  << rows[i - 1].max_error / rows[i].max_error << '\n';
      if (!fd_out.empty()) {
        fs::create_directories(fd_out);
        std::ofstream f(fs::path(fd_out) / "fd_convergence.csv");
        write_convergence_csv(f, rows);
      }
      return 0;
    }
    if (*cm_cmd) {
      if (!(cm.delta > 0.0)) throw ConfigError("delta", "must be positive");
      cm.round_spacing = !no_round;
      const CostModelReport r = cost_model(cm);
      write_cost_model_report(std::cout, r);
      if (!cm_out.empty()) {
        fs::create_directories(cm_out);
        std::ofstream f(fs::path(cm_out) / "cost_model.txt");
        write_cost_model_report(f, r);
        std::ofstream csv(fs::path(cm_out) / "cost_model.csv");
        write_cost_model_csv(csv, r);
      }
      return 0;
    }
    if (*presets_cmd) {
      if (preset_to_show.empty()) {
        for (const auto& n : preset_names()) std::cout << n << '\n';
      } else {
        write_config(std::cout, preset(preset_to_show));
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const FDConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const FormatError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
