#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nnpde/config.hpp"
#include "nnpde/fdbaseline.hpp"
#include "nnpde/gradcheck.hpp"
#include "nnpde/trainer.hpp"
#include "nnpde/weights_io.hpp"

namespace py = pybind11;
using namespace nnpde;

namespace {

RunConfig resolve(const std::string& preset_name, const std::string& config_text) {
  if (!config_text.empty()) {
    std::istringstream in(config_text);
    return parse_config(in);
  }
  return preset(preset_name);
}

py::dict to_dict(const ValidationResult& v) {
  py::dict d;
  d["eps_max"] = v.eps_max;
  d["eps_median"] = v.eps_median;
  d["n_test"] = v.n_test;
  d["seed"] = v.seed;
  return d;
}

template <typename Real>
py::dict run(RunConfig c, const std::function<void(long, int, double)>& on_epoch) {
  std::function<void(const LogEntry&)> cb;
  if (on_epoch) cb = [&](const LogEntry& e) { on_epoch(e.epoch, e.phase, e.cost); };
  ExperimentResult<Real> r;
  {
    py::gil_scoped_release release;
    r = run_experiment<Real>(c, cb);
  }
  py::dict d = to_dict(r.report.result);
  d["grid_points"] = r.grid.size();
  d["epochs"] = r.log.entries.size();
  d["final_cost"] = r.log.entries.empty() ? 0.0 : r.log.entries.back().cost;
  std::vector<double> rms;
  for (const auto& p : r.phase_end) rms.push_back(p.rms_v0);
  d["phase_end_rms_v0"] = rms;
  return d;
}

Problem make_problem(const std::string& kind, int dimension, const std::string& variant) {
  return Problem({parse_problem_kind(kind), dimension, parse_variant(variant)});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Neural-network solver for elliptic boundary value problems in the unit ball";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("slot_count", [](int n, int s) { return enumerate_slots(n, s).size(); }, py::arg("dimension"),
        py::arg("order"));

  m.def("preset_names", &preset_names);
  m.def(
      "preset",
      [](const std::string& name) {
        std::ostringstream os;
        write_config(os, preset(name));
        return os.str();
      },
      py::arg("name"), "Fully resolved config text of a preset.");

  m.def(
      "solve",
      [](const std::string& preset_name, const std::string& config, std::optional<std::uint64_t> seed,
         int precision, const std::string& out, const std::function<void(long, int, double)>& on_epoch) {
        RunConfig c = resolve(preset_name, config);
        if (seed) c.seed_weights = *seed;
        c.precision = precision;
        c.output_dir = out;
        c.check();
        return precision == 32 ? run<float>(c, on_epoch) : run<double>(c, on_epoch);
      },
      py::arg("preset") = "", py::arg("config") = "", py::arg("seed") = py::none(), py::arg("precision") = 64,
      py::arg("out") = "", py::arg("on_epoch") = nullptr);

  m.def(
      "validate",
      [](const std::string& weights, const std::string& preset_name, const std::string& config, long test_count) {
        const RunConfig c = resolve(preset_name, config);
        const Problem p(c.problem);
        const long n = test_count > 0 ? test_count : c.test_count;
        if (stored_precision(weights) == 32) return to_dict(validate(p, load_weights<float>(weights), n, c.seed_validation));
        return to_dict(validate(p, load_weights<double>(weights), n, c.seed_validation));
      },
      py::arg("weights"), py::arg("preset") = "", py::arg("config") = "", py::arg("test_count") = 0);

  m.def(
      "network_values",
      [](const std::string& weights, const Eigen::MatrixXd& points) -> Eigen::VectorXd {
        if (stored_precision(weights) == 32)
          return forward_values(load_weights<float>(weights), points).cast<double>();
        return forward_values(load_weights<double>(weights), points);
      },
      py::arg("weights"), py::arg("points"), "Network output v at the columns of a (dimension, count) array.");

  m.def(
      "analytic_solution",
      [](const Eigen::MatrixXd& points, const std::string& kind, const std::string& variant) {
        const Problem p = make_problem(kind, static_cast<int>(points.rows()), variant);
        Eigen::VectorXd u(points.cols());
        for (Eigen::Index k = 0; k < points.cols(); ++k)
          u[k] = p.analytic_solution({points.col(k).data(), static_cast<std::size_t>(points.rows())});
        return u;
      },
      py::arg("points"), py::arg("kind") = "linear", py::arg("variant") = "default");

  m.def(
      "source",
      [](const Eigen::MatrixXd& points, const std::string& kind, const std::string& variant) {
        const Problem p = make_problem(kind, static_cast<int>(points.rows()), variant);
        Eigen::VectorXd g(points.cols());
        for (Eigen::Index k = 0; k < points.cols(); ++k)
          g[k] = p.source({points.col(k).data(), static_cast<std::size_t>(points.rows())});
        return g;
      },
      py::arg("points"), py::arg("kind") = "linear", py::arg("variant") = "default");

  m.def(
      "grid",
      [](int dimension, double theta, double lambda, std::uint64_t seed, long interior_target) {
        RunConfig c;
        c.problem.dimension = dimension;
        c.topology = Topology({dimension, 1});
        c.theta = theta;
        c.lambda = lambda;
        c.seed_grid = seed;
        c.interior_target = interior_target;
        const PointCloud g = build_grid(c);
        std::vector<bool> surface(g.kinds.size());
        for (std::size_t i = 0; i < g.kinds.size(); ++i) surface[i] = g.kinds[i] == PointKind::surface;
        return py::make_tuple(g.coords, surface);
      },
      py::arg("dimension"), py::arg("theta"), py::arg("lambda_"), py::arg("seed") = 1, py::arg("interior_target") = 0,
      "Collocation grid as (coords, is_surface).");

  m.def(
      "gradient_check",
      [](int dimension, int order, std::uint64_t seed, double step, const std::string& kind) {
        const Problem p({parse_problem_kind(kind), dimension, Variant::standard});
        const WeightSet<double> w = init_weights<double>(Topology({dimension, 8, 8, 1}), seed);
        const PointCloud pts = ball_sample(dimension, 5, seed + 1);
        const DirectionField d = direction_pairs(5, dimension, seed + 2);
        const GradientCheckResult r = gradient_check(p, w, pts.coords, d, order, step);
        py::dict out;
        out["max_rel_error"] = r.max_rel_error;
        out["max_abs_error"] = r.max_abs_error;
        out["cost"] = r.cost;
        out["parameters"] = r.parameters;
        return out;
      },
      py::arg("dimension") = 2, py::arg("order") = 4, py::arg("seed") = 1, py::arg("step") = 1e-6,
      py::arg("kind") = "nonlinear");

  m.def(
      "fd_convergence",
      [](const std::vector<double>& spacings) {
        const Problem p({ProblemKind::linear, 2, Variant::standard});
        py::list rows;
        for (const ConvergencePoint& c : convergence_study(p, spacings)) {
          py::dict d;
          d["h"] = c.h;
          d["max_error"] = c.max_error;
          d["predicted"] = c.predicted;
          rows.append(d);
        }
        return rows;
      },
      py::arg("spacings") = std::vector<double>{1.0 / 16, 1.0 / 32, 1.0 / 64});

  m.def(
      "cost_model",
      [](double delta, double hardware_ratio, bool round_spacing) {
        CostModelOptions o;
        o.delta = delta;
        o.hardware_ratio = hardware_ratio;
        o.round_spacing = round_spacing;
        const CostModelReport r = cost_model(o);
        py::dict d;
        d["h"] = r.h;
        d["h_exact"] = r.h_exact;
        for (const CostModelRow& row : r.rows) {
          const std::string n = std::to_string(row.dimension) + "d";
          d[("interior_" + n).c_str()] = row.interior;
          d[("surface_" + n).c_str()] = row.surface;
          d[("seconds_" + n).c_str()] = row.seconds;
        }
        return d;
      },
      py::arg("delta") = 1e-5, py::arg("hardware_ratio") = 18.0, py::arg("round_spacing") = true);
}
