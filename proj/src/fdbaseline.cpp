#include "nnpde/fdbaseline.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>

namespace nnpde {

StencilEstimate stencil_error(const Expression& u, int dimension, double h, const Eigen::MatrixXd& points) {
  if (points.rows() != dimension) throw ShapeError("points do not match the dimension");
  auto eps_at = [&](std::span<const double> x) {
    double sum = 0.0;
    for (int j = 0; j < dimension; ++j) sum += eval_axis_jet(u, x, j).raw(4, 0);
    return h * h / 12.0 * sum;
  };
  StencilEstimate est;
  est.h = h;
  est.eps.resize(points.cols());
  for (Eigen::Index k = 0; k < points.cols(); ++k) {
    est.eps[k] = eps_at({points.col(k).data(), static_cast<std::size_t>(dimension)});
    est.max_abs = std::max(est.max_abs, std::abs(est.eps[k]));
  }
  const std::vector<double> origin(dimension, 0.0);
  est.leading_constant = std::abs(eps_at(origin)) / (h * h);
  return est;
}

StencilEstimate stencil_error(const Problem& problem, double h, const Eigen::MatrixXd& points) {
  return stencil_error(problem.solution(), problem.dimension(), h, points);
}

Eigen::VectorXd first_derivative_error(const Problem& problem, double h, const Eigen::MatrixXd& points) {
  const int n = problem.dimension();
  if (points.rows() != n) throw ShapeError("points do not match the dimension");
  Eigen::VectorXd out(points.cols());
  for (Eigen::Index k = 0; k < points.cols(); ++k) {
    const std::span<const double> x{points.col(k).data(), static_cast<std::size_t>(n)};
    double m = 0.0;
    for (int i = 0; i < n; ++i)
      m = std::max(m, std::abs(x[i] * 4.0 * h * h / 6.0 * eval_axis_jet(problem.inner(), x, i).raw(3, 0)));
    out[k] = m;
  }
  return out;
}

double psi_bound(int dimension, double eps) {
  if (dimension < 1) throw std::invalid_argument("dimension must be positive");
  return std::abs(eps) / (2.0 * dimension);
}

FDSolution fd_solve_disc(const std::function<double(double, double)>& g, double h, const FDOptions& options) {
  if (!(h > 0.0) || h > 0.125) throw std::invalid_argument("spacing must be in (0, 1/8]");
  const int m = static_cast<int>(std::ceil(1.0 / h));
  std::map<std::pair<int, int>, int> index;
  std::vector<std::pair<int, int>> ij;
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j) {
      const double x = i * h, y = j * h;
      if (x * x + y * y < 1.0 - 1e-12) {
        index[{i, j}] = static_cast<int>(ij.size());
        ij.emplace_back(i, j);
      }
    }
  const int count = static_cast<int>(ij.size());

  FDSolution sol;
  sol.h = h;
  sol.nodes.resize(2, count);
  Eigen::VectorXd rhs(count);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(5 * static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const auto [i, j] = ij[k];
    const double x = i * h, y = j * h;
    sol.nodes.col(k) << x, y;
    rhs[k] = g(x, y);
    double diagonal = 0.0;
    // arms: +x, -x, +y, -y; a neighbour outside the disc is replaced by the
    // boundary crossing at distance <= h
    const int di[2][2] = {{1, 0}, {0, 1}};
    for (const auto& d : di) {
      int nb[2];
      double arm[2];
      for (int sgn = 0; sgn < 2; ++sgn) {
        const int s = sgn == 0 ? 1 : -1;
        const auto it = index.find({i + s * d[0], j + s * d[1]});
        if (it != index.end()) {
          nb[sgn] = it->second;
          arm[sgn] = h;
        } else {
          nb[sgn] = -1;
          const double along = d[0] ? x : y, across = d[0] ? y : x;
          const double reach = std::sqrt(std::max(0.0, 1.0 - across * across));
          arm[sgn] = std::max(1e-12, reach - s * along);
        }
      }
      const double sum = arm[0] + arm[1];
      for (int sgn = 0; sgn < 2; ++sgn)
        if (nb[sgn] >= 0) triplets.emplace_back(k, nb[sgn], 2.0 / (arm[sgn] * sum));
      diagonal -= 2.0 / (arm[0] * arm[1]);
    }
    triplets.emplace_back(k, k, diagonal);
  }
  Eigen::SparseMatrix<double> a(count, count);
  a.setFromTriplets(triplets.begin(), triplets.end());

  const double norm_g = rhs.norm();
  if (norm_g == 0.0) {
    sol.values = Eigen::VectorXd::Zero(count);
    return sol;
  }
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
  solver.setTolerance(options.tolerance);
  solver.setMaxIterations(options.max_iterations);
  solver.compute(a);
  if (solver.info() != Eigen::Success) throw FDConvergenceError("preconditioner setup failed", 1.0);
  sol.values = solver.solve(rhs);
  sol.iterations = static_cast<int>(solver.iterations());
  sol.residual = (a * sol.values - rhs).norm() / norm_g;
  if (!(sol.residual <= options.tolerance * 10.0))
    throw FDConvergenceError("finite-difference solve did not converge, relative residual " +
                                 std::to_string(sol.residual),
                             sol.residual);
  return sol;
}

FDSolution fd_solve_disc(const Problem& problem, double h, const FDOptions& options) {
  if (problem.dimension() != 2 || problem.spec().kind != ProblemKind::linear)
    throw std::invalid_argument("the disc solver handles the linear 2D problem");
  return fd_solve_disc(
      [&](double x, double y) {
        const double p[2] = {x, y};
        return problem.source(p);
      },
      h, options);
}

double max_nodal_error(const FDSolution& solution, const Problem& problem) {
  double m = 0.0;
  for (Eigen::Index k = 0; k < solution.nodes.cols(); ++k) {
    const double p[2] = {solution.nodes(0, k), solution.nodes(1, k)};
    m = std::max(m, std::abs(solution.values[k] - problem.analytic_solution(p)));
  }
  return m;
}

std::vector<ConvergencePoint> convergence_study(const Problem& problem, const std::vector<double>& spacings,
                                                const FDOptions& options) {
  std::vector<ConvergencePoint> rows;
  for (const double h : spacings) {
    const FDSolution sol = fd_solve_disc(problem, h, options);
    const StencilEstimate est = stencil_error(problem, h, sol.nodes);
    rows.push_back({h, max_nodal_error(sol, problem), psi_bound(2, est.max_abs)});
  }
  return rows;
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergencePoint>& rows) {
  os << "h,max_error,predicted\n";
  const auto old = os.precision(17);
  for (const auto& r : rows) os << r.h << ',' << r.max_error << ',' << r.predicted << '\n';
  os.precision(old);
}

double ball_volume(int dimension) {
  return std::pow(std::numbers::pi, dimension / 2.0) / std::tgamma(dimension / 2.0 + 1.0);
}

double sphere_area(int dimension) { return dimension * ball_volume(dimension); }

namespace {

double round_one_figure(double v) {
  const double scale = std::pow(10.0, std::floor(std::log10(v)));
  return std::round(v / scale) * scale;
}

}  // namespace

CostModelReport cost_model(const CostModelOptions& options) {
  if (!(options.delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (!(options.hardware_ratio > 0.0) || !(options.reference_seconds > 0.0) || !(options.reference_unknowns > 0.0) ||
      !(options.eps_constant > 0.0))
    throw std::invalid_argument("cost model constants must be positive");
  if (options.spacing_dimension < 1) throw std::invalid_argument("spacing dimension must be positive");
  CostModelReport report;
  report.options = options;
  report.h_exact = std::sqrt(2.0 * options.spacing_dimension * options.delta / options.eps_constant);
  report.h = options.round_spacing ? round_one_figure(report.h_exact) : report.h_exact;
  const double inv = 1.0 / report.h;
  for (int n = 2; n <= 5; ++n) {
    CostModelRow& row = report.rows[n - 2];
    row.dimension = n;
    row.interior = std::pow(inv, n) * ball_volume(n);
    row.surface = std::pow(inv, n - 1) * sphere_area(n);
    row.seconds = options.reference_seconds / options.hardware_ratio * row.interior / options.reference_unknowns;
  }
  return report;
}

void write_cost_model_report(std::ostream& os, const CostModelReport& r) {
  const auto old = os.precision(10);
  os << "delta = " << r.options.delta << '\n'
     << "eps_constant = " << r.options.eps_constant << '\n'
     << "spacing_dimension = " << r.options.spacing_dimension << '\n'
     << "hardware_ratio = " << r.options.hardware_ratio << '\n'
     << "reference_seconds = " << r.options.reference_seconds << '\n'
     << "reference_unknowns = " << r.options.reference_unknowns << '\n'
     << "h_exact = " << r.h_exact << '\n'
     << "h = " << r.h << '\n';
  for (const auto& row : r.rows) {
    os << "interior_" << row.dimension << "d = " << row.interior << '\n'
       << "surface_" << row.dimension << "d = " << row.surface << '\n'
       << "seconds_" << row.dimension << "d = " << row.seconds << '\n';
  }
  os.precision(old);
}

void write_cost_model_csv(std::ostream& os, const CostModelReport& r) {
  os << "dimension,log10_seconds\n";
  const auto old = os.precision(10);
  for (const auto& row : r.rows) os << row.dimension << ',' << std::log10(row.seconds) << '\n';
  os.precision(old);
}

}  // namespace nnpde
