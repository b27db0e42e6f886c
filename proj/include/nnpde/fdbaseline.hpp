#pragma once

// Second-order finite differences on the unit ball: stencil error estimates,
// a Shortley-Weller solver on the disc and the extrapolated cost model.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "nnpde/expressions.hpp"
#include "nnpde/problems.hpp"

namespace nnpde {

/// Leading error of the (2n+1)-point Laplacian, (h^2/12) sum_j d^4u/dx_j^4.
struct StencilEstimate {
  double h = 0.0;
  Eigen::VectorXd eps;           // per point
  double max_abs = 0.0;          // max |eps| over the points
  double leading_constant = 0.0; // |eps(0)| / h^2
};

StencilEstimate stencil_error(const Expression& u, int dimension, double h, const Eigen::MatrixXd& points);
StencilEstimate stencil_error(const Problem& problem, double h, const Eigen::MatrixXd& points);

/// Leading error of the central first differences in 4 x_i dv/dx_i for the
/// equation in v: per point max_i |x_i (4h^2/6) d^3v/dx_i^3|.
Eigen::VectorXd first_derivative_error(const Problem& problem, double h, const Eigen::MatrixXd& points);

/// max|u - u_fd| for a constant stencil error eps: |eps| / (2n).
double psi_bound(int dimension, double eps);

struct FDOptions {
  double tolerance = 1e-12;  // relative to |g|
  int max_iterations = 20000;
};

class FDConvergenceError : public std::runtime_error {
 public:
  FDConvergenceError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Lattice nodes (i h, j h) strictly inside the unit disc.
struct FDSolution {
  double h = 0.0;
  Eigen::Matrix2Xd nodes;
  Eigen::VectorXd values;
  double residual = 0.0;  // final |A u - g| / |g|
  int iterations = 0;
  const char* boundary = "shortley-weller";
};

/// Solves lap u = g, u = 0 on the unit circle.
FDSolution fd_solve_disc(const std::function<double(double, double)>& g, double h, const FDOptions& options = {});
/// Same with the problem's linear source; requires a linear 2D problem.
FDSolution fd_solve_disc(const Problem& problem, double h, const FDOptions& options = {});

/// max over lattice nodes of |u_fd - u_a|.
double max_nodal_error(const FDSolution& solution, const Problem& problem);

struct ConvergencePoint {
  double h = 0.0;
  double max_error = 0.0;
  double predicted = 0.0;  // psi_bound of the largest stencil error on the lattice
};

std::vector<ConvergencePoint> convergence_study(const Problem& problem, const std::vector<double>& spacings,
                                                const FDOptions& options = {});
void write_convergence_csv(std::ostream& os, const std::vector<ConvergencePoint>& rows);

struct CostModelOptions {
  double delta = 1e-5;
  double hardware_ratio = 18.0;
  double reference_seconds = 0.34;
  double reference_unknowns = 1e6;
  double eps_constant = 1.6;
  /// Dimension whose 2n enters h = sqrt(2n delta / eps_constant); the same h
  /// then serves every dimension.
  int spacing_dimension = 5;
  /// Round h to one significant figure before counting points.
  bool round_spacing = true;
};

struct CostModelRow {
  int dimension = 0;
  double interior = 0.0;  // (1/h)^n Vol(B^n)
  double surface = 0.0;   // (1/h)^(n-1) Area(S^(n-1))
  double seconds = 0.0;   // interior points only
};

struct CostModelReport {
  CostModelOptions options;
  double h_exact = 0.0;
  double h = 0.0;
  std::array<CostModelRow, 4> rows{};  // dimensions 2..5
  const CostModelRow& row(int dimension) const { return rows.at(dimension - 2); }
};

double ball_volume(int dimension);
double sphere_area(int dimension);  // of S^(dimension-1)

/// Throws std::invalid_argument for delta <= 0.
CostModelReport cost_model(const CostModelOptions& options = {});
void write_cost_model_report(std::ostream& os, const CostModelReport& report);
/// "dimension,log10_seconds".
void write_cost_model_csv(std::ostream& os, const CostModelReport& report);

}  // namespace nnpde
