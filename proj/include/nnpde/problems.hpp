#pragma once

// Poisson boundary value problems on the unit n-ball after the substitution
// u = v * (1 - r^2):
//
//   linear:    (1-r^2) lap v - 4 x.grad v - 2n v                = g,  g = lap u_a
//   nonlinear: (1-r^2) lap v - 4 x.grad v - 2n v + (1-r^2)^2 v^2 = h,  h = lap u_a + u_a^2
//
// Residual V = LHS - RHS is assembled along xi and zeta as order-4 jets from
// the network output slots.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nnpde/cloud.hpp"
#include "nnpde/expressions.hpp"
#include "nnpde/network.hpp"

namespace nnpde {

enum class ProblemKind { linear, nonlinear };
enum class Variant { standard, cubic_x3 };

std::string to_string(ProblemKind k);
std::string to_string(Variant v);
ProblemKind parse_problem_kind(const std::string& s);
Variant parse_variant(const std::string& s);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::linear;
  int dimension = 2;
  Variant variant = Variant::standard;
  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

/// 10/17, 3/5, 7/9, 7/9 for dimensions 2..5.
double solution_prefactor(int dimension);

class Problem {
 public:
  /// Throws std::invalid_argument for dimension outside 2..5 or cubic_x3 in 2D.
  explicit Problem(const ProblemSpec& spec);

  const ProblemSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }

  /// u_a and the inner factor v_a = u_a / (1 - r^2).
  const Expression& solution() const { return registry_.get(solution_); }
  const Expression& inner() const { return registry_.get(inner_); }
  const ExpressionRegistry& registry() const { return registry_; }

  double analytic_solution(std::span<const double> x) const;
  double analytic_inner(std::span<const double> x) const;

  /// Jet of g (linear) or h (nonlinear) along x + t*direction.
  Jet4 source_jet(std::span<const double> x, std::span<const double> direction) const;
  double source(std::span<const double> x) const;

 private:
  ProblemSpec spec_;
  ExpressionRegistry registry_;
  ExpressionHandle solution_;
  ExpressionHandle inner_;
};

/// Per point: residual jets along xi and zeta. Coefficients are normalized
/// (c_m = d^m V / d dir^m / m!); orders above the assembly order are zero.
struct ResidualJets {
  std::vector<Jet4> xi;
  std::vector<Jet4> zeta;
  Eigen::Index size() const { return static_cast<Eigen::Index>(xi.size()); }
};

struct CostBreakdown {
  std::array<double, 5> terms{};  // V_0 .. V_4 (means over points)
  double total = 0.0;             // e_s
  double rms_v0 = 0.0;            // sqrt(mean V^2)
  Eigen::Index points = 0;
  int order = 0;
};

/// Source jets for every point along both directions.
struct SourceJets {
  std::vector<Jet4> xi;
  std::vector<Jet4> zeta;
};
SourceJets source_jets(const Problem& problem, const Eigen::MatrixXd& points, const DirectionField& directions);

/// Output slots of the exact inner factor v_a, computed from its closed form.
SlotBatch<double> analytic_output_slots(const Problem& problem, const Eigen::MatrixXd& points,
                                        const DirectionField& directions, const SlotSet& slots);

/// Options that alter the assembled equation (used for consistency checks).
struct ResidualOptions {
  /// Multiplies the (1-r^2)^2 v^2 term of the nonlinear equation.
  double quadratic_coefficient = 1.0;
};

template <typename Real>
ResidualJets residual_jets(const Problem& problem, const SlotBatch<Real>& output, const SlotSet& slots,
                           const Eigen::MatrixXd& points, const DirectionField& directions,
                           const ResidualOptions& options = {});

/// Same with precomputed sources (the source for the nonlinear equation is h).
template <typename Real>
ResidualJets residual_jets(const Problem& problem, const SlotBatch<Real>& output, const SlotSet& slots,
                           const Eigen::MatrixXd& points, const DirectionField& directions, const SourceJets& sources,
                           const ResidualOptions& options = {});

/// V_0 = mean V^2, V_j = mean((d^j V/dxi^j)^2 + (d^j V/dzeta^j)^2), e_s = sum_{j<=s} V_j.
CostBreakdown cost(const ResidualJets& jets, int order);

/// e_s as a differentiable functional of the network output slots.
template <typename Real>
class ResidualCost final : public CostFunctional<Real> {
 public:
  ResidualCost(const Problem& problem, const SlotSet& slots, const Eigen::MatrixXd& points,
               const DirectionField& directions, ResidualOptions options = {});

  /// Recomputes source jets after the directions change.
  void set_directions(const DirectionField& directions);
  const DirectionField& directions() const { return directions_; }

  double accumulate(const SlotBatch<Real>& output, Eigen::Index first, Eigen::Index total_points,
                    SlotBatch<Real>& adjoint) const override;

  /// sqrt(mean V^2) from the most recent full pass of accumulate().
  double last_rms_v0() const { return std::sqrt(mean_square_v0_); }

 private:
  Problem problem_;
  SlotSet slots_;
  Eigen::MatrixXd points_;
  DirectionField directions_;
  SourceJets sources_;
  ResidualOptions options_;
  mutable double mean_square_v0_ = 0.0;
};

struct ValidationResult {
  double eps_max = 0.0;
  double eps_median = 0.0;
  Eigen::Index n_test = 0;
  std::uint64_t seed = 0;
};

/// max / median of |v(x)(1-r^2) - u_a(x)| over uniform ball samples.
ValidationResult validate_function(const Problem& problem,
                                   const std::function<void(const Eigen::MatrixXd&, Eigen::VectorXd&)>& inner,
                                   Eigen::Index test_count, std::uint64_t seed);

template <typename Real>
ValidationResult validate(const Problem& problem, const WeightSet<Real>& weights, Eigen::Index test_count,
                          std::uint64_t seed);

struct ValidationReport {
  ProblemSpec problem;
  ValidationResult result;
  double rms_v0_final = 0.0;
};

void write_validation_report(std::ostream& os, const ValidationReport& report);
ValidationReport read_validation_report(std::istream& is);

}  // namespace nnpde
