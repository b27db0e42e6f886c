#pragma once

#include "nnpde/problems.hpp"

namespace nnpde {

struct GradientCheckResult {
  int order = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  double cost = 0.0;
  Eigen::Index parameters = 0;
};

/// Central differences of e_order against cost_gradient. The relative error
/// of an entry is |fd - an| / max(|fd|, |an|, floor_fraction * max|an|).
template <typename Real>
GradientCheckResult gradient_check(const Problem& problem, const WeightSet<Real>& weights,
                                   const Eigen::MatrixXd& points, const DirectionField& directions, int order,
                                   double step, double floor_fraction = 1e-3);

}  // namespace nnpde
