#include "nnpde/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nnpde {

template <typename Real>
GradientCheckResult gradient_check(const Problem& problem, const WeightSet<Real>& weights,
                                   const Eigen::MatrixXd& points, const DirectionField& directions, int order,
                                   double step, double floor_fraction) {
  const SlotSet slots(problem.dimension(), order);
  const ResidualCost<Real> cost(problem, slots, points, directions);
  const Gradient<Real> analytic = cost_gradient(points, directions, weights, slots, cost);

  WeightSet<Real> probe = weights;
  std::vector<Real*> params;
  std::vector<Real> grads;
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto& layer = probe.layers[l];
    const auto& g = analytic.weights.layers[l];
    for (Eigen::Index k = 0; k < layer.weights.size(); ++k) {
      params.push_back(layer.weights.data() + k);
      grads.push_back(g.weights.data()[k]);
    }
    for (Eigen::Index k = 0; k < layer.thresholds.size(); ++k) {
      params.push_back(layer.thresholds.data() + k);
      grads.push_back(g.thresholds.data()[k]);
    }
  }
  double scale = 0.0;
  for (const Real g : grads) scale = std::max(scale, std::abs(static_cast<double>(g)));
  const double floor = floor_fraction * scale;

  GradientCheckResult r;
  r.order = order;
  r.cost = analytic.cost;
  r.parameters = static_cast<Eigen::Index>(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    Real* p = params[i];
    const Real old = *p;
    *p = static_cast<Real>(old + step);
    const double plus = cost_gradient(points, directions, probe, slots, cost).cost;
    *p = static_cast<Real>(old - step);
    const double minus = cost_gradient(points, directions, probe, slots, cost).cost;
    *p = old;
    const double fd = (plus - minus) / (2.0 * step);
    const double an = grads[i];
    const double diff = std::abs(fd - an);
    r.max_abs_error = std::max(r.max_abs_error, diff);
    const double denom = std::max({std::abs(fd), std::abs(an), floor});
    if (denom > 0.0) r.max_rel_error = std::max(r.max_rel_error, diff / denom);
  }
  return r;
}

template GradientCheckResult gradient_check<float>(const Problem&, const WeightSet<float>&, const Eigen::MatrixXd&,
                                                   const DirectionField&, int, double, double);
template GradientCheckResult gradient_check<double>(const Problem&, const WeightSet<double>&, const Eigen::MatrixXd&,
                                                    const DirectionField&, int, double, double);

}  // namespace nnpde
