#pragma once

// Extended perceptron: every derivative slot is a (width x points) table that
// is pushed through the same affine maps as the value itself; the sigmoid
// layers combine slots by the higher-order chain rule (ActivationPlan).

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnpde/cloud.hpp"
#include "nnpde/slots.hpp"

namespace nnpde {

template <typename Real>
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Eigen::Index;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyGridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Layer widths, input first. Every layer between input and output is sigmoid.
class Topology {
 public:
  explicit Topology(std::vector<int> widths);
  /// "2,96,96,1"
  static Topology parse(const std::string& text);

  const std::vector<int>& widths() const { return widths_; }
  int input_width() const { return widths_.front(); }
  /// Number of affine maps (widths - 1).
  int layer_count() const { return static_cast<int>(widths_.size()) - 1; }
  Index parameter_count() const;
  std::string to_string() const;
  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  std::vector<int> widths_;
};

template <typename Real>
struct Layer {
  Matrix<Real> weights;     // next width x previous width
  Vector<Real> thresholds;  // next width
};

template <typename Real>
struct WeightSet {
  std::vector<Layer<Real>> layers;

  WeightSet() = default;
  /// All-zero weights shaped after the topology.
  explicit WeightSet(const Topology& topology);

  Topology topology() const;
  Index parameter_count() const;
  bool same_shape(const WeightSet& other) const;

  template <typename U>
  WeightSet<U> cast() const {
    WeightSet<U> out;
    for (const auto& l : layers) out.layers.push_back({l.weights.template cast<U>(), l.thresholds.template cast<U>()});
    return out;
  }
};

/// Uniform weights in +-2/sqrt(senders), thresholds in +-0.1; reproducible per seed.
template <typename Real>
WeightSet<Real> init_weights(const Topology& topology, std::uint64_t seed);

/// All slot tables of one layer side by side: slot s occupies columns
/// [s*points, (s+1)*points).
template <typename Real>
class SlotBatch {
 public:
  SlotBatch() = default;
  SlotBatch(int width, int slot_count, Index points)
      : data_(Matrix<Real>::Zero(width, static_cast<Index>(slot_count) * points)),
        slot_count_(slot_count),
        points_(points) {}

  int width() const { return static_cast<int>(data_.rows()); }
  int slot_count() const { return slot_count_; }
  Index points() const { return points_; }

  auto slot(int s) { return data_.middleCols(static_cast<Index>(s) * points_, points_); }
  auto slot(int s) const { return data_.middleCols(static_cast<Index>(s) * points_, points_); }
  Real& at(int s, int row, Index point) { return data_(row, static_cast<Index>(s) * points_ + point); }
  Real at(int s, int row, Index point) const { return data_(row, static_cast<Index>(s) * points_ + point); }

  Matrix<Real>& data() { return data_; }
  const Matrix<Real>& data() const { return data_; }

 private:
  Matrix<Real> data_;
  int slot_count_ = 0;
  Index points_ = 0;
};

/// sigma^(k) as a polynomial in sigma, k = 0..max_order.
/// coefficients[k][i] multiplies sigma^i.
const std::vector<std::vector<double>>& sigmoid_derivative_polynomials();
constexpr int kMaxSigmoidDerivative = 7;

/// sigma^(0..max_order) of every entry of u.
template <typename Real>
std::vector<Matrix<Real>> sigmoid_derivatives(const Matrix<Real>& u, int max_order);

/// Input layer: identity slot = coordinates, d/dx_j slot = row indicator,
/// d/dxi and d/dzeta slots = direction coordinates, everything else zero.
/// Columns [first, first+count) of the clouds are used.
template <typename Real>
SlotBatch<Real> init_input_slots(const Eigen::MatrixXd& points, const DirectionField& directions,
                                 const SlotSet& slots, Index first = 0, Index count = -1);

/// W * table for every slot; thresholds only enter the identity slot.
template <typename Real>
SlotBatch<Real> affine_propagate(const SlotBatch<Real>& in, const Layer<Real>& layer);

template <typename Real>
SlotBatch<Real> activation_propagate(const SlotBatch<Real>& in, const ActivationPlan& plan);

/// Output slots of the network (width 1) at every point.
template <typename Real>
SlotBatch<Real> forward(const Eigen::MatrixXd& points, const DirectionField& directions,
                        const WeightSet<Real>& weights, const SlotSet& slots);

/// Plain network values, no derivative slots.
template <typename Real>
Vector<Real> forward_values(const WeightSet<Real>& weights, const Eigen::MatrixXd& points);

/// A scalar cost that is a mean over points of per-point terms.
template <typename Real>
class CostFunctional {
 public:
  virtual ~CostFunctional() = default;
  /// Adds the contribution of points [first, first + output.points()) and
  /// writes dE/d(output slot entries) into adjoint (same shape as output).
  /// total_points is the N of the full mean.
  virtual double accumulate(const SlotBatch<Real>& output, Index first, Index total_points,
                            SlotBatch<Real>& adjoint) const = 0;
};

template <typename Real>
struct Gradient {
  WeightSet<Real> weights;
  double cost = 0.0;
};

struct EvaluationOptions {
  /// Points per forward/backward chunk; 0 chooses from a memory budget.
  Index chunk_points = 0;
  std::size_t memory_budget_bytes = std::size_t{512} << 20;
};

template <typename Real>
Gradient<Real> cost_gradient(const Eigen::MatrixXd& points, const DirectionField& directions,
                             const WeightSet<Real>& weights, const SlotSet& slots,
                             const CostFunctional<Real>& cost, const EvaluationOptions& options = {});

}  // namespace nnpde
