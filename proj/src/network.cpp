#include "nnpde/network.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace nnpde {

Topology::Topology(std::vector<int> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ShapeError("topology needs at least an input and an output layer");
  for (int w : widths_)
    if (w <= 0) throw ShapeError("topology widths must be positive");
  if (widths_.back() != 1) throw ShapeError("topology output width must be 1");
}

Topology Topology::parse(const std::string& text) {
  std::vector<int> widths;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int w = std::stoi(item, &used);
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      widths.push_back(w);
    } catch (const std::logic_error&) {
      throw ShapeError("bad topology entry '" + item + "' in '" + text + "'");
    }
  }
  return Topology(std::move(widths));
}

Index Topology::parameter_count() const {
  Index n = 0;
  for (std::size_t l = 1; l < widths_.size(); ++l) n += static_cast<Index>(widths_[l]) * (widths_[l - 1] + 1);
  return n;
}

std::string Topology::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < widths_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(widths_[i]);
  }
  return s;
}

template <typename Real>
WeightSet<Real>::WeightSet(const Topology& topology) {
  const auto& w = topology.widths();
  for (std::size_t l = 1; l < w.size(); ++l)
    layers.push_back({Matrix<Real>::Zero(w[l], w[l - 1]), Vector<Real>::Zero(w[l])});
}

template <typename Real>
Topology WeightSet<Real>::topology() const {
  if (layers.empty()) throw ShapeError("empty weight set");
  std::vector<int> widths{static_cast<int>(layers.front().weights.cols())};
  for (const auto& l : layers) widths.push_back(static_cast<int>(l.weights.rows()));
  return Topology(std::move(widths));
}

template <typename Real>
Index WeightSet<Real>::parameter_count() const {
  Index n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.thresholds.size();
  return n;
}

template <typename Real>
bool WeightSet<Real>::same_shape(const WeightSet& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].weights.rows() != other.layers[i].weights.rows() ||
        layers[i].weights.cols() != other.layers[i].weights.cols() ||
        layers[i].thresholds.size() != other.layers[i].thresholds.size())
      return false;
  }
  return true;
}

template <typename Real>
WeightSet<Real> init_weights(const Topology& topology, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  WeightSet<Real> ws(topology);
  for (auto& layer : ws.layers) {
    const double bound = 2.0 / std::sqrt(static_cast<double>(layer.weights.cols()));
    std::uniform_real_distribution<double> wdist(-bound, bound);
    for (Index r = 0; r < layer.weights.rows(); ++r)
      for (Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = static_cast<Real>(wdist(rng));
    std::uniform_real_distribution<double> bdist(-0.1, 0.1);
    for (Index r = 0; r < layer.thresholds.size(); ++r) layer.thresholds(r) = static_cast<Real>(bdist(rng));
  }
  return ws;
}

const std::vector<std::vector<double>>& sigmoid_derivative_polynomials() {
  // P_0(s) = s, P_{k+1}(s) = P_k'(s) * s * (1 - s)
  static const std::vector<std::vector<double>> polys = [] {
    std::vector<std::vector<double>> p{{0.0, 1.0}};
    for (int k = 0; k < kMaxSigmoidDerivative; ++k) {
      const auto& prev = p.back();
      std::vector<double> next(prev.size() + 1, 0.0);
      for (std::size_t i = 1; i < prev.size(); ++i) {
        const double d = prev[i] * static_cast<double>(i);  // coefficient of s^{i-1} in P'
        next[i] += d;
        next[i + 1] -= d;
      }
      p.push_back(std::move(next));
    }
    return p;
  }();
  return polys;
}

template <typename Real>
std::vector<Matrix<Real>> sigmoid_derivatives(const Matrix<Real>& u, int max_order) {
  if (max_order > kMaxSigmoidDerivative) throw std::invalid_argument("sigmoid derivative order too high");
  const auto& polys = sigmoid_derivative_polynomials();
  std::vector<Matrix<Real>> out;
  out.reserve(max_order + 1);
  const Matrix<Real> s = (Real(1) / (Real(1) + (-u.array()).exp())).matrix();
  out.push_back(s);
  for (int k = 1; k <= max_order; ++k) {
    const auto& c = polys[k];
    Matrix<Real> acc = Matrix<Real>::Constant(u.rows(), u.cols(), static_cast<Real>(c.back()));
    for (int i = static_cast<int>(c.size()) - 2; i >= 0; --i)
      acc = (acc.array() * s.array() + static_cast<Real>(c[i])).matrix();
    out.push_back(std::move(acc));
  }
  return out;
}

template <typename Real>
SlotBatch<Real> init_input_slots(const Eigen::MatrixXd& points, const DirectionField& directions,
                                 const SlotSet& slots, Index first, Index count) {
  if (points.rows() != slots.dimension()) throw ShapeError("point dimension does not match slot set");
  if (directions.xi.cols() != points.cols() || directions.zeta.cols() != points.cols() ||
      directions.xi.rows() != points.rows() || directions.zeta.rows() != points.rows())
    throw ShapeError("direction/point count mismatch");
  if (count < 0) count = points.cols() - first;
  if (first < 0 || first + count > points.cols()) throw ShapeError("point range out of bounds");

  const int n = slots.dimension();
  SlotBatch<Real> batch(n, slots.size(), count);
  batch.slot(SlotSet::identity()) = points.middleCols(first, count).template cast<Real>();
  for (int j = 0; j < n; ++j) batch.slot(slots.index(1, j, Direction::none, 0)).row(j).setOnes();
  batch.slot(slots.index(0, -1, Direction::xi, 1)) = directions.xi.middleCols(first, count).template cast<Real>();
  batch.slot(slots.index(0, -1, Direction::zeta, 1)) =
      directions.zeta.middleCols(first, count).template cast<Real>();
  return batch;
}

template <typename Real>
SlotBatch<Real> affine_propagate(const SlotBatch<Real>& in, const Layer<Real>& layer) {
  if (layer.weights.cols() != in.width() || layer.thresholds.size() != layer.weights.rows())
    throw ShapeError("affine layer shape mismatch");
  SlotBatch<Real> out(static_cast<int>(layer.weights.rows()), in.slot_count(), in.points());
  out.data().noalias() = layer.weights * in.data();
  out.slot(SlotSet::identity()).colwise() += layer.thresholds;
  return out;
}

namespace {

template <typename Real>
SlotBatch<Real> activation_apply(const SlotBatch<Real>& in, const ActivationPlan& plan,
                                 const std::vector<Matrix<Real>>& sig) {
  SlotBatch<Real> out(in.width(), in.slot_count(), in.points());
  out.slot(0) = sig[0];
  Matrix<Real> tmp(in.width(), in.points());
  for (int d = 1; d < plan.size(); ++d) {
    auto od = out.slot(d);
    for (const ChainTerm& t : plan.terms(d)) {
      tmp = sig[t.blocks.size()] * static_cast<Real>(t.multiplicity);
      for (int b : t.blocks) tmp.array() *= in.slot(b).array();
      od += tmp;
    }
  }
  return out;
}

// Adjoint of activation_apply with respect to its input slots.
template <typename Real>
SlotBatch<Real> activation_adjoint(const SlotBatch<Real>& in, const ActivationPlan& plan,
                                   const std::vector<Matrix<Real>>& sig, const SlotBatch<Real>& out_bar) {
  SlotBatch<Real> in_bar(in.width(), in.slot_count(), in.points());
  in_bar.slot(0).array() = out_bar.slot(0).array() * sig[1].array();
  Matrix<Real> base(in.width(), in.points()), prod(in.width(), in.points());
  for (int d = 1; d < plan.size(); ++d) {
    const auto ob = out_bar.slot(d);
    for (const ChainTerm& t : plan.terms(d)) {
      const std::size_t k = t.blocks.size();
      base = ob * static_cast<Real>(t.multiplicity);
      prod.setOnes();
      for (int b : t.blocks) prod.array() *= in.slot(b).array();
      in_bar.slot(0).array() += base.array() * sig[k + 1].array() * prod.array();
      base.array() *= sig[k].array();
      for (std::size_t p = 0; p < k; ++p) {
        // repeated blocks are handled by visiting each occurrence separately
        prod = base;
        for (std::size_t q = 0; q < k; ++q)
          if (q != p) prod.array() *= in.slot(t.blocks[q]).array();
        in_bar.slot(t.blocks[p]) += prod;
      }
    }
  }
  return in_bar;
}

template <typename Real>
Index choose_chunk(const EvaluationOptions& opt, const WeightSet<Real>& weights, const SlotSet& slots,
                   Index total) {
  if (opt.chunk_points > 0) return std::min(opt.chunk_points, std::max<Index>(total, 1));
  Index widest = 1;
  for (const auto& l : weights.layers) widest = std::max(widest, l.weights.rows());
  // pre- and post-activation tables for every layer
  const double per_point = 2.0 * static_cast<double>(weights.layers.size()) * static_cast<double>(widest) *
                           slots.size() * sizeof(Real);
  const Index fit = static_cast<Index>(static_cast<double>(opt.memory_budget_bytes) / per_point);
  return std::clamp<Index>(fit, 1, std::max<Index>(total, 1));
}

}  // namespace

template <typename Real>
SlotBatch<Real> activation_propagate(const SlotBatch<Real>& in, const ActivationPlan& plan) {
  if (in.slot_count() != plan.size()) throw ShapeError("activation plan does not match slot batch");
  const Matrix<Real> u = in.slot(0);
  return activation_apply(in, plan, sigmoid_derivatives<Real>(u, plan.max_derivative()));
}

template <typename Real>
SlotBatch<Real> forward(const Eigen::MatrixXd& points, const DirectionField& directions,
                        const WeightSet<Real>& weights, const SlotSet& slots) {
  if (weights.layers.empty()) throw ShapeError("empty weight set");
  const Index total = points.cols();
  const ActivationPlan plan(slots);
  const Index chunk = choose_chunk(EvaluationOptions{}, weights, slots, total);
  SlotBatch<Real> output(1, slots.size(), total);
  for (Index first = 0; first < total; first += chunk) {
    const Index count = std::min(chunk, total - first);
    SlotBatch<Real> a = init_input_slots<Real>(points, directions, slots, first, count);
    const std::size_t L = weights.layers.size();
    for (std::size_t l = 0; l + 1 < L; ++l) a = activation_propagate(affine_propagate(a, weights.layers[l]), plan);
    const SlotBatch<Real> out = affine_propagate(a, weights.layers[L - 1]);
    for (int s = 0; s < slots.size(); ++s) output.slot(s).middleCols(first, count) = out.slot(s);
  }
  return output;
}

template <typename Real>
Vector<Real> forward_values(const WeightSet<Real>& weights, const Eigen::MatrixXd& points) {
  if (weights.layers.empty()) throw ShapeError("empty weight set");
  if (weights.layers.front().weights.cols() != points.rows()) throw ShapeError("point dimension mismatch");
  Matrix<Real> a = points.template cast<Real>();
  const std::size_t L = weights.layers.size();
  for (std::size_t l = 0; l < L; ++l) {
    Matrix<Real> z = weights.layers[l].weights * a;
    z.colwise() += weights.layers[l].thresholds;
    if (l + 1 < L)
      a = (Real(1) / (Real(1) + (-z.array()).exp())).matrix();
    else
      a = std::move(z);
  }
  return a.row(0).transpose();
}

template <typename Real>
Gradient<Real> cost_gradient(const Eigen::MatrixXd& points, const DirectionField& directions,
                             const WeightSet<Real>& weights, const SlotSet& slots,
                             const CostFunctional<Real>& cost, const EvaluationOptions& options) {
  const Index total = points.cols();
  if (total == 0) throw EmptyGridError("cost over an empty grid");
  if (weights.layers.empty()) throw ShapeError("empty weight set");

  const ActivationPlan plan(slots);
  const int max_sig = plan.max_derivative() + 1;
  const Index chunk = choose_chunk(options, weights, slots, total);
  const std::size_t L = weights.layers.size();

  Gradient<Real> result{WeightSet<Real>(weights.topology()), 0.0};
  std::vector<SlotBatch<Real>> inputs(L);   // input of affine layer l
  std::vector<SlotBatch<Real>> pre(L - 1);  // pre-activation of hidden layer l
  std::vector<std::vector<Matrix<Real>>> sig(L - 1);

  for (Index first = 0; first < total; first += chunk) {
    const Index count = std::min(chunk, total - first);
    inputs[0] = init_input_slots<Real>(points, directions, slots, first, count);
    for (std::size_t l = 0; l + 1 < L; ++l) {
      pre[l] = affine_propagate(inputs[l], weights.layers[l]);
      const Matrix<Real> u = pre[l].slot(0);
      sig[l] = sigmoid_derivatives<Real>(u, max_sig);
      inputs[l + 1] = activation_apply(pre[l], plan, sig[l]);
    }
    const SlotBatch<Real> out = affine_propagate(inputs[L - 1], weights.layers[L - 1]);

    SlotBatch<Real> bar(1, slots.size(), count);
    result.cost += cost.accumulate(out, first, total, bar);

    for (std::size_t l = L; l-- > 0;) {
      auto& g = result.weights.layers[l];
      g.weights.noalias() += bar.data() * inputs[l].data().transpose();
      g.thresholds += bar.slot(0).rowwise().sum();
      if (l == 0) break;
      SlotBatch<Real> post_bar(static_cast<int>(weights.layers[l].weights.cols()), slots.size(), count);
      post_bar.data().noalias() = weights.layers[l].weights.transpose() * bar.data();
      bar = activation_adjoint(pre[l - 1], plan, sig[l - 1], post_bar);
    }
  }
  return result;
}

#define NNPDE_INSTANTIATE(Real)                                                                              \
  template struct WeightSet<Real>;                                                                           \
  template WeightSet<Real> init_weights<Real>(const Topology&, std::uint64_t);                              \
  template std::vector<Matrix<Real>> sigmoid_derivatives<Real>(const Matrix<Real>&, int);                    \
  template SlotBatch<Real> init_input_slots<Real>(const Eigen::MatrixXd&, const DirectionField&,            \
                                                  const SlotSet&, Index, Index);                             \
  template SlotBatch<Real> affine_propagate<Real>(const SlotBatch<Real>&, const Layer<Real>&);               \
  template SlotBatch<Real> activation_propagate<Real>(const SlotBatch<Real>&, const ActivationPlan&);        \
  template SlotBatch<Real> forward<Real>(const Eigen::MatrixXd&, const DirectionField&,                      \
                                         const WeightSet<Real>&, const SlotSet&);                            \
  template Vector<Real> forward_values<Real>(const WeightSet<Real>&, const Eigen::MatrixXd&);                \
  template Gradient<Real> cost_gradient<Real>(const Eigen::MatrixXd&, const DirectionField&,                 \
                                              const WeightSet<Real>&, const SlotSet&,                        \
                                              const CostFunctional<Real>&, const EvaluationOptions&);

NNPDE_INSTANTIATE(float)
NNPDE_INSTANTIATE(double)
#undef NNPDE_INSTANTIATE

}  // namespace nnpde
