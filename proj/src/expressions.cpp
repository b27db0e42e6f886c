#include "nnpde/expressions.hpp"

namespace nnpde {

ExpressionHandle ExpressionRegistry::add(std::string name, std::shared_ptr<const Expression> expr) {
  if (!expr) throw std::invalid_argument("null expression '" + name + "'");
  entries_.emplace_back(std::move(name), std::move(expr));
  return ExpressionHandle{entries_.size() - 1};
}

const Expression& ExpressionRegistry::get(ExpressionHandle h) const {
  if (h.index >= entries_.size())
    throw UnknownExpressionError("unregistered expression handle " + std::to_string(h.index));
  return *entries_[h.index].second;
}

std::optional<ExpressionHandle> ExpressionRegistry::find(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].first == name) return ExpressionHandle{i};
  return std::nullopt;
}

BiJet24 eval_expression_jet(const Expression& expr, std::span<const double> point,
                            std::optional<int> axis, std::span<const double> direction) {
  if (direction.size() != point.size())
    throw std::invalid_argument("direction and point dimensions differ");
  if (axis && (*axis < 0 || *axis >= static_cast<int>(point.size())))
    throw std::invalid_argument("axis out of range");
  std::vector<BiJet24> x;
  x.reserve(point.size());
  for (std::size_t k = 0; k < point.size(); ++k) {
    const double ds = (axis && static_cast<std::size_t>(*axis) == k) ? 1.0 : 0.0;
    x.push_back(BiJet24::variable(point[k], ds, direction[k]));
  }
  return expr(std::span<const BiJet24>(x));
}

BiJet24 eval_expression_jet(const ExpressionRegistry& registry, ExpressionHandle handle,
                            std::span<const double> point, std::optional<int> axis,
                            std::span<const double> direction) {
  return eval_expression_jet(registry.get(handle), point, axis, direction);
}

Jet4 eval_directional_jet(const Expression& expr, std::span<const double> point,
                          std::span<const double> direction) {
  if (direction.size() != point.size())
    throw std::invalid_argument("direction and point dimensions differ");
  std::vector<Jet4> x;
  x.reserve(point.size());
  for (std::size_t k = 0; k < point.size(); ++k) x.push_back(Jet4::variable(point[k], direction[k]));
  return expr(std::span<const Jet4>(x));
}

AxisJet4 eval_axis_jet(const Expression& expr, std::span<const double> point, int axis) {
  if (axis < 0 || axis >= static_cast<int>(point.size())) throw std::invalid_argument("axis out of range");
  std::vector<AxisJet4> x;
  x.reserve(point.size());
  for (std::size_t k = 0; k < point.size(); ++k)
    x.push_back(AxisJet4::variable(point[k], static_cast<int>(k) == axis ? 1.0 : 0.0, 0.0));
  return expr(std::span<const AxisJet4>(x));
}

}  // namespace nnpde
