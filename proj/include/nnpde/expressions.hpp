#pragma once

// Closed-form expressions evaluated over plain or jet-valued coordinates.
//
// An expression is a generic callable `f(span<const S>) -> S`; it is
// instantiated for every scalar type the library needs and stored behind a
// small virtual interface.

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nnpde/jets.hpp"

namespace nnpde {

/// Coordinate order up to 4 along one axis, used for stencil error terms.
using AxisJet4 = BiJet<4, 0>;

class Expression {
 public:
  virtual ~Expression() = default;
  virtual double operator()(std::span<const double> x) const = 0;
  virtual Jet4 operator()(std::span<const Jet4> x) const = 0;
  virtual BiJet24 operator()(std::span<const BiJet24> x) const = 0;
  virtual AxisJet4 operator()(std::span<const AxisJet4> x) const = 0;
};

namespace detail {

template <class F>
class LambdaExpression final : public Expression {
 public:
  explicit LambdaExpression(F f) : f_(std::move(f)) {}
  double operator()(std::span<const double> x) const override { return f_(x); }
  Jet4 operator()(std::span<const Jet4> x) const override { return f_(x); }
  BiJet24 operator()(std::span<const BiJet24> x) const override { return f_(x); }
  AxisJet4 operator()(std::span<const AxisJet4> x) const override { return f_(x); }

 private:
  F f_;
};

}  // namespace detail

template <class F>
std::shared_ptr<const Expression> make_expression(F f) {
  return std::make_shared<detail::LambdaExpression<F>>(std::move(f));
}

struct ExpressionHandle {
  std::size_t index = static_cast<std::size_t>(-1);
  friend bool operator==(ExpressionHandle, ExpressionHandle) = default;
};

class UnknownExpressionError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class ExpressionRegistry {
 public:
  ExpressionHandle add(std::string name, std::shared_ptr<const Expression> expr);
  const Expression& get(ExpressionHandle h) const;
  std::optional<ExpressionHandle> find(const std::string& name) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::pair<std::string, std::shared_ptr<const Expression>>> entries_;
};

/// Evaluates expr at x + s*e_axis + t*direction as a bivariate jet in (s, t).
/// With no axis the s-part is identically zero.
BiJet24 eval_expression_jet(const Expression& expr, std::span<const double> point,
                            std::optional<int> axis, std::span<const double> direction);

BiJet24 eval_expression_jet(const ExpressionRegistry& registry, ExpressionHandle handle,
                            std::span<const double> point, std::optional<int> axis,
                            std::span<const double> direction);

/// Jet of expr along the line x + t*direction.
Jet4 eval_directional_jet(const Expression& expr, std::span<const double> point,
                          std::span<const double> direction);

/// Jet of expr along coordinate axis up to fourth order.
AxisJet4 eval_axis_jet(const Expression& expr, std::span<const double> point, int axis);

}  // namespace nnpde
