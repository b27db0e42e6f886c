#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace nnpde {

enum class PointKind : std::uint8_t { surface, interior };

/// Points stored column-wise (dimension x count).
struct PointCloud {
  Eigen::MatrixXd coords;
  std::vector<PointKind> kinds;

  int dimension() const { return static_cast<int>(coords.rows()); }
  Eigen::Index size() const { return coords.cols(); }
};

/// Per-point direction pair, column-wise (dimension x count).
struct DirectionField {
  Eigen::MatrixXd xi;
  Eigen::MatrixXd zeta;

  Eigen::Index size() const { return xi.cols(); }
};

}  // namespace nnpde
