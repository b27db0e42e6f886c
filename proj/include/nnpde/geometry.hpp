#pragma once

// Collocation grids on the unit n-ball, per-point random direction pairs,
// uniform test sampling and direction renormalization.

#include <cstdint>
#include <iosfwd>
#include <optional>

#include "nnpde/cloud.hpp"
#include "nnpde/network.hpp"

namespace nnpde {

struct GridSpec {
  int dimension = 2;
  double theta = 0.0;   // surface angular spacing, radians
  double lambda = 0.0;  // interior lattice spacing
  std::uint64_t seed = 0;
};

/// Number of surface points used for (dimension, theta). Two dimensions use
/// ceil(2*pi/theta) + 1 equally spaced points; higher dimensions are
/// calibrated so that the mean nearest-neighbour angle is close to theta.
int surface_point_count(int dimension, double theta);

/// Quasi-uniform points on the unit sphere, deterministic per seed.
PointCloud surface_grid(const GridSpec& spec);

/// Rotated, shifted Cartesian lattice restricted to the open unit ball.
PointCloud interior_grid(const GridSpec& spec);

/// Searches lattice seeds derived from spec.seed for one whose point count
/// equals target; returns the closest candidate if none matches.
PointCloud interior_grid_near_count(const GridSpec& spec, Eigen::Index target, int max_attempts = 256);

/// Surface followed by interior points.
PointCloud concatenate(const PointCloud& a, const PointCloud& b);

/// Unit, mutually orthogonal (xi, zeta) per point, independent per point.
DirectionField direction_pairs(Eigen::Index count, int dimension, std::uint64_t seed);

/// Uniform samples in the unit ball (radius = U^(1/n)).
PointCloud ball_sample(int dimension, Eigen::Index count, std::uint64_t seed);

struct RenormalizationReport {
  Eigen::Index xi_rescaled = 0;
  Eigen::Index zeta_rescaled = 0;
};

/// For every point: M = max |slot| over output slots of directional order >= 1
/// along xi; if M > threshold, xi is divided by M^(1/k) with k the order of the
/// slot attaining M. Same for zeta.
template <typename Real>
DirectionField renormalize(const DirectionField& directions, const SlotBatch<Real>& output, const SlotSet& slots,
                           double threshold = 4.0, RenormalizationReport* report = nullptr);

/// CSV "x1,...,xn,kind".
void write_grid_csv(std::ostream& os, const PointCloud& cloud);

}  // namespace nnpde
