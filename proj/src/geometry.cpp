#include "nnpde/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

namespace nnpde {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  do {
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

double sphere_area(int n) {
  // surface measure of S^{n-1}
  return 2.0 * std::pow(kPi, n / 2.0) / std::tgamma(n / 2.0);
}

void check_dimension(int n) {
  if (n < 2 || n > 5) throw std::invalid_argument("dimension must be in 2..5, got " + std::to_string(n));
}

// Point counts reported for the grids of the reference experiments.
struct CalibratedCount {
  int dimension;
  int steps;  // theta = pi / steps
  int count;
};
constexpr CalibratedCount kCalibrated[] = {
    {3, 6, 51}, {3, 8, 87}, {4, 6, 154}, {4, 8, 357}, {5, 6, 399}, {5, 8, 1217},
};

// Ratio between the calibrated counts and area / theta^(n-1).
constexpr double kPackingFactor = 1.12;

Eigen::MatrixXd fibonacci_sphere(int count) {
  Eigen::MatrixXd p(3, count);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    p.col(i) << r * std::cos(phi), r * std::sin(phi), z;
  }
  return p;
}

// Riesz-energy relaxation of random points on S^{n-1}.
Eigen::MatrixXd relaxed_sphere(int n, int count, double theta, std::mt19937_64& rng) {
  Eigen::MatrixXd p(n, count);
  for (int i = 0; i < count; ++i) p.col(i) = random_unit(n, rng);
  if (count < 2) return p;
  const int iterations = 150;
  const double power = n + 1;  // |d|^{-(s+2)} with s = n - 1
  Eigen::MatrixXd force(n, count);
  for (int it = 0; it < iterations; ++it) {
    force.setZero();
    for (int i = 0; i < count; ++i)
      for (int j = i + 1; j < count; ++j) {
        const Eigen::VectorXd d = p.col(i) - p.col(j);
        const double r = std::max(d.norm(), 1e-9);
        const Eigen::VectorXd f = d / std::pow(r, power);
        force.col(i) += f;
        force.col(j) -= f;
      }
    const double step = theta * (0.3 * (1.0 - static_cast<double>(it) / iterations) + 0.02);
    for (int i = 0; i < count; ++i) {
      Eigen::VectorXd t = force.col(i) - force.col(i).dot(p.col(i)) * p.col(i);
      const double tn = t.norm();
      if (tn > 0) p.col(i) += step * t / tn * std::min(1.0, tn / force.col(i).norm() * 4.0);
      p.col(i).normalize();
    }
  }
  return p;
}

}  // namespace

int surface_point_count(int dimension, double theta) {
  check_dimension(dimension);
  if (!(theta > 0.0) || theta > kPi) throw std::invalid_argument("theta must be in (0, pi]");
  if (dimension == 2) return static_cast<int>(std::ceil(2.0 * kPi / theta - 1e-9)) + 1;
  for (const auto& c : kCalibrated)
    if (c.dimension == dimension && std::abs(theta - kPi / c.steps) < 1e-12) return c.count;
  return std::max(2, static_cast<int>(std::lround(kPackingFactor * sphere_area(dimension) /
                                                  std::pow(theta, dimension - 1))));
}

PointCloud surface_grid(const GridSpec& spec) {
  const int n = spec.dimension;
  const int count = surface_point_count(n, spec.theta);
  PointCloud cloud;
  if (n == 2) {
    cloud.coords.resize(2, count);
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * kPi * i / count;
      cloud.coords.col(i) << std::cos(a), std::sin(a);
    }
  } else if (n == 3) {
    cloud.coords = fibonacci_sphere(count);
  } else {
    std::mt19937_64 rng(spec.seed ^ 0x5eedf00dULL);
    cloud.coords = relaxed_sphere(n, count, spec.theta, rng);
  }
  cloud.kinds.assign(count, PointKind::surface);
  return cloud;
}

PointCloud interior_grid(const GridSpec& spec) {
  const int n = spec.dimension;
  check_dimension(n);
  if (!(spec.lambda > 0.0) || spec.lambda > 1.0) throw std::invalid_argument("lambda must be in (0, 1]");
  std::mt19937_64 rng(spec.seed);

  // rotation in the plane of two random unit vectors taking a onto b
  const Eigen::VectorXd a = random_unit(n, rng);
  const Eigen::VectorXd b = random_unit(n, rng);
  const double c = std::clamp(a.dot(b), -1.0, 1.0);
  Eigen::VectorXd w = b - c * a;
  const double s = w.norm();
  Eigen::MatrixXd rotation = Eigen::MatrixXd::Identity(n, n);
  if (s > 1e-12) {
    w /= s;
    rotation += (c - 1.0) * (a * a.transpose() + w * w.transpose()) + s * (w * a.transpose() - a * w.transpose());
  }

  std::uniform_real_distribution<double> shift_dist(-spec.lambda / 4.0, spec.lambda / 4.0);
  Eigen::VectorXd shift(n);
  for (int i = 0; i < n; ++i) shift(i) = shift_dist(rng);

  const int k = static_cast<int>(std::floor(1.0 / spec.lambda + 1e-9));
  const int side = 2 * k + 1;
  Eigen::Index total = 1;
  for (int i = 0; i < n; ++i) total *= side;

  std::vector<Eigen::VectorXd> kept;
  Eigen::VectorXd x(n);
  for (Eigen::Index idx = 0; idx < total; ++idx) {
    Eigen::Index rem = idx;
    for (int i = 0; i < n; ++i) {
      x(i) = static_cast<double>(rem % side - k) * spec.lambda;
      rem /= side;
    }
    Eigen::VectorXd y = rotation * x + shift;
    if (y.squaredNorm() < 1.0) kept.push_back(std::move(y));
  }
  PointCloud cloud;
  cloud.coords.resize(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) cloud.coords.col(static_cast<Eigen::Index>(i)) = kept[i];
  cloud.kinds.assign(kept.size(), PointKind::interior);
  return cloud;
}

PointCloud interior_grid_near_count(const GridSpec& spec, Eigen::Index target, int max_attempts) {
  PointCloud best;
  Eigen::Index best_gap = -1;
  for (int attempt = 0; attempt < std::max(1, max_attempts); ++attempt) {
    GridSpec trial = spec;
    trial.seed = spec.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt);
    PointCloud cloud = interior_grid(trial);
    const Eigen::Index gap = std::abs(cloud.size() - target);
    if (best_gap < 0 || gap < best_gap) {
      best = std::move(cloud);
      best_gap = gap;
    }
    if (best_gap == 0) break;
  }
  return best;
}

PointCloud concatenate(const PointCloud& a, const PointCloud& b) {
  if (a.size() > 0 && b.size() > 0 && a.dimension() != b.dimension())
    throw std::invalid_argument("cannot concatenate clouds of different dimension");
  PointCloud out;
  const int n = a.size() > 0 ? a.dimension() : b.dimension();
  out.coords.resize(n, a.size() + b.size());
  if (a.size()) out.coords.leftCols(a.size()) = a.coords;
  if (b.size()) out.coords.rightCols(b.size()) = b.coords;
  out.kinds = a.kinds;
  out.kinds.insert(out.kinds.end(), b.kinds.begin(), b.kinds.end());
  return out;
}

DirectionField direction_pairs(Eigen::Index count, int dimension, std::uint64_t seed) {
  if (dimension < 2) throw std::invalid_argument("direction pairs need dimension >= 2");
  std::mt19937_64 rng(seed);
  DirectionField field{Eigen::MatrixXd(dimension, count), Eigen::MatrixXd(dimension, count)};
  for (Eigen::Index i = 0; i < count; ++i) {
    while (true) {
      const Eigen::VectorXd xi = random_unit(dimension, rng);
      const Eigen::VectorXd zeta = random_unit(dimension, rng);
      Eigen::VectorXd ortho = zeta - zeta.dot(xi) * xi;
      const double norm = ortho.norm();
      if (norm < 1e-8) continue;  // collinear pair, draw again
      ortho /= norm;
      // one more pass keeps xi . zeta at rounding level
      ortho -= ortho.dot(xi) * xi;
      ortho.normalize();
      field.xi.col(i) = xi;
      field.zeta.col(i) = ortho;
      break;
    }
  }
  return field;
}

PointCloud ball_sample(int dimension, Eigen::Index count, std::uint64_t seed) {
  if (dimension < 1) throw std::invalid_argument("dimension must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  PointCloud cloud;
  cloud.coords.resize(dimension, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double r = std::pow(uniform(rng), 1.0 / dimension);
    cloud.coords.col(i) = r * random_unit(dimension, rng);
  }
  cloud.kinds.assign(static_cast<std::size_t>(count), PointKind::interior);
  return cloud;
}

template <typename Real>
DirectionField renormalize(const DirectionField& directions, const SlotBatch<Real>& output, const SlotSet& slots,
                           double threshold, RenormalizationReport* report) {
  if (output.points() != directions.size()) throw ShapeError("output slots and directions differ in point count");
  DirectionField out = directions;
  RenormalizationReport local;
  for (Direction dir : {Direction::xi, Direction::zeta}) {
    Eigen::MatrixXd& vectors = dir == Direction::xi ? out.xi : out.zeta;
    for (Eigen::Index i = 0; i < output.points(); ++i) {
      double largest = 0.0;
      int order = 0;
      for (int s = 0; s < slots.size(); ++s) {
        if (slots[s].direction != dir) continue;
        const double m = std::abs(static_cast<double>(output.at(s, 0, i)));
        if (m > largest) {
          largest = m;
          order = slots[s].dir_order;
        }
      }
      if (largest > threshold) {
        vectors.col(i) /= std::pow(largest, 1.0 / order);
        (dir == Direction::xi ? local.xi_rescaled : local.zeta_rescaled)++;
      }
    }
  }
  if (report) *report = local;
  return out;
}

template DirectionField renormalize<float>(const DirectionField&, const SlotBatch<float>&, const SlotSet&, double,
                                           RenormalizationReport*);
template DirectionField renormalize<double>(const DirectionField&, const SlotBatch<double>&, const SlotSet&, double,
                                            RenormalizationReport*);

void write_grid_csv(std::ostream& os, const PointCloud& cloud) {
  const int n = cloud.dimension();
  for (int j = 0; j < n; ++j) os << 'x' << (j + 1) << ',';
  os << "kind\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    for (int j = 0; j < n; ++j) os << cloud.coords(j, i) << ',';
    const bool surface = static_cast<std::size_t>(i) < cloud.kinds.size() && cloud.kinds[i] == PointKind::surface;
    os << (surface ? "surface" : "interior") << '\n';
  }
}

}  // namespace nnpde
