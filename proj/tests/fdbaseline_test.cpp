#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "nnpde/fdbaseline.hpp"
#include "nnpde/geometry.hpp"

using namespace nnpde;

TEST_SUITE("fdbaseline") {
  TEST_CASE("5D stencil error leading constant") {
    const Problem p({ProblemKind::linear, 5, Variant::standard});
    const Eigen::MatrixXd origin = Eigen::MatrixXd::Zero(5, 1);
    const StencilEstimate e = stencil_error(p, 0.01, origin);
    CHECK(e.leading_constant == doctest::Approx(7.0 * 24 / 108).epsilon(1e-12));
    CHECK(e.max_abs == doctest::Approx(7.0 * 24 / 108 * 1e-4).epsilon(1e-12));
  }

  TEST_CASE("stencil error scales as h squared and vanishes for cubics") {
    const Problem p({ProblemKind::linear, 3, Variant::standard});
    const PointCloud pts = ball_sample(3, 50, 1);
    const StencilEstimate a = stencil_error(p, 0.02, pts.coords), b = stencil_error(p, 0.01, pts.coords);
    CHECK(a.max_abs / b.max_abs == doctest::Approx(4.0).epsilon(0.01));
    const auto cubic = make_expression([](auto x) { return x[0] * x[0] * x[1] - 2.0 * x[1] * x[1] * x[1] + x[2]; });
    CHECK(stencil_error(*cubic, 3, 0.05, pts.coords).max_abs == 0.0);
  }

  TEST_CASE("5D stencil error against the printed closed form") {
    const Problem p({ProblemKind::linear, 5, Variant::standard});
    const PointCloud pts = ball_sample(5, 30, 2);
    const double h = 0.01;
    const StencilEstimate e = stencil_error(p, h, pts.coords);
    for (Eigen::Index k = 0; k < pts.size(); ++k) {
      const auto x = pts.coords.col(k);
      const double r2 = x.squaredNorm();
      const double printed = 7.0 / 108 * h * h *
                             (-24 - 8 * x[3] * x[4] * std::sin(x[4]) + 8 * x[1] * std::cos(x[1]) -
                              (r2 - 13) * (std::sin(x[1]) + x[3] * std::cos(x[4])));
      CHECK(e.eps[k] == doctest::Approx(printed).epsilon(1e-10));
    }
  }

  TEST_CASE("cubic variant triples the first-derivative error") {
    const Problem a({ProblemKind::linear, 5, Variant::standard});
    const Problem b({ProblemKind::linear, 5, Variant::cubic_x3});
    for (double t : {0.05, 0.1, 0.2}) {
      const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(5, 1, t);
      const double ratio = first_derivative_error(b, 0.01, x)[0] / first_derivative_error(a, 0.01, x)[0];
      CHECK(ratio >= 2.5);
      CHECK(ratio <= 3.5);
    }
  }

  TEST_CASE("psi bound") {
    CHECK(psi_bound(5, 1.0) == doctest::Approx(0.1));
    CHECK(psi_bound(2, 1.0) == doctest::Approx(0.25));
    CHECK(psi_bound(3, 0.0) == 0.0);
    CHECK(psi_bound(2, -2.0) == doctest::Approx(0.5));
  }

  TEST_CASE("zero source gives zero solution") {
    const FDSolution s = fd_solve_disc([](double, double) { return 0.0; }, 1.0 / 16);
    CHECK(s.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::string(s.boundary) == "shortley-weller");
    CHECK_THROWS_AS(fd_solve_disc([](double, double) { return 1.0; }, 0.2), std::invalid_argument);
  }

  TEST_CASE("constant source reproduces the paraboloid up to solver tolerance") {
    // lap u = 4 with u = 0 on the circle: u = r^2 - 1, which the stencil is exact for
    const FDSolution s = fd_solve_disc([](double, double) { return 4.0; }, 1.0 / 16);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < s.nodes.cols(); ++k)
      worst = std::max(worst, std::abs(s.values[k] - (s.nodes.col(k).squaredNorm() - 1.0)));
    CHECK(worst < 1e-10);
    CHECK(s.residual <= 1e-11);
  }

  TEST_CASE("reflecting the source reflects the solution") {
    auto g = [](double x, double y) { return std::exp(x) * (1 + y * y) + x * y; };
    auto gr = [&](double x, double y) { return g(-x, y); };
    const double h = 1.0 / 32;
    const FDSolution a = fd_solve_disc(g, h), b = fd_solve_disc(gr, h);
    REQUIRE(a.nodes.cols() == b.nodes.cols());
    double worst = 0.0;
    for (Eigen::Index k = 0; k < a.nodes.cols(); ++k) {
      // find the mirrored node
      for (Eigen::Index m = 0; m < b.nodes.cols(); ++m)
        if (std::abs(b.nodes(0, m) + a.nodes(0, k)) < 1e-12 && std::abs(b.nodes(1, m) - a.nodes(1, k)) < 1e-12) {
          worst = std::max(worst, std::abs(a.values[k] - b.values[m]));
          break;
        }
    }
    CHECK(worst < 1e-9);
  }

  TEST_CASE("cost model reproduces the extrapolation") {
    const CostModelReport r = cost_model();
    CHECK(r.h == doctest::Approx(0.008));
    CHECK(r.row(5).interior == doctest::Approx(1.6e11).epsilon(0.05));
    CHECK(r.row(5).surface == doctest::Approx(6.4e9).epsilon(0.05));
    CHECK(r.row(5).seconds == doctest::Approx(3000).epsilon(0.05));
    CHECK(r.row(4).seconds == doctest::Approx(23).epsilon(0.05));
    CHECK(r.row(3).seconds == doctest::Approx(0.15).epsilon(0.05));
    CHECK(ball_volume(5) == doctest::Approx(8 * std::numbers::pi * std::numbers::pi / 15));
    CHECK(sphere_area(5) == doctest::Approx(8 * std::numbers::pi * std::numbers::pi / 3));
    CHECK(ball_volume(2) == doctest::Approx(std::numbers::pi));
    CHECK_THROWS_AS(cost_model({.delta = 0.0}), std::invalid_argument);
    CostModelOptions raw;
    raw.round_spacing = false;
    CHECK(cost_model(raw).h == doctest::Approx(std::sqrt(10 * 1e-5 / 1.6)));
    std::ostringstream os;
    write_cost_model_csv(os, r);
    CHECK(os.str().rfind("dimension,log10_seconds\n2,", 0) == 0);
  }
}
