#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nnpde/geometry.hpp"
#include "nnpde/problems.hpp"

using namespace nnpde;

namespace {

// 2D sources exactly as printed for the experiments.
double printed_g(double x1, double x2) {
  const double q = -x1 * x1 - x2 * x2 + 1;
  return -10.0 / 17 * q * std::sin(x2) - 40.0 / 17 * x1 * (2 * x1 - x2 * std::sin(x1) + 1) +
         10.0 / 17 * q * (2 - x2 * std::cos(x1)) - 40.0 / 17 * x2 * (std::cos(x1) + std::cos(x2)) -
         40.0 / 17 * (x1 * x1 + x1 + std::sin(x2) + x2 * std::cos(x1));
}

double printed_h(double x1, double x2) {
  const double q = -x1 * x1 - x2 * x2 + 1;
  const double p = x1 * x1 + x1 + std::sin(x2) + x2 * std::cos(x1);
  return printed_g(x1, x2) + 100.0 / 289 * q * q * p * p;
}

const ProblemSpec kAllSpecs[] = {
    {ProblemKind::linear, 2, Variant::standard},    {ProblemKind::nonlinear, 2, Variant::standard},
    {ProblemKind::linear, 3, Variant::standard},    {ProblemKind::nonlinear, 3, Variant::standard},
    {ProblemKind::linear, 4, Variant::standard},    {ProblemKind::nonlinear, 4, Variant::standard},
    {ProblemKind::linear, 5, Variant::standard},    {ProblemKind::nonlinear, 5, Variant::standard},
    {ProblemKind::linear, 5, Variant::cubic_x3},    {ProblemKind::nonlinear, 3, Variant::cubic_x3},
};

double rms(const ResidualJets& j) {
  double s = 0.0;
  for (Eigen::Index p = 0; p < j.size(); ++p)
    for (int m = 0; m <= 4; ++m) s += j.xi[p][m] * j.xi[p][m] + j.zeta[p][m] * j.zeta[p][m];
  return std::sqrt(s / (10.0 * j.size()));
}

}  // namespace

TEST_SUITE("problems") {
  TEST_CASE("prefactors and names") {
    CHECK(solution_prefactor(2) == doctest::Approx(10.0 / 17));
    CHECK(solution_prefactor(3) == doctest::Approx(3.0 / 5));
    CHECK(solution_prefactor(5) == doctest::Approx(7.0 / 9));
    CHECK(parse_problem_kind(to_string(ProblemKind::nonlinear)) == ProblemKind::nonlinear);
    CHECK(parse_variant("cubic_x3") == Variant::cubic_x3);
    CHECK_THROWS(parse_variant("quartic"));
    CHECK_THROWS(Problem({ProblemKind::linear, 2, Variant::cubic_x3}));
    CHECK_THROWS(Problem({ProblemKind::linear, 6, Variant::standard}));
  }

  TEST_CASE("analytic solution vanishes on the boundary and matches the closed form") {
    const Problem p({ProblemKind::linear, 2, Variant::standard});
    const double x[2] = {0.3, -0.2};
    const double direct = 10.0 / 17 * (0.3 + std::sin(-0.2) + 0.09 - 0.2 * std::cos(0.3)) * (1 - 0.09 - 0.04);
    CHECK(p.analytic_solution(x) == doctest::Approx(direct).epsilon(1e-14));
    const double y[2] = {0.5, 0.5};
    CHECK(p.analytic_solution(y) == doctest::Approx(0.49065200574982031911).epsilon(1e-14));
    for (const auto& spec : kAllSpecs) {
      const Problem q(spec);
      const PointCloud s = surface_grid({spec.dimension, 0.5, 0.3, 2});
      for (Eigen::Index k = 0; k < s.size(); ++k)
        CHECK(std::abs(q.analytic_solution({s.coords.col(k).data(), static_cast<std::size_t>(spec.dimension)})) <
              1e-14);
    }
  }

  TEST_CASE("2D sources match the printed formulas") {
    const Problem lin({ProblemKind::linear, 2, Variant::standard});
    const Problem non({ProblemKind::nonlinear, 2, Variant::standard});
    const double origin[2] = {0.0, 0.0};
    CHECK(lin.source(origin) == doctest::Approx(20.0 / 17).epsilon(1e-14));
    const PointCloud pts = ball_sample(2, 200, 4);
    for (Eigen::Index k = 0; k < pts.size(); ++k) {
      const double* x = pts.coords.col(k).data();
      CHECK(lin.source({x, 2}) == doctest::Approx(printed_g(x[0], x[1])).epsilon(1e-12));
      CHECK(non.source({x, 2}) == doctest::Approx(printed_h(x[0], x[1])).epsilon(1e-12));
    }
  }

  TEST_CASE("h minus g is u squared and zero directions give constant jets") {
    for (int n = 2; n <= 5; ++n) {
      const Problem lin({ProblemKind::linear, n, Variant::standard});
      const Problem non({ProblemKind::nonlinear, n, Variant::standard});
      const PointCloud pts = ball_sample(n, 20, 5);
      const DirectionField d = direction_pairs(20, n, 6);
      const std::vector<double> zero(n, 0.0);
      for (Eigen::Index k = 0; k < pts.size(); ++k) {
        const std::span<const double> x{pts.coords.col(k).data(), static_cast<std::size_t>(n)};
        const double u = lin.analytic_solution(x);
        CHECK(non.source(x) - lin.source(x) == doctest::Approx(u * u).epsilon(1e-12).scale(100.0));
        const Jet4 gz = lin.source_jet(x, zero);
        for (int m = 1; m <= 4; ++m) CHECK(gz[m] == 0.0);
        const Jet4 gj = lin.source_jet(x, {d.xi.col(k).data(), static_cast<std::size_t>(n)});
        CHECK(gj[0] == doctest::Approx(lin.source(x)).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("exact solution annihilates every residual") {
    for (const auto& spec : kAllSpecs) {
      CAPTURE(spec.dimension);
      const Problem p(spec);
      const PointCloud pts = ball_sample(spec.dimension, 1000, 7);
      const DirectionField d = direction_pairs(1000, spec.dimension, 8);
      const SlotSet slots(spec.dimension, 4);
      const SlotBatch<double> out = analytic_output_slots(p, pts.coords, d, slots);
      const ResidualJets j = residual_jets(p, out, slots, pts.coords, d);
      CHECK(rms(j) <= 1e-10);
      const CostBreakdown c = cost(j, 4);
      CHECK(c.total <= 1e-20);
      CHECK(c.rms_v0 <= 1e-10);
    }
  }

  TEST_CASE("exact solution also annihilates the surface points") {
    const Problem p({ProblemKind::nonlinear, 3, Variant::standard});
    const PointCloud s = surface_grid({3, 0.5, 0.3, 1});
    const DirectionField d = direction_pairs(s.size(), 3, 2);
    const SlotSet slots(3, 4);
    const ResidualJets j = residual_jets(p, analytic_output_slots(p, s.coords, d, slots), slots, s.coords, d);
    CHECK(rms(j) <= 1e-10);
  }

  TEST_CASE("zero network: residual is minus the source") {
    const Problem p({ProblemKind::linear, 3, Variant::standard});
    const PointCloud pts = ball_sample(3, 10, 1);
    const DirectionField d = direction_pairs(10, 3, 2);
    const SlotSet slots(3, 3);
    const SlotBatch<double> zero(1, slots.size(), 10);
    const ResidualJets j = residual_jets(p, zero, slots, pts.coords, d);
    for (Eigen::Index k = 0; k < 10; ++k) {
      const Jet4 g = p.source_jet({pts.coords.col(k).data(), 3}, {d.xi.col(k).data(), 3});
      for (int m = 0; m <= 3; ++m) CHECK(j.xi[k][m] == doctest::Approx(-g[m]).epsilon(1e-14));
      CHECK(j.xi[k][4] == 0.0);
    }
  }

  TEST_CASE("residual directional derivatives agree with finite differences") {
    for (auto kind : {ProblemKind::linear, ProblemKind::nonlinear}) {
      const int n = 2;
      const Problem p({kind, n, Variant::standard});
      const WeightSet<double> w = init_weights<double>(Topology({n, 12, 12, 1}), 3);
      const PointCloud pts = ball_sample(n, 20, 11);
      const DirectionField d = direction_pairs(20, n, 12);
      const SlotSet slots(n, 4);
      const ResidualJets j = residual_jets(p, forward(pts.coords, d, w, slots), slots, pts.coords, d);
      const double tau = 1e-4;
      const SlotSet s0(n, 2);
      auto v0 = [&](const Eigen::MatrixXd& x) {
        const ResidualJets r = residual_jets(p, forward(x, d, w, s0), s0, x, d);
        Eigen::VectorXd v(x.cols());
        for (Eigen::Index k = 0; k < x.cols(); ++k) v[k] = r.xi[k][0];
        return v;
      };
      const Eigen::VectorXd plus = v0(pts.coords + tau * d.xi), minus = v0(pts.coords - tau * d.xi);
      for (Eigen::Index k = 0; k < 20; ++k)
        CHECK(j.xi[k][1] == doctest::Approx((plus[k] - minus[k]) / (2 * tau)).epsilon(1e-5));
    }
  }

  TEST_CASE("nonlinear residual without the quadratic term equals the linear one with h") {
    const int n = 3;
    const Problem lin({ProblemKind::linear, n, Variant::standard});
    const Problem non({ProblemKind::nonlinear, n, Variant::standard});
    const WeightSet<double> w = init_weights<double>(Topology({n, 6, 1}), 4);
    const PointCloud pts = ball_sample(n, 15, 2);
    const DirectionField d = direction_pairs(15, n, 3);
    const SlotSet slots(n, 4);
    const SlotBatch<double> out = forward(pts.coords, d, w, slots);
    ResidualOptions opt;
    opt.quadratic_coefficient = 0.0;
    const ResidualJets a = residual_jets(non, out, slots, pts.coords, d, opt);
    const SourceJets h = source_jets(non, pts.coords, d);
    const ResidualJets b = residual_jets(lin, out, slots, pts.coords, d, h);
    for (Eigen::Index k = 0; k < 15; ++k)
      for (int m = 0; m <= 4; ++m) {
        CHECK(a.xi[k][m] == b.xi[k][m]);
        CHECK(a.zeta[k][m] == b.zeta[k][m]);
      }
  }

  TEST_CASE("cost aggregation") {
    ResidualJets j;
    j.xi.push_back(Jet4::from_derivatives(std::vector<double>{1.0, 2.0}));
    j.zeta.push_back(Jet4(1.0));
    const CostBreakdown c = cost(j, 2);
    CHECK(c.total == doctest::Approx(5.0));
    CHECK(c.terms[0] == doctest::Approx(1.0));
    CHECK(c.terms[1] == doctest::Approx(4.0));
    CHECK(c.rms_v0 == doctest::Approx(1.0));
    ResidualJets twice = j;
    twice.xi.push_back(j.xi[0]);
    twice.zeta.push_back(j.zeta[0]);
    CHECK(cost(twice, 2).total == doctest::Approx(c.total));
    // higher orders count m! times the normalized coefficient
    ResidualJets k;
    Jet4 third;
    third[3] = 0.5;
    k.xi.push_back(third);
    k.zeta.push_back(Jet4());
    CHECK(cost(k, 2).total == 0.0);
    CHECK(cost(k, 3).total == doctest::Approx(9.0));
  }

  TEST_CASE("validation of the exact inner factor is exact") {
    const Problem p({ProblemKind::linear, 3, Variant::standard});
    const ValidationResult r = validate_function(
        p,
        [&](const Eigen::MatrixXd& x, Eigen::VectorXd& v) {
          v.resize(x.cols());
          for (Eigen::Index k = 0; k < x.cols(); ++k) v[k] = p.analytic_inner({x.col(k).data(), 3});
        },
        5000, 3);
    CHECK(r.eps_max < 1e-15);
    CHECK(r.n_test == 5000);
  }

  TEST_CASE("validation report round trip") {
    ValidationReport rep;
    rep.problem = {ProblemKind::nonlinear, 4, Variant::standard};
    rep.result = {3.5e-6, 6.8e-7, 500000, 42};
    rep.rms_v0_final = 4.0000000000000003e-05;
    std::stringstream ss;
    write_validation_report(ss, rep);
    const std::string text = ss.str();
    for (const char* key : {"problem", "dimension", "variant", "n_test", "seed", "eps_max", "eps_median", "rms_V0_final"})
      CHECK(text.find(key) != std::string::npos);
    const ValidationReport back = read_validation_report(ss);
    CHECK(back.problem == rep.problem);
    CHECK(back.result.eps_max == rep.result.eps_max);
    CHECK(back.result.eps_median == rep.result.eps_median);
    CHECK(back.result.n_test == rep.result.n_test);
    CHECK(back.result.seed == rep.result.seed);
    CHECK(back.rms_v0_final == rep.rms_v0_final);
  }
}
