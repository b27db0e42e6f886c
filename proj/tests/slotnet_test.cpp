#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "nnpde/expressions.hpp"
#include "nnpde/geometry.hpp"
#include "nnpde/network.hpp"
#include "nnpde/slots.hpp"

using namespace nnpde;

namespace {

// The network as a closed-form expression over any jet type.
std::shared_ptr<const Expression> network_expression(const WeightSet<double>& w) {
  return make_expression([w](auto x) {
    using S = typename decltype(x)::value_type;
    std::vector<S> a(x.begin(), x.end());
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
      const auto& layer = w.layers[l];
      std::vector<S> z(layer.weights.rows());
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
        S acc(layer.thresholds[i]);
        for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) acc = acc + layer.weights(i, j) * a[j];
        z[i] = l + 1 < w.layers.size() ? S(1.0) / (S(1.0) + exp(-acc)) : acc;
      }
      a = std::move(z);
    }
    return a[0];
  });
}

DirectionField random_directions(Eigen::Index count, int n, std::uint64_t seed) {
  return direction_pairs(count, n, seed);
}

long bell_oracle(int n) {
  // Bell triangle
  std::vector<long> row{1};
  for (int i = 1; i <= n; ++i) {
    std::vector<long> next{row.back()};
    for (long v : row) next.push_back(next.back() + v);
    row = next;
  }
  return row.front();
}

}  // namespace

TEST_SUITE("slotnet") {
  TEST_CASE("slot counts") {
    CHECK(SlotSet(5, 4).size() == 99);
    CHECK(SlotSet(5, 3).size() == 77);
    CHECK(SlotSet(5, 2).size() == 55);
    for (int n = 2; n <= 5; ++n)
      for (int s = 2; s <= 4; ++s) {
        const auto labels = enumerate_slots(n, s);
        CHECK(static_cast<int>(labels.size()) == (2 * n + 1) * (2 * s + 1));
        std::set<std::string> names;
        for (const auto& l : labels) names.insert(l.to_string());
        CHECK(names.size() == labels.size());
        CHECK(labels[0].total_order() == 0);
      }
    CHECK_THROWS_AS(SlotSet(6, 4), SlotConfigError);
    CHECK_THROWS_AS(SlotSet(2, 5), SlotConfigError);
  }

  TEST_CASE("slot lookup") {
    const SlotSet s(3, 2);
    CHECK(s.index(0, 0, Direction::none, 0) == SlotSet::identity());
    for (int i = 0; i < s.size(); ++i) CHECK(s.index(s[i]) == i);
    CHECK(s.index(0, 0, Direction::xi, 3) == -1);
  }

  TEST_CASE("partition table multiplicities are Bell numbers") {
    CHECK(bell_number(6) == 203);
    const auto& t = PartitionTable::instance();
    for (int a = 0; a <= 2; ++a)
      for (int b = 0; b <= 4; ++b) {
        // the value slot itself carries no chain-rule terms
        if (a + b > 0) CHECK(t.total_multiplicity(a, b) == bell_oracle(a + b));
        CHECK(bell_number(a + b) == bell_oracle(a + b));
      }
  }

  TEST_CASE("activation plan for a pure fourth directional derivative") {
    const SlotSet slots(2, 4);
    const ActivationPlan plan(slots);
    CHECK(plan.max_derivative() == 6);
    const auto& terms = plan.terms(slots.index(0, 0, Direction::xi, 4));
    long total = 0;
    for (const auto& t : terms) total += t.multiplicity;
    CHECK(total == bell_oracle(4));
  }

  TEST_CASE("input slots") {
    const PointCloud pts = ball_sample(3, 4, 1);
    const DirectionField d = random_directions(4, 3, 2);
    const SlotSet slots(3, 3);
    const SlotBatch<double> in = init_input_slots<double>(pts.coords, d, slots);
    CHECK(in.width() == 3);
    CHECK(in.slot_count() == slots.size());
    for (int s = 0; s < slots.size(); ++s) {
      const SlotLabel& l = slots[s];
      Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(3, 4);
      if (l.total_order() == 0) expect = pts.coords;
      else if (l.coord_order == 1 && l.dir_order == 0) expect.row(l.axis).setOnes();
      else if (l.coord_order == 0 && l.dir_order == 1) expect = l.direction == Direction::xi ? d.xi : d.zeta;
      CHECK((in.slot(s) - expect).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("affine map applies W to all slots and thresholds to the identity slot") {
    const SlotSet slots(2, 2);
    SlotBatch<double> in(3, slots.size(), 4);
    in.data().setRandom();
    Layer<double> layer{Matrix<double>::Random(5, 3), Vector<double>::Random(5)};
    const SlotBatch<double> out = affine_propagate(in, layer);
    CHECK(out.width() == 5);
    for (int s = 0; s < slots.size(); ++s) {
      Eigen::MatrixXd expect = layer.weights * in.slot(s);
      if (s == 0) expect.colwise() += layer.thresholds;
      CHECK((out.slot(s) - expect).cwiseAbs().maxCoeff() < 1e-14);
    }
  }

  TEST_CASE("activation follows the fourth-order chain rule") {
    const SlotSet slots(2, 4);
    const ActivationPlan plan(slots);
    SlotBatch<double> in(2, slots.size(), 3);
    in.data().setRandom();
    const SlotBatch<double> out = activation_propagate(in, plan);
    const int id = 0;
    int xi[5];
    for (int m = 1; m <= 4; ++m) xi[m] = slots.index(0, 0, Direction::xi, m);
    for (int r = 0; r < 2; ++r)
      for (Eigen::Index p = 0; p < 3; ++p) {
        const double u = in.at(id, r, p);
        const double s = 1.0 / (1.0 + std::exp(-u));
        // sigma derivatives written out by hand
        const double s1 = s * (1 - s);
        const double s2 = s1 * (1 - 2 * s);
        const double s3 = s1 * (1 - 6 * s + 6 * s * s);
        const double s4 = s1 * (1 - 2 * s) * (1 - 12 * s + 12 * s * s);
        const double u1 = in.at(xi[1], r, p), u2 = in.at(xi[2], r, p), u3 = in.at(xi[3], r, p),
                     u4 = in.at(xi[4], r, p);
        CHECK(out.at(id, r, p) == doctest::Approx(s).epsilon(1e-14));
        CHECK(out.at(xi[1], r, p) == doctest::Approx(s1 * u1).epsilon(1e-13));
        CHECK(out.at(xi[2], r, p) == doctest::Approx(s2 * u1 * u1 + s1 * u2).epsilon(1e-13));
        CHECK(out.at(xi[3], r, p) == doctest::Approx(s3 * u1 * u1 * u1 + 3 * s2 * u1 * u2 + s1 * u3).epsilon(1e-13));
        const double d4 = s4 * std::pow(u1, 4) + 6 * s3 * u1 * u1 * u2 + s2 * (4 * u1 * u3 + 3 * u2 * u2) + s1 * u4;
        CHECK(out.at(xi[4], r, p) == doctest::Approx(d4).epsilon(1e-12));
      }
  }

  TEST_CASE("forward slots equal jets of the closed-form network") {
    for (int n : {2, 3, 5}) {
      const Topology topo({n, 4, 3, 1});
      const WeightSet<double> w = init_weights<double>(topo, 40 + n);
      const auto net = network_expression(w);
      const PointCloud pts = ball_sample(n, 6, 3);
      const DirectionField d = random_directions(6, n, 4);
      const SlotSet slots(n, 4);
      const SlotBatch<double> out = forward(pts.coords, d, w, slots);
      for (Eigen::Index p = 0; p < 6; ++p)
        for (int s = 0; s < slots.size(); ++s) {
          const SlotLabel& l = slots[s];
          const Eigen::VectorXd dir = l.direction == Direction::zeta ? d.zeta.col(p) : d.xi.col(p);
          const std::optional<int> axis = l.coord_order > 0 ? std::optional<int>(l.axis) : std::nullopt;
          const BiJet24 j = eval_expression_jet(*net, {pts.coords.col(p).data(), static_cast<std::size_t>(n)}, axis,
                                                {dir.data(), static_cast<std::size_t>(n)});
          CHECK(out.at(s, 0, p) == doctest::Approx(j.raw(l.coord_order, l.dir_order)).epsilon(1e-11).scale(1e-3));
        }
    }
  }

  TEST_CASE("first-order slots agree with finite differences of plain values") {
    const int n = 3;
    const WeightSet<double> w = init_weights<double>(Topology({n, 8, 8, 1}), 9);
    const PointCloud pts = ball_sample(n, 5, 6);
    const DirectionField d = random_directions(5, n, 7);
    const SlotSet slots(n, 2);
    const SlotBatch<double> out = forward(pts.coords, d, w, slots);
    const double tau = 1e-5;
    const Eigen::VectorXd plus = forward_values(w, Eigen::MatrixXd(pts.coords + tau * d.xi));
    const Eigen::VectorXd minus = forward_values(w, Eigen::MatrixXd(pts.coords - tau * d.xi));
    const int xi1 = slots.index(0, 0, Direction::xi, 1);
    for (Eigen::Index p = 0; p < 5; ++p)
      CHECK(out.at(xi1, 0, p) == doctest::Approx((plus[p] - minus[p]) / (2 * tau)).epsilon(1e-8));
    const Eigen::VectorXd v = forward_values(w, pts.coords);
    for (Eigen::Index p = 0; p < 5; ++p) CHECK(out.at(0, 0, p) == doctest::Approx(v[p]).epsilon(1e-14));
  }

  TEST_CASE("scaling xi by c scales xi-order-m slots by c^m") {
    const int n = 4;
    const WeightSet<double> w = init_weights<double>(Topology({n, 10, 10, 1}), 2);
    const PointCloud pts = ball_sample(n, 8, 1);
    DirectionField d = random_directions(8, n, 5);
    const SlotSet slots(n, 4);
    const SlotBatch<double> base = forward(pts.coords, d, w, slots);
    const double c = 0.37;
    d.xi *= c;
    const SlotBatch<double> scaled = forward(pts.coords, d, w, slots);
    for (int s = 0; s < slots.size(); ++s) {
      const SlotLabel& l = slots[s];
      const double f = l.direction == Direction::xi ? std::pow(c, l.dir_order) : 1.0;
      for (Eigen::Index p = 0; p < 8; ++p)
        CHECK(std::abs(scaled.at(s, 0, p) - f * base.at(s, 0, p)) <= 1e-12 * std::abs(f * base.at(s, 0, p)) + 1e-300);
    }
  }

  TEST_CASE("zero weights give zero output slots and are shaped by the topology") {
    const Topology topo = Topology::parse("2,5,5,1");
    CHECK(topo.widths() == std::vector<int>{2, 5, 5, 1});
    CHECK(topo.parameter_count() == 2 * 5 + 5 + 5 * 5 + 5 + 5 + 1);
    const WeightSet<double> w(topo);
    const PointCloud pts = ball_sample(2, 3, 2);
    const SlotSet slots(2, 3);
    const SlotBatch<double> out = forward(pts.coords, random_directions(3, 2, 1), w, slots);
    CHECK(out.data().cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(Topology::parse("2,,1"), std::invalid_argument);
    CHECK_THROWS_AS(Topology({2}), std::invalid_argument);
  }

  TEST_CASE("init_weights ranges and reproducibility") {
    const Topology topo({5, 160, 160, 1});
    const WeightSet<double> a = init_weights<double>(topo, 3), b = init_weights<double>(topo, 3),
                            c = init_weights<double>(topo, 4);
    CHECK(a.layers[1].weights == b.layers[1].weights);
    CHECK(a.layers[1].weights != c.layers[1].weights);
    for (const auto& l : a.layers) {
      const double bound = 2.0 / std::sqrt(static_cast<double>(l.weights.cols()));
      CHECK(l.weights.cwiseAbs().maxCoeff() <= bound);
      CHECK(l.thresholds.cwiseAbs().maxCoeff() <= 0.1);
    }
    const WeightSet<float> f = init_weights<float>(topo, 3);
    CHECK(std::abs(f.layers[0].weights(0, 0) - static_cast<float>(a.layers[0].weights(0, 0))) < 1e-6f);
  }

  TEST_CASE("chunked evaluation matches a single batch") {
    struct SumSquares final : CostFunctional<double> {
      double accumulate(const SlotBatch<double>& out, Eigen::Index, Eigen::Index total,
                        SlotBatch<double>& adj) const override {
        adj.data() = 2.0 / static_cast<double>(total) * out.data();
        return out.data().squaredNorm() / static_cast<double>(total);
      }
    };
    const int n = 2;
    const WeightSet<double> w = init_weights<double>(Topology({n, 6, 6, 1}), 12);
    const PointCloud pts = ball_sample(n, 11, 13);
    const DirectionField d = random_directions(11, n, 14);
    const SlotSet slots(n, 3);
    const SumSquares cost;
    const Gradient<double> whole = cost_gradient(pts.coords, d, w, slots, cost);
    EvaluationOptions opt;
    opt.chunk_points = 3;
    const Gradient<double> chunked = cost_gradient(pts.coords, d, w, slots, cost, opt);
    CHECK(chunked.cost == doctest::Approx(whole.cost).epsilon(1e-13));
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
      CHECK((chunked.weights.layers[l].weights - whole.weights.layers[l].weights).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((chunked.weights.layers[l].thresholds - whole.weights.layers[l].thresholds).cwiseAbs().maxCoeff() <
            1e-12);
    }
  }

  TEST_CASE("gradient of a slot functional agrees with central differences") {
    // E = mean over points of sum_s k_s * out_s^2 with distinct weights per slot
    struct Weighted final : CostFunctional<double> {
      double accumulate(const SlotBatch<double>& out, Eigen::Index, Eigen::Index total,
                        SlotBatch<double>& adj) const override {
        double e = 0.0;
        for (int s = 0; s < out.slot_count(); ++s) {
          const double k = 1.0 + 0.1 * s;
          adj.slot(s) = 2.0 * k / static_cast<double>(total) * out.slot(s);
          e += k * out.slot(s).squaredNorm() / static_cast<double>(total);
        }
        return e;
      }
    };
    const int n = 3;
    WeightSet<double> w = init_weights<double>(Topology({n, 5, 4, 1}), 21);
    const PointCloud pts = ball_sample(n, 4, 22);
    const DirectionField d = random_directions(4, n, 23);
    const SlotSet slots(n, 4);
    const Weighted cost;
    const Gradient<double> g = cost_gradient(pts.coords, d, w, slots, cost);
    const double h = 1e-6;
    double worst = 0.0, scale = 0.0;
    for (std::size_t l = 0; l < w.layers.size(); ++l)
      scale = std::max({scale, g.weights.layers[l].weights.cwiseAbs().maxCoeff(),
                        g.weights.layers[l].thresholds.cwiseAbs().maxCoeff()});
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
      for (int which = 0; which < 2; ++which) {
        double* data = which ? w.layers[l].thresholds.data() : w.layers[l].weights.data();
        const double* gd = which ? g.weights.layers[l].thresholds.data() : g.weights.layers[l].weights.data();
        const Eigen::Index size = which ? w.layers[l].thresholds.size() : w.layers[l].weights.size();
        for (Eigen::Index i = 0; i < size; ++i) {
          const double old = data[i];
          data[i] = old + h;
          const double ep = cost_gradient(pts.coords, d, w, slots, cost).cost;
          data[i] = old - h;
          const double em = cost_gradient(pts.coords, d, w, slots, cost).cost;
          data[i] = old;
          const double fd = (ep - em) / (2 * h);
          worst = std::max(worst, std::abs(fd - gd[i]) / std::max({std::abs(fd), std::abs(gd[i]), 1e-3 * scale}));
        }
      }
    }
    CHECK(worst < 1e-5);
  }

  TEST_CASE("32-bit propagation tracks 64-bit") {
    const int n = 2;
    const WeightSet<double> w = init_weights<double>(Topology({n, 16, 16, 1}), 31);
    const PointCloud pts = ball_sample(n, 7, 32);
    const DirectionField d = random_directions(7, n, 33);
    const SlotSet slots(n, 4);
    const SlotBatch<double> a = forward(pts.coords, d, w, slots);
    const SlotBatch<float> b = forward(pts.coords, d, w.cast<float>(), slots);
    const double scale = a.data().cwiseAbs().maxCoeff();
    CHECK((a.data() - b.data().cast<double>()).cwiseAbs().maxCoeff() < 1e-4 * scale);
  }
}
