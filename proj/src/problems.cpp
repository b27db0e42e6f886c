#include "nnpde/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "nnpde/geometry.hpp"

namespace nnpde {

std::string to_string(ProblemKind k) { return k == ProblemKind::linear ? "linear" : "nonlinear"; }
std::string to_string(Variant v) { return v == Variant::standard ? "default" : "cubic_x3"; }

ProblemKind parse_problem_kind(const std::string& s) {
  if (s == "linear") return ProblemKind::linear;
  if (s == "nonlinear") return ProblemKind::nonlinear;
  throw std::invalid_argument("unknown problem kind '" + s + "'");
}

Variant parse_variant(const std::string& s) {
  if (s == "default" || s == "standard") return Variant::standard;
  if (s == "cubic_x3") return Variant::cubic_x3;
  throw std::invalid_argument("unknown variant '" + s + "'");
}

double solution_prefactor(int dimension) {
  switch (dimension) {
    case 2: return 10.0 / 17.0;
    case 3: return 3.0 / 5.0;
    case 4: return 7.0 / 9.0;
    case 5: return 7.0 / 9.0;
    default: throw std::invalid_argument("dimension must be in 2..5");
  }
}

namespace {

// prefactor * (x1 + sin x2 + q(x) + trig(x)) with the dimension-specific terms
struct InnerFactor {
  int n;
  Variant variant;
  double scale;

  template <class S>
  S operator()(std::span<const S> x) const {
    using std::cos;
    using std::sin;
    S f = x[0] + sin(x[1]);
    switch (n) {
      case 2: f = f + x[0] * x[0] + x[1] * cos(x[0]); break;
      case 3: f = f + cubic_or_square(x[2]) + x[1] * cos(x[0]); break;
      case 4: f = f + cubic_or_square(x[2]) + x[3] * cos(x[3]); break;
      default: f = f + cubic_or_square(x[2]) + x[3] * cos(x[4]); break;
    }
    return f * scale;
  }

  template <class S>
  S cubic_or_square(const S& t) const {
    return variant == Variant::cubic_x3 ? t * t * t * 0.5 : t * t;
  }
};

struct BoundaryProduct {
  InnerFactor inner;

  template <class S>
  S operator()(std::span<const S> x) const {
    S r2 = x[0] * x[0];
    for (std::size_t k = 1; k < x.size(); ++k) r2 = r2 + x[k] * x[k];
    return (1.0 - r2) * inner(x);
  }
};

std::span<const double> column(const Eigen::MatrixXd& m, Eigen::Index i) {
  return {m.col(i).data(), static_cast<std::size_t>(m.rows())};
}

}  // namespace

Problem::Problem(const ProblemSpec& spec) : spec_(spec) {
  if (spec.dimension < 2 || spec.dimension > 5) throw std::invalid_argument("problem dimension must be in 2..5");
  if (spec.variant == Variant::cubic_x3 && spec.dimension < 3)
    throw std::invalid_argument("the cubic_x3 variant needs dimension >= 3");
  const InnerFactor inner{spec.dimension, spec.variant, solution_prefactor(spec.dimension)};
  inner_ = registry_.add("v_a", make_expression(inner));
  solution_ = registry_.add("u_a", make_expression(BoundaryProduct{inner}));
}

double Problem::analytic_solution(std::span<const double> x) const { return solution()(x); }
double Problem::analytic_inner(std::span<const double> x) const { return inner()(x); }

Jet4 Problem::source_jet(std::span<const double> x, std::span<const double> direction) const {
  // lap u_a along the line: sum over axes of d^2/ds^2 of the bivariate jet
  Jet4 lap;
  Jet4 u;
  for (int j = 0; j < spec_.dimension; ++j) {
    const BiJet24 b = eval_expression_jet(solution(), x, j, direction);
    for (int m = 0; m <= 4; ++m) lap[m] += 2.0 * b(2, m);
    if (j == 0)
      for (int m = 0; m <= 4; ++m) u[m] = b(0, m);
  }
  if (spec_.kind == ProblemKind::nonlinear) return lap + u * u;
  return lap;
}

double Problem::source(std::span<const double> x) const {
  const std::vector<double> zero(x.size(), 0.0);
  return source_jet(x, zero).value();
}

SourceJets source_jets(const Problem& problem, const Eigen::MatrixXd& points, const DirectionField& directions) {
  SourceJets out;
  out.xi.reserve(points.cols());
  out.zeta.reserve(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    out.xi.push_back(problem.source_jet(column(points, i), column(directions.xi, i)));
    out.zeta.push_back(problem.source_jet(column(points, i), column(directions.zeta, i)));
  }
  return out;
}

SlotBatch<double> analytic_output_slots(const Problem& problem, const Eigen::MatrixXd& points,
                                        const DirectionField& directions, const SlotSet& slots) {
  const int n = slots.dimension();
  const int s = slots.order();
  SlotBatch<double> out(1, slots.size(), points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    for (Direction dir : {Direction::xi, Direction::zeta}) {
      const auto d = column(dir == Direction::xi ? directions.xi : directions.zeta, i);
      for (int j = 0; j < n; ++j) {
        const BiJet24 b = eval_expression_jet(problem.inner(), column(points, i), j, d);
        for (int a = 0; a <= 2; ++a)
          for (int m = 0; m <= s; ++m) {
            const int idx = slots.index(a, a > 0 ? j : -1, m > 0 ? dir : Direction::none, m);
            out.at(idx, 0, i) = b.raw(a, m);
          }
      }
    }
  }
  return out;
}

namespace {

template <typename Real>
using JetR = Jet<Real, 4>;

template <typename Real>
JetR<Real> truncate(JetR<Real> j, int order) {
  for (int m = order + 1; m <= 4; ++m) j[m] = Real(0);
  return j;
}

// abar_k = sum_{m >= k} cbar_m b_{m-k}: adjoint of c = a * b with respect to a.
template <typename Real>
JetR<Real> correlate(const JetR<Real>& cbar, const JetR<Real>& b) {
  JetR<Real> r;
  for (int k = 0; k <= 4; ++k) {
    Real acc(0);
    for (int m = k; m <= 4; ++m) acc += cbar[m] * b[m - k];
    r[k] = acc;
  }
  return r;
}

template <typename Real>
struct DirectionalResidual {
  JetR<Real> v, lap, P, Q, V;
  std::array<JetR<Real>, 5> grad{}, coord{};
  std::array<int, 5> v_slot{};
  std::array<std::array<int, 5>, 5> grad_slot{}, lap_slot{};  // [axis][order]
};

template <typename Real>
void assemble(DirectionalResidual<Real>& r, const SlotBatch<Real>& out, const SlotSet& slots, Eigen::Index col,
              std::span<const double> x, std::span<const double> a, Direction dir, const Jet4& source,
              double quadratic) {
  const int n = slots.dimension();
  const int s = slots.order();
  r.v = r.lap = JetR<Real>();
  for (int k = 0; k <= s; ++k) {
    const Direction d = k == 0 ? Direction::none : dir;
    const Real inv = static_cast<Real>(1.0 / detail::factorial(k));
    r.v_slot[k] = slots.index(0, -1, d, k);
    r.v[k] = out.at(r.v_slot[k], 0, col) * inv;
    for (int j = 0; j < n; ++j) {
      r.grad_slot[j][k] = slots.index(1, j, d, k);
      r.lap_slot[j][k] = slots.index(2, j, d, k);
      r.grad[j][k] = out.at(r.grad_slot[j][k], 0, col) * inv;
      r.lap[k] += out.at(r.lap_slot[j][k], 0, col) * inv;
    }
  }
  for (int k = s + 1; k <= 4; ++k)
    for (int j = 0; j < n; ++j) r.grad[j][k] = Real(0);

  JetR<Real> r2;
  JetR<Real> drift;
  for (int j = 0; j < n; ++j) {
    r.coord[j] = JetR<Real>::variable(static_cast<Real>(x[j]), static_cast<Real>(a[j]));
    r2 += r.coord[j] * r.coord[j];
    drift += r.coord[j] * r.grad[j];
  }
  r.P = Real(1) - r2;
  r.Q = r.P * r.P;
  JetR<Real> src;
  for (int m = 0; m <= s; ++m) src[m] = static_cast<Real>(source[m]);

  r.V = r.P * r.lap - drift * Real(4) - r.v * static_cast<Real>(2 * n) - src;
  if (quadratic != 0.0) r.V += r.Q * (r.v * r.v) * static_cast<Real>(quadratic);
  r.V = truncate(r.V, s);
}

template <typename Real>
void scatter_adjoint(const DirectionalResidual<Real>& r, const JetR<Real>& Vbar, const SlotSet& slots,
                     Eigen::Index col, double quadratic, SlotBatch<Real>& adjoint) {
  const int n = slots.dimension();
  const int s = slots.order();
  const JetR<Real> lap_bar = correlate(Vbar, r.P);
  JetR<Real> v_bar = Vbar * static_cast<Real>(-2 * n);
  if (quadratic != 0.0) {
    const JetR<Real> w_bar = correlate(Vbar, r.Q) * static_cast<Real>(quadratic);
    v_bar += correlate(w_bar, r.v) * Real(2);
  }
  std::array<JetR<Real>, 5> grad_bar;
  for (int j = 0; j < n; ++j) grad_bar[j] = correlate(Vbar, r.coord[j]) * Real(-4);
  for (int k = 0; k <= s; ++k) {
    const Real inv = static_cast<Real>(1.0 / detail::factorial(k));
    adjoint.at(r.v_slot[k], 0, col) += v_bar[k] * inv;
    for (int j = 0; j < n; ++j) {
      adjoint.at(r.grad_slot[j][k], 0, col) += grad_bar[j][k] * inv;
      adjoint.at(r.lap_slot[j][k], 0, col) += lap_bar[k] * inv;
    }
  }
}

double quadratic_term(const Problem& problem, const ResidualOptions& options) {
  return problem.spec().kind == ProblemKind::nonlinear ? options.quadratic_coefficient : 0.0;
}

template <typename Real>
Jet4 to_double(const JetR<Real>& j) {
  Jet4 r;
  for (int m = 0; m <= 4; ++m) r[m] = static_cast<double>(j[m]);
  return r;
}

}  // namespace

template <typename Real>
ResidualJets residual_jets(const Problem& problem, const SlotBatch<Real>& output, const SlotSet& slots,
                           const Eigen::MatrixXd& points, const DirectionField& directions, const SourceJets& sources,
                           const ResidualOptions& options) {
  if (slots.dimension() != problem.dimension()) throw SlotConfigError("slot set dimension differs from problem");
  if (output.slot_count() != slots.size() || output.width() != 1)
    throw SlotConfigError("output batch does not carry the full slot set");
  if (output.points() != points.cols() || directions.size() != points.cols() ||
      static_cast<Eigen::Index>(sources.xi.size()) != points.cols())
    throw ShapeError("point count mismatch in residual assembly");
  const double quad = quadratic_term(problem, options);
  ResidualJets jets;
  jets.xi.reserve(points.cols());
  jets.zeta.reserve(points.cols());
  DirectionalResidual<Real> r;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    assemble(r, output, slots, i, column(points, i), column(directions.xi, i), Direction::xi, sources.xi[i], quad);
    jets.xi.push_back(to_double(r.V));
    assemble(r, output, slots, i, column(points, i), column(directions.zeta, i), Direction::zeta, sources.zeta[i],
             quad);
    jets.zeta.push_back(to_double(r.V));
  }
  return jets;
}

template <typename Real>
ResidualJets residual_jets(const Problem& problem, const SlotBatch<Real>& output, const SlotSet& slots,
                           const Eigen::MatrixXd& points, const DirectionField& directions,
                           const ResidualOptions& options) {
  return residual_jets(problem, output, slots, points, directions, source_jets(problem, points, directions), options);
}

CostBreakdown cost(const ResidualJets& jets, int order) {
  if (order < 2 || order > 4) throw std::invalid_argument("cost order must be 2, 3 or 4");
  CostBreakdown b;
  b.order = order;
  b.points = jets.size();
  if (b.points == 0) return b;
  for (Eigen::Index i = 0; i < jets.size(); ++i) {
    b.terms[0] += jets.xi[i][0] * jets.xi[i][0];
    for (int m = 1; m <= order; ++m) {
      const double f = detail::factorial(m);
      const double dx = f * jets.xi[i][m], dz = f * jets.zeta[i][m];
      b.terms[m] += dx * dx + dz * dz;
    }
  }
  for (auto& t : b.terms) t /= static_cast<double>(b.points);
  for (int m = 0; m <= order; ++m) b.total += b.terms[m];
  b.rms_v0 = std::sqrt(b.terms[0]);
  return b;
}

template <typename Real>
ResidualCost<Real>::ResidualCost(const Problem& problem, const SlotSet& slots, const Eigen::MatrixXd& points,
                                 const DirectionField& directions, ResidualOptions options)
    : problem_(problem), slots_(slots), points_(points), options_(options) {
  if (slots.dimension() != problem.dimension()) throw SlotConfigError("slot set dimension differs from problem");
  set_directions(directions);
}

template <typename Real>
void ResidualCost<Real>::set_directions(const DirectionField& directions) {
  if (directions.size() != points_.cols()) throw ShapeError("direction/point count mismatch");
  directions_ = directions;
  sources_ = source_jets(problem_, points_, directions_);
}

template <typename Real>
double ResidualCost<Real>::accumulate(const SlotBatch<Real>& output, Eigen::Index first, Eigen::Index total_points,
                                      SlotBatch<Real>& adjoint) const {
  const double quad = quadratic_term(problem_, options_);
  const int s = slots_.order();
  const double inv_n = 1.0 / static_cast<double>(total_points);
  double value = 0.0;
  if (first == 0) mean_square_v0_ = 0.0;
  DirectionalResidual<Real> rx, rz;
  for (Eigen::Index c = 0; c < output.points(); ++c) {
    const Eigen::Index i = first + c;
    assemble(rx, output, slots_, c, column(points_, i), column(directions_.xi, i), Direction::xi, sources_.xi[i],
             quad);
    assemble(rz, output, slots_, c, column(points_, i), column(directions_.zeta, i), Direction::zeta,
             sources_.zeta[i], quad);
    JetR<Real> bx, bz;
    const double v0 = static_cast<double>(rx.V[0]);
    double e = v0 * v0;
    bx[0] = static_cast<Real>(2.0 * v0 * inv_n);
    for (int m = 1; m <= s; ++m) {
      const double f2 = detail::factorial(m) * detail::factorial(m);
      const double cx = static_cast<double>(rx.V[m]), cz = static_cast<double>(rz.V[m]);
      e += f2 * (cx * cx + cz * cz);
      bx[m] = static_cast<Real>(2.0 * f2 * cx * inv_n);
      bz[m] = static_cast<Real>(2.0 * f2 * cz * inv_n);
    }
    value += e * inv_n;
    mean_square_v0_ += v0 * v0 * inv_n;
    scatter_adjoint(rx, bx, slots_, c, quad, adjoint);
    scatter_adjoint(rz, bz, slots_, c, quad, adjoint);
  }
  return value;
}

ValidationResult validate_function(const Problem& problem,
                                   const std::function<void(const Eigen::MatrixXd&, Eigen::VectorXd&)>& inner,
                                   Eigen::Index test_count, std::uint64_t seed) {
  const PointCloud test = ball_sample(problem.dimension(), test_count, seed);
  std::vector<double> errors(static_cast<std::size_t>(test_count));
  constexpr Eigen::Index kChunk = 1 << 16;
  Eigen::VectorXd v;
  for (Eigen::Index first = 0; first < test_count; first += kChunk) {
    const Eigen::Index count = std::min(kChunk, test_count - first);
    const Eigen::MatrixXd block = test.coords.middleCols(first, count);
    inner(block, v);
    for (Eigen::Index c = 0; c < count; ++c) {
      const double r2 = block.col(c).squaredNorm();
      const double u = v(c) * (1.0 - r2);
      errors[first + c] = std::abs(u - problem.analytic_solution(column(block, c)));
    }
  }
  ValidationResult res;
  res.n_test = test_count;
  res.seed = seed;
  if (errors.empty()) return res;
  res.eps_max = *std::max_element(errors.begin(), errors.end());
  const std::size_t mid = errors.size() / 2;
  std::nth_element(errors.begin(), errors.begin() + mid, errors.end());
  res.eps_median = errors[mid];
  if (errors.size() % 2 == 0) {
    const double lower = *std::max_element(errors.begin(), errors.begin() + mid);
    res.eps_median = 0.5 * (res.eps_median + lower);
  }
  return res;
}

template <typename Real>
ValidationResult validate(const Problem& problem, const WeightSet<Real>& weights, Eigen::Index test_count,
                          std::uint64_t seed) {
  return validate_function(
      problem,
      [&](const Eigen::MatrixXd& pts, Eigen::VectorXd& out) { out = forward_values(weights, pts).template cast<double>(); },
      test_count, seed);
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_validation_report(std::ostream& os, const ValidationReport& r) {
  os << "problem = " << to_string(r.problem.kind) << '\n'
     << "dimension = " << r.problem.dimension << '\n'
     << "variant = " << to_string(r.problem.variant) << '\n'
     << "n_test = " << r.result.n_test << '\n'
     << "seed = " << r.result.seed << '\n'
     << "eps_max = " << shortest(r.result.eps_max) << '\n'
     << "eps_median = " << shortest(r.result.eps_median) << '\n'
     << "rms_V0_final = " << shortest(r.rms_v0_final) << '\n';
}

ValidationReport read_validation_report(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto need = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error(std::string("validation report lacks '") + key + "'");
    return it->second;
  };
  ValidationReport r;
  r.problem.kind = parse_problem_kind(need("problem"));
  r.problem.dimension = std::stoi(need("dimension"));
  r.problem.variant = parse_variant(need("variant"));
  r.result.n_test = std::stoll(need("n_test"));
  r.result.seed = std::stoull(need("seed"));
  r.result.eps_max = std::stod(need("eps_max"));
  r.result.eps_median = std::stod(need("eps_median"));
  r.rms_v0_final = std::stod(need("rms_V0_final"));
  return r;
}

template class ResidualCost<float>;
template class ResidualCost<double>;
template ResidualJets residual_jets<float>(const Problem&, const SlotBatch<float>&, const SlotSet&,
                                           const Eigen::MatrixXd&, const DirectionField&, const ResidualOptions&);
template ResidualJets residual_jets<double>(const Problem&, const SlotBatch<double>&, const SlotSet&,
                                            const Eigen::MatrixXd&, const DirectionField&, const ResidualOptions&);
template ResidualJets residual_jets<float>(const Problem&, const SlotBatch<float>&, const SlotSet&,
                                           const Eigen::MatrixXd&, const DirectionField&, const SourceJets&,
                                           const ResidualOptions&);
template ResidualJets residual_jets<double>(const Problem&, const SlotBatch<double>&, const SlotSet&,
                                            const Eigen::MatrixXd&, const DirectionField&, const SourceJets&,
                                            const ResidualOptions&);
template ValidationResult validate<float>(const Problem&, const WeightSet<float>&, Eigen::Index, std::uint64_t);
template ValidationResult validate<double>(const Problem&, const WeightSet<double>&, Eigen::Index, std::uint64_t);

}  // namespace nnpde
