#include "nnpde/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace nnpde {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  // "pi/k" and "pi" are accepted for angles
  if (text == "pi") return std::numbers::pi;
  if (text.rfind("pi/", 0) == 0) return std::numbers::pi / parse_double(key, text.substr(3));
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw ConfigError(key, "not a number: '" + text + "'");
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw ConfigError(key, "not an integer: '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

Interval parse_interval(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) parts.push_back(trim(item));
  if (parts.size() < 2 || parts.size() > 3) throw ConfigError("interval", "expected 'epochs, r_int[, reset]'");
  Interval i;
  i.epochs = parse_int<int>("interval", parts[0]);
  i.renorm_interval = parse_int<int>("interval", parts[1]);
  if (parts.size() == 3) {
    if (parts[2] != "reset") throw ConfigError("interval", "third field must be 'reset'");
    i.reset_steps_at_end = true;
  }
  return i;
}

void set_run_key(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "name") c.name = value;
  else if (key == "problem") {
    try {
      c.problem.kind = parse_problem_kind(value);
    } catch (const std::exception& e) {
      throw ConfigError(key, e.what());
    }
  } else if (key == "dimension") c.problem.dimension = parse_int<int>(key, value);
  else if (key == "variant") {
    try {
      c.problem.variant = parse_variant(value);
    } catch (const std::exception& e) {
      throw ConfigError(key, e.what());
    }
  } else if (key == "topology") {
    try {
      c.topology = Topology::parse(value);
    } catch (const std::exception& e) {
      throw ConfigError(key, e.what());
    }
  } else if (key == "theta") c.theta = parse_double(key, value);
  else if (key == "lambda") c.lambda = parse_double(key, value);
  else if (key == "interior_target") c.interior_target = parse_int<long>(key, value);
  else if (key == "eta_plus") c.rprop.eta_plus = parse_double(key, value);
  else if (key == "eta_minus") c.rprop.eta_minus = parse_double(key, value);
  else if (key == "weight_limit") c.rprop.weight_limit = parse_double(key, value);
  else if (key == "clamp_thresholds") c.rprop.clamp_thresholds = parse_bool(key, value);
  else if (key == "rprop_variant") {
    if (value == "irprop-") c.rprop.variant = RPropVariant::irprop_minus;
    else if (value == "rprop-") c.rprop.variant = RPropVariant::rprop_minus;
    else throw ConfigError(key, "expected irprop- or rprop-");
  } else if (key == "renorm_threshold") c.renorm_threshold = parse_double(key, value);
  else if (key == "seed_weights") c.seed_weights = parse_int<std::uint64_t>(key, value);
  else if (key == "seed_grid") c.seed_grid = parse_int<std::uint64_t>(key, value);
  else if (key == "seed_directions") c.seed_directions = parse_int<std::uint64_t>(key, value);
  else if (key == "seed_validation") c.seed_validation = parse_int<std::uint64_t>(key, value);
  else if (key == "precision") c.precision = parse_int<int>(key, value);
  else if (key == "test_count") c.test_count = parse_int<long>(key, value);
  else if (key == "reproducible") c.reproducible = parse_bool(key, value);
  else if (key == "chunk_points") c.chunk_points = parse_int<long>(key, value);
  else if (key == "output_dir") c.output_dir = value;
  else throw ConfigError(key, "unknown key");
}

void set_phase_key(PhaseConfig& p, const std::string& key, const std::string& value) {
  if (key == "order") p.order = parse_int<int>(key, value);
  else if (key == "delta0") p.delta0 = parse_double(key, value);
  else if (key == "interval") p.intervals.push_back(parse_interval(value));
  else throw ConfigError(key, "unknown phase key");
}

}  // namespace

RunConfig parse_config(std::istream& is) {
  RunConfig c;
  bool in_phase = false;
  int line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "[phase]") {
      c.phases.emplace_back();
      c.phases.back().intervals.clear();
      in_phase = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (in_phase) {
      // run-level keys after a [phase] block are rejected to keep files unambiguous
      set_phase_key(c.phases.back(), key, value);
    } else {
      set_run_key(c, key, value);
    }
  }
  c.check();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  return parse_config(in);
}

void write_config(std::ostream& os, const RunConfig& c) {
  const auto old = os.precision(17);
  os << "name = " << c.name << '\n'
     << "problem = " << to_string(c.problem.kind) << '\n'
     << "dimension = " << c.problem.dimension << '\n'
     << "variant = " << to_string(c.problem.variant) << '\n'
     << "topology = " << c.topology.to_string() << '\n'
     << "theta = " << c.theta << '\n'
     << "lambda = " << c.lambda << '\n'
     << "interior_target = " << c.interior_target << '\n'
     << "eta_plus = " << c.rprop.eta_plus << '\n'
     << "eta_minus = " << c.rprop.eta_minus << '\n'
     << "weight_limit = " << c.rprop.weight_limit << '\n'
     << "clamp_thresholds = " << (c.rprop.clamp_thresholds ? "true" : "false") << '\n'
     << "rprop_variant = " << (c.rprop.variant == RPropVariant::irprop_minus ? "irprop-" : "rprop-") << '\n'
     << "renorm_threshold = " << c.renorm_threshold << '\n'
     << "seed_weights = " << c.seed_weights << '\n'
     << "seed_grid = " << c.seed_grid << '\n'
     << "seed_directions = " << c.seed_directions << '\n'
     << "seed_validation = " << c.seed_validation << '\n'
     << "precision = " << c.precision << '\n'
     << "test_count = " << c.test_count << '\n'
     << "reproducible = " << (c.reproducible ? "true" : "false") << '\n'
     << "chunk_points = " << c.chunk_points << '\n';
  if (!c.output_dir.empty()) os << "output_dir = " << c.output_dir << '\n';
  for (const auto& p : c.phases) {
    os << "\n[phase]\norder = " << p.order << "\ndelta0 = " << p.delta0 << '\n';
    for (const auto& i : p.intervals)
      os << "interval = " << i.epochs << ", " << i.renorm_interval << (i.reset_steps_at_end ? ", reset" : "") << '\n';
  }
  os.precision(old);
}

std::vector<PhaseConfig> linear_schedule() {
  return {{4, 2e-4, {{1000, 200, true}, {1000, 200, false}}},
          {3, 2e-5, {{2000, 200, false}}},
          {2, 2e-5, {{2000, 200, false}}}};
}

std::vector<PhaseConfig> nonlinear_schedule() {
  return {{4, 2e-4, {{160, 15, true}, {340, 50, true}, {500, 50, true}, {1000, 50, true}, {1000, 100, false}}},
          {3, 2e-5, {{2000, 200, false}}},
          {2, 2e-5, {{2000, 200, false}}}};
}

namespace {

struct PresetRow {
  const char* name;
  ProblemKind kind;
  int dimension;
  long interior_target;
};

constexpr PresetRow kPresets[] = {
    {"2d-linear", ProblemKind::linear, 2, 27},        {"2d-nonlinear", ProblemKind::nonlinear, 2, 47},
    {"3d-linear", ProblemKind::linear, 3, 108},       {"3d-nonlinear", ProblemKind::nonlinear, 3, 265},
    {"4d-linear", ProblemKind::linear, 4, 358},       {"4d-nonlinear", ProblemKind::nonlinear, 4, 1179},
    {"5d-linear", ProblemKind::linear, 5, 1137},      {"5d-nonlinear", ProblemKind::nonlinear, 5, 5311},
    {"5d-linear-cubic", ProblemKind::linear, 5, 1137},
};

Topology preset_topology(int dimension) {
  const int width = dimension <= 3 ? 96 : (dimension == 4 ? 148 : 160);
  std::vector<int> w{dimension};
  w.insert(w.end(), 6, width);
  w.push_back(1);
  return Topology(w);
}

long preset_test_count(int dimension) {
  static constexpr long counts[] = {4000, 35000, 500000, 5000000};
  return counts[dimension - 2];
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : kPresets) names.emplace_back(p.name);
  return names;
}

RunConfig preset(const std::string& name) {
  const auto it = std::find_if(std::begin(kPresets), std::end(kPresets),
                               [&](const PresetRow& p) { return name == p.name; });
  if (it == std::end(kPresets)) throw ConfigError("preset", "unknown preset '" + name + "'");
  RunConfig c;
  c.name = it->name;
  c.problem = {it->kind, it->dimension, Variant::standard};
  c.topology = preset_topology(it->dimension);
  const bool linear = it->kind == ProblemKind::linear;
  c.theta = std::numbers::pi / (linear ? 6.0 : 8.0);
  c.lambda = linear ? 1.0 / 3.0 : 0.25;
  c.interior_target = it->interior_target;
  c.phases = linear ? linear_schedule() : nonlinear_schedule();
  c.test_count = preset_test_count(it->dimension);
  if (name == "5d-linear-cubic") {
    c.problem.variant = Variant::cubic_x3;
    c.phases[0].intervals = {{1000, 20, true}, {1500, 200, false}};
  }
  return c;
}

}  // namespace nnpde
