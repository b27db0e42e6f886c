#include "nnpde/weights_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

namespace nnpde {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename Real>
void put(std::ostream& os, Real v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, res.ptr - buf);
  os.put('\n');
}

template <typename Real>
Real get(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty()) continue;
    Real v{};
    const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
    if (res.ec != std::errc() || res.ptr != line.data() + line.size())
      throw FormatError("bad weight value '" + line + "'");
    return v;
  }
  throw FormatError("weights file truncated");
}

}  // namespace

std::string format_header(const WeightsHeader& header) {
  std::string s = "layers: " + header.topology.to_string() + "; precision: " + std::to_string(header.precision);
  if (!header.block.empty()) s += "; block: " + header.block;
  return s;
}

WeightsHeader parse_header(const std::string& line) {
  std::optional<Topology> topology;
  int precision = 0;
  std::string block;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const auto end = std::min(line.find(';', pos), line.size());
    const std::string field = trim(line.substr(pos, end - pos));
    pos = end + 1;
    if (field.empty()) continue;
    const auto colon = field.find(':');
    if (colon == std::string::npos) throw FormatError("bad header field '" + field + "'");
    const std::string key = trim(field.substr(0, colon));
    const std::string value = trim(field.substr(colon + 1));
    if (key == "layers") {
      try {
        topology = Topology::parse(value);
      } catch (const ShapeError& e) {
        throw FormatError(e.what());
      }
    } else if (key == "precision") {
      if (value == "32")
        precision = 32;
      else if (value == "64")
        precision = 64;
      else
        throw FormatError("precision must be 32 or 64, got '" + value + "'");
    } else if (key == "block") {
      block = value;
    } else {
      throw FormatError("unknown header field '" + key + "'");
    }
  }
  if (!topology) throw FormatError("header lacks 'layers'");
  if (precision == 0) throw FormatError("header lacks 'precision'");
  return WeightsHeader{*topology, precision, block};
}

template <typename Real>
void write_weights(std::ostream& os, const WeightSet<Real>& weights, const std::string& block) {
  os << format_header({weights.topology(), precision_bits<Real>(), block}) << '\n';
  for (const auto& layer : weights.layers) {
    for (Index r = 0; r < layer.weights.rows(); ++r)
      for (Index c = 0; c < layer.weights.cols(); ++c) put(os, layer.weights(r, c));
    for (Index r = 0; r < layer.thresholds.size(); ++r) put(os, layer.thresholds(r));
  }
}

template <typename Real>
WeightSet<Real> read_weights(std::istream& is, std::string* block) {
  std::string line;
  do {
    if (!std::getline(is, line)) throw FormatError("missing weights header");
  } while (trim(line).empty());
  const WeightsHeader header = parse_header(line);
  if (header.precision != precision_bits<Real>())
    throw FormatError("stored precision " + std::to_string(header.precision) + " does not match requested " +
                      std::to_string(precision_bits<Real>()));
  if (block) *block = header.block;
  WeightSet<Real> ws(header.topology);
  for (auto& layer : ws.layers) {
    for (Index r = 0; r < layer.weights.rows(); ++r)
      for (Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = get<Real>(is);
    for (Index r = 0; r < layer.thresholds.size(); ++r) layer.thresholds(r) = get<Real>(is);
  }
  return ws;
}

int stored_precision(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  return parse_header(line).precision;
}

template <typename Real>
void save_weights(const std::filesystem::path& path, const WeightSet<Real>& weights) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_weights(out, weights);
}

template <typename Real>
WeightSet<Real> load_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_weights<Real>(in);
}

template void write_weights<float>(std::ostream&, const WeightSet<float>&, const std::string&);
template void write_weights<double>(std::ostream&, const WeightSet<double>&, const std::string&);
template WeightSet<float> read_weights<float>(std::istream&, std::string*);
template WeightSet<double> read_weights<double>(std::istream&, std::string*);
template void save_weights<float>(const std::filesystem::path&, const WeightSet<float>&);
template void save_weights<double>(const std::filesystem::path&, const WeightSet<double>&);
template WeightSet<float> load_weights<float>(const std::filesystem::path&);
template WeightSet<double> load_weights<double>(const std::filesystem::path&);

}  // namespace nnpde
