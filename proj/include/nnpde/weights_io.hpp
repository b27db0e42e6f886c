#pragma once

// Text weights format:
//
//   layers: 2,96,96,1; precision: 64
//   <W of layer 1, row-major, one value per line>
//   <b of layer 1>
//   ...
//
// Values are written in shortest round-trip form at the stored precision, so
// reading a file back reproduces the weights bit for bit.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "nnpde/network.hpp"

namespace nnpde {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WeightsHeader {
  Topology topology;
  int precision = 64;  // 32 or 64
  std::string block;   // optional trailing "; block: <name>"
};

template <typename Real>
constexpr int precision_bits() {
  return sizeof(Real) == 4 ? 32 : 64;
}

std::string format_header(const WeightsHeader& header);
WeightsHeader parse_header(const std::string& line);

template <typename Real>
void write_weights(std::ostream& os, const WeightSet<Real>& weights, const std::string& block = {});

/// Reads one weights block. The stored precision must match Real.
template <typename Real>
WeightSet<Real> read_weights(std::istream& is, std::string* block = nullptr);

/// Precision recorded in the header of a weights file (32 or 64).
int stored_precision(const std::filesystem::path& path);

template <typename Real>
void save_weights(const std::filesystem::path& path, const WeightSet<Real>& weights);
template <typename Real>
WeightSet<Real> load_weights(const std::filesystem::path& path);

}  // namespace nnpde
