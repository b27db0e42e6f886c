#pragma once

// Derivative slots carried through the extended forward pass.
//
// A slot is a pair (coordinate operator, directional operator):
//   coordinate: identity, d/dx_j, d^2/dx_j^2
//   direction:  identity, d^m/dxi^m, d^m/dzeta^m  (m = 1..s)
// Mixed xi/zeta slots and mixed-axis slots never occur, so the slot set is
// closed under the sub-multisets that the higher-order chain rule needs.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nnpde {

enum class Direction : std::uint8_t { none, xi, zeta };

struct SlotLabel {
  int coord_order = 0;  // 0, 1 or 2
  int axis = -1;        // -1 when coord_order == 0
  Direction direction = Direction::none;
  int dir_order = 0;  // 0 when direction == none

  int total_order() const { return coord_order + dir_order; }
  std::string to_string() const;
  friend bool operator==(const SlotLabel&, const SlotLabel&) = default;
};

class SlotConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SlotSet {
 public:
  static constexpr int kMinDimension = 2;
  static constexpr int kMaxDimension = 5;
  static constexpr int kMinOrder = 2;
  static constexpr int kMaxOrder = 4;

  /// Throws SlotConfigError for dimension outside 2..5 or order outside 2..4.
  SlotSet(int dimension, int order);

  int dimension() const { return dimension_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(labels_.size()); }
  const SlotLabel& operator[](int i) const { return labels_[i]; }
  const std::vector<SlotLabel>& labels() const { return labels_; }

  /// Index of the slot, or -1 if it is not part of the set.
  int index(int coord_order, int axis, Direction dir, int dir_order) const;
  int index(const SlotLabel& l) const { return index(l.coord_order, l.axis, l.direction, l.dir_order); }
  static constexpr int identity() { return 0; }

 private:
  int dimension_;
  int order_;
  std::vector<SlotLabel> labels_;
};

/// Ordered slot labels for dimension n and phase order s; (2n+1)(2s+1) entries.
std::vector<SlotLabel> enumerate_slots(int dimension, int order);

/// Partitions of the multiset {axis x a, direction x b}, with labeled-set
/// partitions that coincide as multisets merged into one entry.
struct MultisetPartition {
  std::vector<std::pair<int, int>> blocks;  // (coord order, dir order), sorted
  long multiplicity = 0;
};

class PartitionTable {
 public:
  static constexpr int kMaxCoord = 2;
  static constexpr int kMaxDir = 4;

  PartitionTable();
  const std::vector<MultisetPartition>& entries(int a, int b) const { return table_[a][b]; }
  long total_multiplicity(int a, int b) const;

  /// Shared immutable instance.
  static const PartitionTable& instance();

 private:
  std::vector<MultisetPartition> table_[kMaxCoord + 1][kMaxDir + 1];
};

long bell_number(int n);

/// One term of the chain rule for an output slot:
///   multiplicity * sigma^(blocks.size())(u) * prod_i in[blocks[i]]
struct ChainTerm {
  double multiplicity = 0;
  std::vector<int> blocks;  // slot indices
};

/// Per-slot chain-rule terms compiled against a concrete slot set.
/// Entry 0 (identity slot) is empty: it is sigma(u) itself.
class ActivationPlan {
 public:
  explicit ActivationPlan(const SlotSet& slots, const PartitionTable& table = PartitionTable::instance());
  const std::vector<ChainTerm>& terms(int slot) const { return terms_[slot]; }
  int size() const { return static_cast<int>(terms_.size()); }
  /// Highest sigma derivative used by any term.
  int max_derivative() const { return max_derivative_; }

 private:
  std::vector<std::vector<ChainTerm>> terms_;
  int max_derivative_ = 1;
};

}  // namespace nnpde
