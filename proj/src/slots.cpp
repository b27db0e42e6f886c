#include "nnpde/slots.hpp"

#include <algorithm>
#include <map>

namespace nnpde {

std::string SlotLabel::to_string() const {
  std::string s;
  if (coord_order == 0)
    s = "id";
  else
    s = (coord_order == 1 ? "d/dx" : "d2/dx") + std::to_string(axis + 1);
  s += " | ";
  if (direction == Direction::none)
    s += "id";
  else
    s += "d" + std::to_string(dir_order) + (direction == Direction::xi ? "/dxi" : "/dzeta");
  return s;
}

SlotSet::SlotSet(int dimension, int order) : dimension_(dimension), order_(order) {
  if (dimension < kMinDimension || dimension > kMaxDimension)
    throw SlotConfigError("slot set dimension must be in 2..5, got " + std::to_string(dimension));
  if (order < kMinOrder || order > kMaxOrder)
    throw SlotConfigError("slot set order must be in 2..4, got " + std::to_string(order));

  std::vector<std::pair<int, int>> coord_ops{{0, -1}};
  for (int j = 0; j < dimension; ++j) coord_ops.emplace_back(1, j);
  for (int j = 0; j < dimension; ++j) coord_ops.emplace_back(2, j);

  std::vector<std::pair<Direction, int>> dir_ops{{Direction::none, 0}};
  for (int m = 1; m <= order; ++m) dir_ops.emplace_back(Direction::xi, m);
  for (int m = 1; m <= order; ++m) dir_ops.emplace_back(Direction::zeta, m);

  labels_.reserve(coord_ops.size() * dir_ops.size());
  for (auto [co, ax] : coord_ops)
    for (auto [d, m] : dir_ops) labels_.push_back(SlotLabel{co, ax, d, m});
}

int SlotSet::index(int coord_order, int axis, Direction dir, int dir_order) const {
  int ci;
  if (coord_order == 0)
    ci = 0;
  else if ((coord_order == 1 || coord_order == 2) && axis >= 0 && axis < dimension_)
    ci = 1 + (coord_order - 1) * dimension_ + axis;
  else
    return -1;

  int di;
  if (dir == Direction::none) {
    if (dir_order != 0) return -1;
    di = 0;
  } else {
    if (dir_order < 1 || dir_order > order_) return -1;
    di = (dir == Direction::xi ? 0 : order_) + dir_order;
  }
  return ci * (2 * order_ + 1) + di;
}

std::vector<SlotLabel> enumerate_slots(int dimension, int order) { return SlotSet(dimension, order).labels(); }

long bell_number(int n) {
  // Bell triangle.
  std::vector<long> row{1};
  for (int i = 0; i < n; ++i) {
    std::vector<long> next{row.back()};
    for (long v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

namespace {

// Enumerate set partitions of {0..n-1} by restricted growth strings. Elements
// [0, a) carry the coordinate label, [a, a+b) the direction label.
std::vector<MultisetPartition> partitions_of(int a, int b) {
  const int n = a + b;
  std::map<std::vector<std::pair<int, int>>, long> merged;
  if (n == 0) return {};
  std::vector<int> rgs(n, 0);
  while (true) {
    const int nblocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
    std::vector<std::pair<int, int>> blocks(nblocks, {0, 0});
    for (int e = 0; e < n; ++e) (e < a ? blocks[rgs[e]].first : blocks[rgs[e]].second)++;
    std::sort(blocks.begin(), blocks.end());
    ++merged[blocks];

    // next restricted growth string
    int i = n - 1;
    for (; i > 0; --i) {
      const int prefix_max = *std::max_element(rgs.begin(), rgs.begin() + i);
      if (rgs[i] <= prefix_max) {
        ++rgs[i];
        std::fill(rgs.begin() + i + 1, rgs.end(), 0);
        break;
      }
    }
    if (i == 0) break;
  }
  std::vector<MultisetPartition> out;
  out.reserve(merged.size());
  for (auto& [blocks, count] : merged) out.push_back({blocks, count});
  return out;
}

}  // namespace

PartitionTable::PartitionTable() {
  for (int a = 0; a <= kMaxCoord; ++a)
    for (int b = 0; b <= kMaxDir; ++b) table_[a][b] = partitions_of(a, b);
}

long PartitionTable::total_multiplicity(int a, int b) const {
  long total = 0;
  for (const auto& p : table_[a][b]) total += p.multiplicity;
  return total;
}

const PartitionTable& PartitionTable::instance() {
  static const PartitionTable table;
  return table;
}

ActivationPlan::ActivationPlan(const SlotSet& slots, const PartitionTable& table) {
  terms_.resize(slots.size());
  for (int d = 1; d < slots.size(); ++d) {
    const SlotLabel& l = slots[d];
    for (const auto& part : table.entries(l.coord_order, l.dir_order)) {
      ChainTerm term;
      term.multiplicity = static_cast<double>(part.multiplicity);
      for (auto [ca, db] : part.blocks) {
        const int idx = slots.index(ca, ca > 0 ? l.axis : -1, db > 0 ? l.direction : Direction::none, db);
        if (idx < 0) throw SlotConfigError("slot set not closed under sub-multisets");
        term.blocks.push_back(idx);
      }
      max_derivative_ = std::max(max_derivative_, static_cast<int>(term.blocks.size()));
      terms_[d].push_back(std::move(term));
    }
  }
}

}  // namespace nnpde
