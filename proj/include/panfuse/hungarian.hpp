#pragma once

#include <span>
#include <utility>
#include <vector>

namespace panfuse {

struct HungarianResult {
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  double total_cost = 0.0;                 // over the real (unpadded) pairs
};

/// Minimum-total-cost assignment of a rectangular cost matrix (row-major,
/// rows*cols finite entries). The matrix is padded to square with a cost
/// strictly above every real entry; pairs that land on padding are dropped,
/// so min(rows, cols) pairs come back.
HungarianResult solve_assignment(int rows, int cols, std::span<const double> cost);

}  // namespace panfuse
