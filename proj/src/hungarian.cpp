#include "panfuse/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace panfuse {

HungarianResult solve_assignment(int rows, int cols, std::span<const double> cost) {
  if (rows < 0 || cols < 0 || cost.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("solve_assignment: cost matrix size mismatch");
  HungarianResult result;
  if (rows == 0 || cols == 0) return result;

  double max_entry = -std::numeric_limits<double>::infinity();
  for (double c : cost) {
    if (!std::isfinite(c)) throw std::invalid_argument("solve_assignment: non-finite cost");
    max_entry = std::max(max_entry, c);
  }
  const int n = std::max(rows, cols);
  const double pad = max_entry + 1.0 + std::abs(max_entry);

  auto entry = [&](int r, int c) -> double {
    return (r < rows && c < cols) ? cost[static_cast<std::size_t>(r) * cols + c] : pad;
  };

  // Shortest-augmenting-path Hungarian with row/column potentials, O(n^3).
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> pot_u(n + 1, 0.0), pot_v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0);  // match[col 1-based] = row 1-based
  std::vector<int> way(n + 1, 0);
  for (int r = 1; r <= n; ++r) {
    match[0] = r;
    int j0 = 0;
    std::vector<double> min_slack(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int r0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double slack = entry(r0 - 1, j - 1) - pot_u[r0] - pot_v[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          pot_u[match[j]] += delta;
          pot_v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (int j = 1; j <= n; ++j) {
    const int r = match[j] - 1;
    const int c = j - 1;
    if (r < rows && c < cols) {
      result.pairs.emplace_back(r, c);
      result.total_cost += cost[static_cast<std::size_t>(r) * cols + c];
    }
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  return result;
}

}  // namespace panfuse
