#include "lvt/munkres.hpp"

#include <cmath>
#include <limits>

namespace lvt {

namespace {

constexpr double kForbidden = 1e12;

/// Shortest augmenting path assignment on a square matrix (Jonker-style
/// potentials). Returns col_of_row.
std::vector<int> square_assign(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> col_of_row(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) col_of_row[p[j] - 1] = j - 1;
  }
  return col_of_row;
}

}  // namespace

AssignmentResult solve_assignment(const Eigen::MatrixXd& costs, double gate) {
  const int rows = static_cast<int>(costs.rows());
  const int cols = static_cast<int>(costs.cols());
  AssignmentResult res;
  if (rows == 0 || cols == 0) {
    for (int r = 0; r < rows; ++r) res.unassigned_rows.push_back(r);
    for (int c = 0; c < cols; ++c) res.unassigned_cols.push_back(c);
    return res;
  }

  // Square padding; every gated/padded slot costs the same sentinel, so the
  // solver maximizes the number of feasible pairs before minimizing cost.
  const int n = std::max(rows, cols);
  std::vector<std::vector<double>> padded(n, std::vector<double>(n, kForbidden));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double x = costs(r, c);
      if (std::isfinite(x) && x < gate) padded[r][c] = x;
    }
  }

  const std::vector<int> col_of_row = square_assign(padded);
  std::vector<char> col_used(cols, 0);
  for (int r = 0; r < rows; ++r) {
    const int c = col_of_row[r];
    if (c < cols && padded[r][c] < kForbidden) {
      res.pairs.emplace_back(r, c);
      res.total_cost += costs(r, c);
      col_used[c] = 1;
    } else {
      res.unassigned_rows.push_back(r);
    }
  }
  for (int c = 0; c < cols; ++c) {
    if (!col_used[c]) res.unassigned_cols.push_back(c);
  }
  return res;
}

}  // namespace lvt
