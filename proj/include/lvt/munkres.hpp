#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace lvt {

struct AssignmentResult {
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  std::vector<int> unassigned_rows;
  std::vector<int> unassigned_cols;
  double total_cost = 0.0;  // sum over assigned pairs
};

/// Minimum-cost one-to-one assignment over pairs with cost < gate (Munkres on
/// the gate-masked, square-padded matrix). Costs >= gate or non-finite are
/// never assigned; among maximum-cardinality feasible matchings the total
/// cost is minimal. Handles rectangular matrices.
AssignmentResult solve_assignment(const Eigen::MatrixXd& costs, double gate);

}  // namespace lvt
