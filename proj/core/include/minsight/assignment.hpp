#pragma once

#include <Eigen/Dense>
#include <vector>

namespace minsight::embedding {

// Rectangular linear assignment problem: n_rows <= n_cols, every cost
// finite and nonnegative.
struct AssignmentProblem {
  Eigen::MatrixXd cost;

  int rows() const { return static_cast<int>(cost.rows()); }
  int cols() const { return static_cast<int>(cost.cols()); }
  // Throws std::invalid_argument on shape or value violations.
  void validate() const;
};

struct AssignmentResult {
  std::vector<int> row_to_col;  // injective, size n_rows
  double total_cost = 0.0;
};

// Minimum-cost injective row->column assignment via shortest augmenting
// paths with row/column potentials (Jonker-Volgenant style). Deterministic:
// ties are broken toward the lowest column index, so a uniform cost matrix
// yields the lexicographically smallest assignment.
AssignmentResult solve_assignment(const AssignmentProblem& problem);

}  // namespace minsight::embedding
