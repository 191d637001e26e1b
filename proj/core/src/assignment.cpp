#include "minsight/assignment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace minsight::embedding {

void AssignmentProblem::validate() const {
  if (rows() == 0 || cols() == 0) {
    throw std::invalid_argument("assignment: empty cost matrix");
  }
  if (rows() > cols()) {
    throw std::invalid_argument("assignment: requires n_rows <= n_cols");
  }
  for (int r = 0; r < rows(); ++r) {
    for (int c = 0; c < cols(); ++c) {
      const double v = cost(r, c);
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument(
            "assignment: costs must be finite and nonnegative");
      }
    }
  }
}

AssignmentResult solve_assignment(const AssignmentProblem& problem) {
  problem.validate();
  const int n = problem.rows();
  const int m = problem.cols();
  const auto& cost = problem.cost;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n, 0.0), v(m, 0.0);
  std::vector<int> row_of_col(m, -1), col_of_row(n, -1);

  std::vector<double> shortest(m);
  std::vector<char> done(m);
  std::vector<int> pred(m);

  for (int cur = 0; cur < n; ++cur) {
    std::fill(shortest.begin(), shortest.end(), kInf);
    std::fill(done.begin(), done.end(), char{0});
    std::fill(pred.begin(), pred.end(), cur);

    int i = cur;
    int sink = -1;
    double min_val = 0.0;
    while (sink < 0) {
      // Relax all open columns from row i, then scan the open minimum.
      // Strict comparisons keep the earliest predecessor and the lowest
      // column index on ties.
      int index = -1;
      double lowest = kInf;
      for (int j = 0; j < m; ++j) {
        if (done[j]) continue;
        const double r = min_val + cost(i, j) - u[i] - v[j];
        if (r < shortest[j]) {
          shortest[j] = r;
          pred[j] = i;
        }
        if (shortest[j] < lowest) {
          lowest = shortest[j];
          index = j;
        }
      }
      min_val = lowest;
      done[index] = 1;
      if (row_of_col[index] < 0) {
        sink = index;
      } else {
        i = row_of_col[index];
      }
    }

    u[cur] += min_val;
    for (int j = 0; j < m; ++j) {
      if (done[j] && j != sink) {
        u[row_of_col[j]] += min_val - shortest[j];
        v[j] -= min_val - shortest[j];
      }
    }

    // Augment along the alternating path back to the current row.
    int j = sink;
    while (true) {
      const int r = pred[j];
      row_of_col[j] = r;
      std::swap(col_of_row[r], j);
      if (r == cur) break;
    }
  }

  AssignmentResult result;
  result.row_to_col = col_of_row;
  for (int r = 0; r < n; ++r) result.total_cost += cost(r, col_of_row[r]);
  return result;
}

}  // namespace minsight::embedding
