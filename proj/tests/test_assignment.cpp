#include "minsight/assignment.hpp"

#include <limits>

#include "doctest.h"
#include "minsight/rng.hpp"

using namespace minsight;
using namespace minsight::embedding;

namespace {

// Independent oracle: exhaustive search over all injective row->column
// maps. Only usable for small instances.
double brute_force_min_cost(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  std::vector<char> used(m, 0);
  double best = std::numeric_limits<double>::infinity();
  auto rec = [&](auto&& self, int row, double acc) -> void {
    if (acc >= best) return;
    if (row == n) {
      best = acc;
      return;
    }
    for (int c = 0; c < m; ++c) {
      if (used[c]) continue;
      used[c] = 1;
      self(self, row + 1, acc + cost(row, c));
      used[c] = 0;
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

Eigen::MatrixXd random_cost(Rng& rng, int n, int m) {
  Eigen::MatrixXd c(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) c(i, j) = rng.uniform(0.0, 10.0);
  return c;
}

}  // namespace

TEST_CASE("solver finds the obvious optimum on a 2x2") {
  AssignmentProblem p;
  p.cost.resize(2, 2);
  p.cost << 1, 2, 2, 1;
  const auto result = solve_assignment(p);
  CHECK(result.row_to_col == std::vector<int>{0, 1});
  CHECK(result.total_cost == doctest::Approx(2.0));
}

TEST_CASE("solver matches the exhaustive oracle on a seeded 5x7") {
  Rng rng(3);
  AssignmentProblem p;
  p.cost = random_cost(rng, 5, 7);
  const auto result = solve_assignment(p);
  CHECK(result.total_cost == doctest::Approx(brute_force_min_cost(p.cost))
                                 .epsilon(1e-12));
  // injectivity
  std::vector<char> used(7, 0);
  for (int c : result.row_to_col) {
    CHECK(!used[c]);
    used[c] = 1;
  }
}

TEST_CASE("solver matches the exhaustive oracle on random rectangles") {
  Rng rng(99);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(7));
    const int m = n + static_cast<int>(rng.index(static_cast<std::uint64_t>(
                          9 - n + 1)));
    AssignmentProblem p;
    p.cost = random_cost(rng, n, m);
    const auto result = solve_assignment(p);
    const double expected = brute_force_min_cost(p.cost);
    REQUIRE(result.total_cost == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("uniform costs give the lexicographically smallest assignment") {
  for (int n : {1, 2, 3, 5}) {
    for (int m : {5, 7}) {
      AssignmentProblem p;
      p.cost = Eigen::MatrixXd::Constant(n, m, 3.25);
      const auto result = solve_assignment(p);
      CHECK(result.total_cost == doctest::Approx(3.25 * n));
      for (int r = 0; r < n; ++r) CHECK(result.row_to_col[r] == r);
    }
  }
}

TEST_CASE("invalid problems are rejected") {
  AssignmentProblem p;

  p.cost = Eigen::MatrixXd::Constant(3, 2, 1.0);  // rows > cols
  CHECK_THROWS_AS(solve_assignment(p), std::invalid_argument);

  p.cost = Eigen::MatrixXd::Constant(2, 3, 1.0);
  p.cost(1, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_assignment(p), std::invalid_argument);

  p.cost = Eigen::MatrixXd::Constant(2, 3, 1.0);
  p.cost(0, 0) = -0.5;
  CHECK_THROWS_AS(solve_assignment(p), std::invalid_argument);
}
