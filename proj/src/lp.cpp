#include "linpm/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace linpm {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;

// Tableau with rows 0..m-1 holding constraints and row m holding reduced
// costs; column n holds the right-hand side / negated objective value.
struct Tableau {
  Eigen::MatrixXd t;
  std::vector<int> basis;

  int rows() const { return static_cast<int>(t.rows()) - 1; }
  int cols() const { return static_cast<int>(t.cols()) - 1; }

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int i = 0; i < static_cast<int>(t.rows()); ++i) {
      if (i != row && std::abs(t(i, col)) > 0.0) t.row(i) -= t(i, col) * t.row(row);
    }
    basis[static_cast<size_t>(row)] = col;
  }

  // Bland's rule: smallest-index entering column, smallest-index leaving basic
  // variable among minimum-ratio rows.  Returns false on unboundedness.
  bool run(const std::vector<bool>& usable) {
    const int m = rows(), n = cols();
    while (true) {
      int enter = -1;
      for (int j = 0; j < n; ++j) {
        if (usable[static_cast<size_t>(j)] && t(m, j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;  // optimal
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (t(i, enter) > kPivotTol) {
          const double ratio = t(i, n) / t(i, enter);
          if (ratio < best_ratio - kPivotTol ||
              (ratio < best_ratio + kPivotTol &&
               (leave < 0 || basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpResult solve_lp_standard(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& c) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  LpResult result;

  // Phase 1: minimize the sum of one artificial variable per row.
  Tableau tab;
  tab.t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  tab.t.block(0, 0, m, n) = a;
  tab.t.block(0, n + m, m, 1) = b;
  for (int i = 0; i < m; ++i) {
    if (tab.t(i, n + m) < 0.0) tab.t.row(i) = -tab.t.row(i);
    tab.t(i, n + i) = 1.0;
    tab.basis.push_back(n + i);
  }
  // Phase-1 cost: one per artificial column, then eliminate the basic columns
  // so the artificials start with zero reduced cost.
  for (int i = 0; i < m; ++i) tab.t(m, n + i) = 1.0;
  for (int i = 0; i < m; ++i) tab.t.row(m) -= tab.t.row(i);

  std::vector<bool> usable(static_cast<size_t>(n + m), true);
  if (!tab.run(usable)) return result;  // phase 1 cannot be unbounded in exact arithmetic
  if (-tab.t(m, n + m) > 1e-7) return result;  // infeasible

  // Drive any artificial variables out of the basis (or mark their rows redundant).
  std::vector<bool> row_live(static_cast<size_t>(m), true);
  for (int i = 0; i < m; ++i) {
    if (tab.basis[static_cast<size_t>(i)] < n) continue;
    int col = -1;
    for (int j = 0; j < n; ++j) {
      if (std::abs(tab.t(i, j)) > kPivotTol) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tab.pivot(i, col);
    } else {
      row_live[static_cast<size_t>(i)] = false;  // redundant constraint
    }
  }

  // Phase 2 on the original objective, artificial columns frozen out.
  for (int j = 0; j < n + m; ++j) usable[static_cast<size_t>(j)] = j < n;
  tab.t.row(m).setZero();
  tab.t.row(m).head(n) = c;
  for (int i = 0; i < m; ++i) {
    const int j = tab.basis[static_cast<size_t>(i)];
    if (row_live[static_cast<size_t>(i)] && j < n && std::abs(tab.t(m, j)) > 0.0) {
      tab.t.row(m) -= tab.t(m, j) * tab.t.row(i);
    }
  }
  if (!tab.run(usable)) {
    result.status = LpStatus::kUnbounded;
    return result;
  }

  result.status = LpStatus::kOptimal;
  result.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    const int j = tab.basis[static_cast<size_t>(i)];
    if (row_live[static_cast<size_t>(i)] && j < n) result.x(j) = tab.t(i, n + m);
  }
  result.value = c.dot(result.x);
  return result;
}

LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a_ub,
                  const Eigen::VectorXd& b_ub, const Eigen::MatrixXd& a_eq,
                  const Eigen::VectorXd& b_eq) {
  const int n = static_cast<int>(c.size());
  const int mu = static_cast<int>(a_ub.rows());
  const int me = static_cast<int>(a_eq.rows());

  // Standard form via x = u - v (u, v >= 0) and one slack per inequality.
  const int cols = 2 * n + mu;
  Eigen::MatrixXd a(mu + me, cols);
  Eigen::VectorXd b(mu + me);
  a.setZero();
  if (mu > 0) {
    a.block(0, 0, mu, n) = a_ub;
    a.block(0, n, mu, n) = -a_ub;
    a.block(0, 2 * n, mu, mu) = Eigen::MatrixXd::Identity(mu, mu);
    b.head(mu) = b_ub;
  }
  if (me > 0) {
    a.block(mu, 0, me, n) = a_eq;
    a.block(mu, n, me, n) = -a_eq;
    b.tail(me) = b_eq;
  }
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
  cost.head(n) = c;
  cost.segment(n, n) = -c;

  LpResult inner = solve_lp_standard(a, b, cost);
  LpResult result;
  result.status = inner.status;
  if (inner.status == LpStatus::kOptimal) {
    result.x = inner.x.head(n) - inner.x.segment(n, n);
    result.value = c.dot(result.x);
  }
  return result;
}

}  // namespace linpm
