#pragma once

#include <Eigen/Dense>

namespace linpm {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;   // solution in the caller's variables
  double value = 0.0;  // objective at x
};

// Minimize c'x subject to A x = b, x >= 0.  Dense two-phase primal simplex with
// Bland's rule; intended for the small programs this library builds (tens of
// variables), where robustness matters more than speed.
LpResult solve_lp_standard(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& c);

// Minimize c'x over free x subject to a_ub x <= b_ub and a_eq x = b_eq.
// Pass 0-row matrices (with matching column count) for absent constraint blocks.
LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a_ub,
                  const Eigen::VectorXd& b_ub, const Eigen::MatrixXd& a_eq,
                  const Eigen::VectorXd& b_eq);

}  // namespace linpm
