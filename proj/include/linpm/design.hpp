#pragma once

#include <Eigen/Dense>

#include "linpm/game.hpp"
#include "linpm/matrix_utils.hpp"

namespace linpm {

// Condition-number ceiling above which the restricted design matrix is
// reported as numerically singular.
inline constexpr double kDesignConditionLimit = 1e12;

// Exploration design matrix: sum over actions of mix(a) * M_a M_a', where
// mix = (1 - delta) * pi + delta * uniform.  delta in [0, 1/2].
Eigen::MatrixXd design_matrix(const Game& game, const Simplex& pi, double delta);

// Pseudo-inverse of the design matrix, computed on the observation span:
// U (U' Q U)^{-1} U' with U an orthonormal basis of the stacked observations.
// Requires the restricted matrix to be positive definite (delta > 0, or
// delta = 0 with pi supported on actions whose observations span the space);
// throws IllConditionedError otherwise.
Eigen::MatrixXd q_dagger(const Game& game, const Simplex& pi, double delta);

// Minimizer of the worst-case observation leverage
//   g(pi) = max_a trace(M_a' U (U' Q(pi) U)^{-1} U' M_a),
// whose optimal value equals the rank of the stacked observations.  Solved by
// conditional-gradient steps on the log-det criterion; stops when the duality
// gap drops below tol.
struct OptimalDesign {
  Simplex pi;
  double value = 0.0;  // g at the returned design
  int iterations = 0;
};
OptimalDesign optimal_design(const Game& game, double tol = 1e-5, int max_iters = 20000);

}  // namespace linpm
