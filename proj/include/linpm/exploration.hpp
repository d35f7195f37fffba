#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "linpm/design.hpp"
#include "linpm/game.hpp"
#include "linpm/matrix_utils.hpp"

namespace linpm {

// --- per-round exploration objective ---------------------------------------------

// Pairwise estimation energy at the delta-mixed design:
//   (x_a - x_b)' Qdag(p) (x_a - x_b).
double energy(const Game& game, int a, int b, const Simplex& p, double delta);

// Maximum of the pairwise energy over all action pairs.
double max_energy(const Game& game, const Simplex& p, double delta);

// Stability statistic of a play distribution: the maximum pairwise energy plus
// the worst observation leverage max_c || M_c' Qdag(p) M_c ||_2.  The
// exploration program constrains this below 2 / (eta L).
double z_value(const Game& game, const Simplex& p, double delta);

// Exploration objective
//   phi(p) = (1/eta) sigma(H (p - q)) + L^2 sum_{a,b} q(a) q(b) energy(a, b; p)
// with sigma the loss-space support function and H the feature matrix.  This
// is the worst case over losses of the transfer-plus-variance trade-off at p.
double phi(const Game& game, const Simplex& p, const Simplex& q, double eta, double L,
           double delta);

// The quadratic part of phi in anchored form,
//   2 L^2 sum_a q(a) (x_a - Hq)' Qdag(p) (x_a - Hq),
// which equals the pairwise double sum exactly.
double phi_quadratic(const Game& game, const Simplex& p, const Simplex& q, double L, double delta);

// --- constrained solver ------------------------------------------------------------

struct ExplorationOptions {
  int max_iters = 2000;          // total projected-subgradient iterations
  double z_slack = 1e-7;         // accepted violation of the stability constraint
  double early_stop_tol = 1e-9;  // > 0: stop once the incumbent stalls by less
  int early_stop_window = 60;    //      than this over the window; <= 0 disables
  std::optional<Simplex> warm_start;
};

struct ExplorationSolution {
  Simplex p;                     // minimizer before any uniform mixing
  double phi_value = 0.0;        // phi at p
  double z = 0.0;                // stability statistic at p
  int iterations = 0;
  bool constraint_active = false;  // z within 1e-3 of the limit
};

// Minimize phi over the simplex subject to z(p) <= 2 / (eta L), by projected
// subgradient descent on an exact-penalty objective with a doubling penalty
// weight and a multi-scale step schedule.  Deterministic.  Throws
// EtaTooLargeError (carrying the smallest stability value found) when no
// distribution satisfies the constraint.
ExplorationSolution solve_exploration(const Game& game, const Simplex& q, double eta, double L,
                                      double delta, const ExplorationOptions& options = {});

// --- two-sided value certificate -----------------------------------------------------

struct TwoSidedValue {
  double upper = 0.0;  // min over p of the worst-case objective (solver value)
  double lower = 0.0;  // max over sampled losses of the inner minimum
  double gap = 0.0;    // (upper - lower) / max(|upper|, 1e-12)
  int grid_size = 0;   // loss candidates evaluated
};

// Certifies the per-round saddle value from both sides.  The upper bound is
// the constrained phi minimum; the lower bound fixes candidate losses (loss
// space vertices, a great-circle grid for d = 2, a Fibonacci sphere for d = 3,
// seeded Gaussian directions beyond, all scaled to the boundary) and solves
// the inner minimization over the same constrained set.
TwoSidedValue lambda_star_two_sided(const Game& game, const Simplex& q, double eta, double L,
                                    double delta, int grid = 64, std::uint64_t seed = 0);

}  // namespace linpm
