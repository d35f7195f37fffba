#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "linpm/game.hpp"
#include "linpm/observability.hpp"

namespace linpm {

// --- group-norm alignment programs --------------------------------------------

struct GroupNormSolution {
  double value = 0.0;                   // sum over actions of block Euclidean norms
  std::vector<Eigen::VectorXd> blocks;  // one coefficient block per action (length n(a))
  double residual = 0.0;                // constraint residual of the returned point
  int iterations = 0;
};

// Minimize sum_c ||v_c|| subject to sum_c M_c v_c = target, with v_c forced to
// zero outside `allowed` (empty means every action is allowed).  Solved by a
// proximal splitting scheme on the kernel parameterization of the constraint;
// converged when the objective stops improving by 1e-9 over a 100-iteration
// window.  Throws NoWitnessError when the target is outside the allowed span.
GroupNormSolution min_group_norm(const Game& game, const Eigen::VectorXd& target,
                                 const std::vector<int>& allowed = {});

// Worst-case Euclidean alignment: max over distinct-feature pairs of the
// minimum-norm coefficient length || pinv(stacked observations) (x_a - x_b) ||.
// Throws NoWitnessError unless the game is globally observable.
double beta_2_glo(const Game& game);

// Worst-case group-norm alignment: same maximum with the sum-of-block-norms
// objective (one block per action).
double beta_glo(const Game& game);

// --- locally-restricted alignment ----------------------------------------------

enum class BetaLocMode { kEnumerate, kSampled };

struct BetaLocResult {
  double value = 0.0;
  bool exact = false;       // true for full ordering enumeration
  int orderings = 0;        // realizable orderings visited (or samples drawn)
  int max_support = 0;      // largest union of coefficient supports over orderings
};

// Worst case over loss vectors of the best alignment weights restricted, for
// each Pareto action, to actions currently no better than it.  Enumerate mode
// visits every realizable strict ordering of distinct feature values (at most
// seven distinct values); sampled mode draws losses and reports a lower
// estimate.
BetaLocResult beta_loc(const Game& game, BetaLocMode mode = BetaLocMode::kEnumerate,
                       int samples = 2000, std::uint64_t seed = 0);

// --- subset observation-complexity indices ---------------------------------------

enum class SubsetSearchMode { kExhaustive, kGreedy };

struct SubsetIndexResult {
  double value = 0.0;
  std::vector<int> subset;
  bool exact = false;  // exhaustive search
};

// min over subsets S (whose observations span the observation space) of
// |S| * max_b || M_b' (sum_{s in S} M_s M_s')^+ M_b ||_2, restricted to the span.
SubsetIndexResult w_star(const Game& game, SubsetSearchMode mode = SubsetSearchMode::kExhaustive);
// Same with the stacked observation matrix in place of the per-action M_b.
SubsetIndexResult u_star(const Game& game, SubsetSearchMode mode = SubsetSearchMode::kExhaustive);

// Largest k for which exhaustive subset search is allowed.
inline constexpr int kExhaustiveSubsetLimit = 12;

// --- estimator scale ------------------------------------------------------------

// Upper bound on the estimator scale: how large a one-round loss estimate can
// get relative to the information the play distribution buys.  Family-exact
// values where the construction admits one, a norm bound otherwise.
double omega_bound(const Game& game);

// --- graph quantities -------------------------------------------------------------

struct GraphConstants {
  int independence_number = 0;    // self-loops ignored
  int total_domination_number = 0;  // smallest set whose neighborhoods cover all vertices
};

// Exact by exhaustive search; limited to 20 vertices.  Throws NoWitnessError
// when some vertex is observed by nobody (domination undefined).
GraphConstants graph_constants(const Graph& graph);

// Every vertex either sees itself or is seen by all others.
bool graph_strongly_observable(const Graph& graph);
// Every vertex is seen by someone.
bool graph_weakly_observable(const Graph& graph);

// --- strong-graph estimation weights ----------------------------------------------

struct EstimationWeights {
  int optimal_action = 0;
  std::vector<int> g1, g2;  // per-action pointers; both equal a* at a* itself
  // blocks[a][c]: coefficients over M_c's observation columns reconstructing
  // the feature difference x_a - x_{a*}.
  std::vector<std::vector<Eigen::VectorXd>> blocks;
  double beta = 0.0;     // max over a of the summed block norms
  int support_size = 0;  // actions carrying a nonzero block for some a
};

// Node-elimination construction of low-norm estimation weights for strongly
// observable graph games; the optimal action is the lowest-index minimizer of
// the loss.  Throws InvalidInputError unless the game is a graph game with a
// strongly observable graph.
EstimationWeights strong_graph_weights(const Game& game, const Eigen::VectorXd& loss);

// --- aggregate report ---------------------------------------------------------------

struct ConstantsReport {
  Observability verdict = Observability::kTrivial;
  std::optional<double> beta_2_glo;
  std::optional<double> beta_glo;
  std::optional<BetaLocResult> beta_loc;
  SubsetIndexResult w_star;
  SubsetIndexResult u_star;
  double omega = 0.0;
  std::optional<GraphConstants> graph;
};

ConstantsReport compute_constants(const Game& game,
                                  std::optional<SubsetSearchMode> subset_mode = std::nullopt,
                                  std::optional<BetaLocMode> beta_mode = std::nullopt);

}  // namespace linpm
