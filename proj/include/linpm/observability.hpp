#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "linpm/game.hpp"

namespace linpm {

enum class Observability { kTrivial, kLocallyObservable, kGloballyObservable, kHopeless };

std::string observability_name(Observability verdict);

// Thresholds fixed by the analysis contract.
inline constexpr double kCellMargin = 1e-7;        // LP margin certifying a shared cell facet
inline constexpr double kSpanResidual = 1e-7;      // relative residual for span membership
inline constexpr double kSegmentResidual = 1e-8;   // residual for segment membership

// Actions whose feature is an extreme point of the feature hull (duplicates of
// an extreme feature are all included).
std::vector<int> pareto_actions(const Game& game);

// Actions whose feature lies on the segment between a's and b's features
// (always contains a, b, and their duplicates).
std::vector<int> neighborhood(const Game& game, int a, int b);

// Pairs of distinct-feature Pareto representatives whose optimality cells
// share a facet of dimension d-1.  Representatives are lowest-index members
// of their duplicate groups; pairs are lexicographic.
std::vector<std::pair<int, int>> neighbor_pairs(const Game& game);

// A loss vector where actions a and b tie as optimal and every off-segment
// action is strictly worse by at least `margin` per unit feature distance.
struct CellInteriorPoint {
  Eigen::VectorXd loss;
  double margin = 0.0;
};
// Throws NoWitnessError when the pair's cells share no facet.
CellInteriorPoint cell_interior_point(const Game& game, int a, int b);

struct PairWitness {
  int a = 0, b = 0;                 // distinct-feature Pareto representatives
  bool neighbors = false;           // cells share a (d-1)-dimensional facet
  double cell_margin = 0.0;         // optimal margin of the facet program
  double global_residual = 0.0;     // relative distance of the feature difference
                                    // to the span of all observations
  double local_residual = 0.0;      // same against the neighborhood span (neighbors only)
  std::vector<int> neighborhood;    // actions on the feature segment (neighbors only)
  Eigen::VectorXd span_coefficients;  // least-squares witness against all observations
};

struct ObservabilityReport {
  Observability verdict = Observability::kTrivial;
  std::vector<int> pareto;                          // all Pareto-optimal actions
  std::vector<int> pareto_representatives;          // one per distinct feature value
  std::vector<std::pair<int, int>> neighbor_pairs;
  std::vector<PairWitness> witnesses;               // one per representative pair
};

// Full classification: Trivial (at most one distinct Pareto feature),
// Hopeless (some Pareto pair's difference escapes the observation span),
// LocallyObservable (every neighbor pair resolvable from neighborhood
// observations), GloballyObservable otherwise.
ObservabilityReport classify(const Game& game);

}  // namespace linpm
