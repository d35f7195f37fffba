#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "linpm/game.hpp"
#include "linpm/rng.hpp"

namespace linpm {

// Project a loss vector back into the loss space: radial scaling for norm
// balls, coordinate clamping for the unit box.  Identity on members.  Throws
// InvalidInputError for polar spaces, which admit no canonical projection.
Eigen::VectorXd clip_loss(const Eigen::VectorXd& loss, const LossSpace& space,
                          bool* clipped = nullptr);

// --- hard instance pairs -----------------------------------------------------------

// Which estimation difficulty the constructed pair exercises: a plain neighbor
// pair (local), a pair whose difference escapes its neighborhood's observation
// span (global), or one escaping every observation (hopeless).
enum class HardKind { kLocal, kGlobal, kHopeless };

struct HardPair {
  int a = 0, b = 0;           // targeted neighbor pair (distinct-feature representatives)
  Eigen::VectorXd theta;      // shared cell point, scaled to norm r/4
  Eigen::VectorXd direction;  // v: the kind-specific component of x_a - x_b
  Eigen::VectorXd push;       // q = (r / (4 ||v||)) v
  Eigen::VectorXd theta_a;    // theta - Delta * push  (a optimal)
  Eigen::VectorXd theta_b;    // theta + Delta * push  (b optimal)
  double delta = 0.0;         // separation parameter used
  double gap = 0.0;           // |<x_a - x_b, theta_a - theta>| = Delta * r * ||v|| / 4
  // Smallest optimality slack of theta over actions outside the pair's
  // neighborhood; infinity when no such action exists.  The construction only
  // separates a and b from the rest while Delta * ||push|| stays below this.
  double margin = std::numeric_limits<double>::infinity();
};

// Builds the two-parameter family theta_a = theta - Delta q, theta_b = theta +
// Delta q around an interior point of a shared cell facet, with the push
// direction chosen so the requested difficulty is certified:
//   local    — v = x_a - x_b (any neighbor pair);
//   global   — v = component of x_a - x_b orthogonal to the pair's
//              neighborhood observations (requires a locally unresolvable pair);
//   hopeless — v = component orthogonal to every observation.
// The pair is drawn uniformly among qualifying neighbor pairs using the seed.
// Requires a loss space containing a centered Euclidean ball and 0 < Delta <= 1.
// Throws NoWitnessError when no pair of the requested kind exists.
HardPair neighbor_hard_pair(const Game& game, HardKind kind, double delta, std::uint64_t seed = 0);

// --- ill-conditioned parameter family ----------------------------------------------

struct IllConditionedFamily {
  Eigen::VectorXd theta_0;              // all-coordinates-1/2 reference
  std::vector<Eigen::VectorXd> thetas;  // thetas[a] makes arm a optimal by delta
  double epsilon = 0.0;
  double delta = 0.0;
};

// theta_a = (1/2 + delta (1-epsilon)/k) 1 - delta e_a: arm a beats every other
// arm by exactly delta, yet observing arm c != a cannot distinguish theta_a
// from theta_0.  Requires 0 < delta <= 1/4 and epsilon in (0, 1].
IllConditionedFamily ill_conditioned_family(int k, double epsilon, double delta);

// --- loss generators -----------------------------------------------------------------

struct Environment {
  enum class Kind { kFixedSequence, kStochasticParam };
  enum class NoiseShape { kIsotropic, kRankOneOnes };

  Kind kind = Kind::kStochasticParam;
  std::string name = "stochastic";

  std::vector<Eigen::VectorXd> sequence;  // fixed-sequence losses, all inside the space

  Eigen::VectorXd theta;  // stochastic mean parameter
  double sigma = 0.0;     // noise amplitude
  NoiseShape noise_shape = NoiseShape::kIsotropic;
  bool clip = true;       // project draws back into the loss space

  // Validating factories.
  static Environment fixed_sequence(const Game& game, std::vector<Eigen::VectorXd> losses,
                                    std::string name = "fixed");
  static Environment stochastic(const Game& game, Eigen::VectorXd theta, double sigma,
                                NoiseShape shape = NoiseShape::kIsotropic, bool clip = true,
                                std::string name = "stochastic");
};

struct LossDraw {
  Eigen::VectorXd loss;
  bool clipped = false;
};

// The round-t loss vector.  Pure in (env, t, rng): fixed sequences index the
// stored list (out of range is an error), stochastic environments add
// isotropic or all-ones-direction Gaussian noise to theta, clipping if asked.
LossDraw sample_loss(const Game& game, const Environment& env, std::uint64_t t,
                     const CounterRng& rng);

}  // namespace linpm
