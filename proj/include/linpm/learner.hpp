#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "linpm/exploration.hpp"
#include "linpm/game.hpp"
#include "linpm/matrix_utils.hpp"

namespace linpm {

// Exponential weights over a restricted support: q(a) proportional to
// exp(-eta * cumulative(a)) for a in support, zero elsewhere.  The largest
// weight is normalized to one before exponentiation for stability.
Simplex exp_weights(const Eigen::VectorXd& cumulative, double eta, const std::vector<int>& support,
                    int k);

// One-round loss estimates: y(a) = (x_a - Hq)' Q(p)^+ M_A signal, where p is
// the (already mixed, full-support) play distribution and A the played action.
Eigen::VectorXd estimate_losses(const Game& game, const Simplex& q, const Simplex& p, int action,
                                const Eigen::VectorXd& signal);

// Default scale parameter: a computable upper bound on how large the
// one-round estimates can get relative to the information played for,
// floored at one.
double default_scale(const Game& game);

// Smallest learning-rate cap 1/B under which the per-round optimization value
// admits its class-dependent bound: the feasibility thresholds of the
// locally- and globally-observable value theorems.  Throws NoWitnessError for
// games with no such guarantee (hopeless observability).
double adaptive_cap(const Game& game, double L);

struct LearnerConfig {
  double eta = 0.1;      // fixed learning rate (ignored when adaptive)
  bool adaptive = false; // online learning-rate schedule
  double delta = 0.01;   // stability mixing toward uniform, in (0, 1/2]
  double L = 0.0;        // scale parameter; <= 0 resolves to default_scale
  double B = 0.0;        // adaptive cap; <= 0 resolves to adaptive_cap (with a
                         // feasibility-based fallback when no bound exists)
  ExplorationOptions solver;  // per-round exploration program options
  bool reuse_solution = true; // warm-start each round at the previous solution
};

// One round's play plan: everything decided before the action is drawn.
struct RoundPlan {
  Simplex q;        // exponential-weights distribution over Pareto actions
  Simplex p_tilde;  // exploration program solution
  Simplex p;        // delta-mixed play distribution
  double eta = 0.0;
  double phi_value = 0.0;  // worst-case objective at p_tilde
  double z = 0.0;          // stability statistic at p_tilde
  int solver_iterations = 0;
};

// What the round's feedback produced.
struct RoundOutcome {
  Eigen::VectorXd y_hat;           // loss estimates, one per action
  double v = 0.0;                  // positive part of the round's objective value
  bool stability_violated = false; // eta * max |y_hat| exceeded one
};

// Anchored exploration-by-optimization learner.  plan() computes the round's
// distributions, the caller draws an action from plan.p and feeds the observed
// signal to observe(), which updates the estimate totals and (in adaptive
// mode) the learning rate.
class Learner {
 public:
  Learner(Game game, LearnerConfig config);

  const Game& game() const { return game_; }
  const LearnerConfig& config() const { return config_; }
  double current_eta() const { return eta_; }
  double scale() const { return scale_; }
  double cap() const { return cap_; }
  const std::vector<int>& pareto_support() const { return pareto_; }
  const Eigen::VectorXd& cumulative_estimates() const { return cum_; }

  RoundPlan plan();

  // Inverse-CDF draw from the plan's play distribution.
  static int sample(const RoundPlan& plan, double uniform01);

  RoundOutcome observe(const RoundPlan& plan, int action, const Eigen::VectorXd& signal);

 private:
  Game game_;
  LearnerConfig config_;
  std::vector<int> pareto_;
  Eigen::VectorXd cum_;
  double scale_ = 1.0;
  double cap_ = 1.0;
  double eta_ = 0.0;
  double v_sum_ = 0.0;
  std::optional<Simplex> warm_;
};

}  // namespace linpm
