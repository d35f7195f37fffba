#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "linpm/environment.hpp"
#include "linpm/game.hpp"
#include "linpm/learner.hpp"

namespace linpm {

struct TraceRow {
  int t = 0;               // 1-based round index
  int action = 0;
  double realized_loss = 0.0;  // x_{A_t}' l_t
  double eta = 0.0;
  double v = 0.0;              // positive part of the round's objective value
  int solver_iterations = 0;
  bool violation = false;      // estimate exceeded the stability envelope
  bool clipped = false;        // environment clipped this round's loss
};

// Online audit of the exponential-weights regret inequality
//   sum_t <q_t - e_{a*}, y_t>  <=  log(k*) / eta_final + sum_t eta_t <q_t, y_t^2>
// over every candidate a* in the weight support (k* = support size; eta_final
// is the post-horizon learning rate, which equals eta throughout for fixed
// rates).  Valid whenever the rates are nonincreasing and eta_t y_t(a) >= -1.
struct AuditResult {
  double worst_slack = 0.0;  // min over a* of RHS - LHS; negative = violated
  double bound = 0.0;        // RHS of the inequality
  int violations = 0;        // rounds where eta |y_hat| exceeded one
  int rounds = 0;
};

struct Trace {
  std::vector<TraceRow> rows;
  Eigen::VectorXd action_loss_totals;  // per action: sum_t x_a' l_t
  Eigen::VectorXd action_counts;       // per action: number of plays
  Eigen::VectorXd theta;               // stochastic mean parameter (empty otherwise)
  Eigen::VectorXd action_mean_costs;   // per action: x_a' theta (stochastic only)
  double realized_loss_total = 0.0;    // sum_t x_{A_t}' l_t
  double pseudo_loss_total = 0.0;      // sum_t x_{A_t}' theta (stochastic only)
  AuditResult audit;
  std::string game_name;
  std::string env_name;
  std::string eta_mode;  // "adaptive" or the fixed rate's decimal form
  int horizon = 0;
  std::uint64_t seed = 0;
};

// Full interaction loop: deterministic in (game, config, env, T, seed, run).
// An infeasible learning rate surfaces from the first round's program before
// any action is played.
Trace run(const Game& game, const LearnerConfig& config, const Environment& env, int horizon,
          std::uint64_t seed, std::uint64_t run_index = 0);

// Realized regret: total incurred loss minus the best fixed action's total.
double realized_regret(const Trace& trace);

// Expected regret against the stochastic mean parameter; absent for
// fixed-sequence environments.
std::optional<double> pseudo_regret(const Trace& trace);

// Writes one row per round; columns t, action, loss, eta, v, solver_iters,
// violation, clipped.
void write_trace_csv(const Trace& trace, const std::string& path);

// --- horizon sweeps ----------------------------------------------------------------

struct SweepPoint {
  int horizon = 0;
  int repeat = 0;
  std::uint64_t seed = 0;
  double regret = 0.0;
  double pseudo = 0.0;
  bool has_pseudo = false;
  int violations = 0;
  double audit_slack = 0.0;
  bool failed = false;
  std::string error;
};

struct SweepHorizon {
  int horizon = 0;
  int completed = 0;
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  double mean_pseudo = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;      // ordered by (horizon, repeat)
  std::vector<SweepHorizon> horizons;
  double slope = 0.0;            // least-squares slope of log mean regret vs log T
  double slope_half_width = 0.0; // two standard errors of the fitted slope
  bool degenerate = false;       // slope meaningless (nonpositive means or failures)
  double worst_audit_slack = 0.0;
  long total_violations = 0;
  long total_rounds = 0;
};

// Runs (horizon x repeat) games concurrently; repeat r at every horizon shares
// the random-number key (seed, r), so horizons see common random draws.  The
// environment may depend on the horizon (hard instances are typically scaled
// to it).  Requires >= 3 horizons and >= 5 repeats.  Individual failures are
// recorded per point and mark the result degenerate.
SweepResult sweep(const Game& game, const LearnerConfig& config,
                  const std::function<Environment(int horizon, int repeat)>& environments,
                  const std::vector<int>& horizons, int repeats, std::uint64_t seed,
                  int threads = 0);

// --- CLI-facing plumbing --------------------------------------------------------------

// Builds an environment from a compact spec string:
//   zero | theta:v1,v2,...[:sigma] | fixed:<json path>
//   hard_local[:delta|auto[:sigma]] | hard_global[:delta|auto[:sigma]]
//   hard_hopeless[:delta|auto[:sigma]] | ill:<arm>[:delta[:sigma]]
// "auto" scales the separation with the horizon: T^{-1/2} for hard_local,
// T^{-1/3} for hard_global and hard_hopeless.
Environment environment_from_spec(const Game& game, const std::string& spec, int horizon,
                                  std::uint64_t seed);

// CSV rows of a sweep: game, class, eta_mode, T, seed, regret, pseudo_regret,
// violations.
void write_sweep_csv(const SweepResult& result, const Game& game, const std::string& verdict,
                     const std::string& eta_mode, const std::string& path);

// JSON summary of a sweep (horizon statistics, fitted slope, audit totals).
std::string sweep_summary_json(const SweepResult& result, const Game& game,
                               const std::string& verdict, const std::string& eta_mode);

}  // namespace linpm
