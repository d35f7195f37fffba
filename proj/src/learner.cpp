#include "linpm/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linpm/constants.hpp"
#include "linpm/design.hpp"
#include "linpm/errors.hpp"
#include "linpm/observability.hpp"

namespace linpm {

namespace {

// Exponential weights run over one representative per distinct Pareto feature;
// duplicates would only split weight without changing any play distribution.
std::vector<int> pareto_representatives(const Game& game) {
  const std::vector<int> pareto = pareto_actions(game);
  std::vector<int> reps;
  for (const auto& group : duplicate_feature_groups(game)) {
    if (std::binary_search(pareto.begin(), pareto.end(), group.front())) {
      reps.push_back(group.front());
    }
  }
  return reps;
}

}  // namespace

Simplex exp_weights(const Eigen::VectorXd& cumulative, double eta, const std::vector<int>& support,
                    int k) {
  if (support.empty()) throw InvalidInputError("exp_weights: empty support");
  if (cumulative.size() != k) throw InvalidInputError("exp_weights: cumulative length mismatch");
  double lowest = std::numeric_limits<double>::infinity();
  for (int a : support) {
    if (a < 0 || a >= k) throw InvalidInputError("exp_weights: support index out of range");
    lowest = std::min(lowest, cumulative(a));
  }
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(k);
  double total = 0.0;
  for (int a : support) {
    const double w = std::exp(-eta * (cumulative(a) - lowest));
    weights(a) = w;
    total += w;
  }
  return Simplex(weights / total);
}

Eigen::VectorXd estimate_losses(const Game& game, const Simplex& q, const Simplex& p, int action,
                                const Eigen::VectorXd& signal) {
  if (action < 0 || action >= game.k) throw InvalidInputError("estimate_losses: bad action");
  const Eigen::MatrixXd& m = game.observations[static_cast<size_t>(action)];
  if (signal.size() != m.cols()) throw InvalidInputError("estimate_losses: signal length mismatch");
  const Eigen::MatrixXd qdag = q_dagger(game, p, 0.0);
  const Eigen::VectorXd loss_estimate = qdag * (m * signal);
  const Eigen::VectorXd anchor = game.feature_matrix * q.vec();
  Eigen::VectorXd y(game.k);
  for (int a = 0; a < game.k; ++a) {
    y(a) = (game.features[static_cast<size_t>(a)] - anchor).dot(loss_estimate);
  }
  return y;
}

double default_scale(const Game& game) { return std::max(1.0, omega_bound(game)); }

double adaptive_cap(const Game& game, double L) {
  const ObservabilityReport report = classify(game);
  if (report.verdict == Observability::kHopeless) {
    throw NoWitnessError("adaptive_cap: no learning-rate threshold exists for this game");
  }
  const double rank = static_cast<double>(game.observation_rank);
  const SubsetSearchMode mode =
      game.k <= kExhaustiveSubsetLimit ? SubsetSearchMode::kExhaustive : SubsetSearchMode::kGreedy;

  double bglo = 0.0;
  double b2glo = 0.0;
  try {
    bglo = beta_glo(game);
    b2glo = beta_2_glo(game);
  } catch (const NoWitnessError&) {
    if (report.verdict == Observability::kTrivial) return 1.0;
    throw;
  }
  const double w = std::min(rank, w_star(game, mode).value);

  if (report.verdict == Observability::kLocallyObservable ||
      report.verdict == Observability::kTrivial) {
    return 2.0 * L * (1.0 + bglo * bglo) * w;
  }
  const double u = u_star(game, mode).value;
  const double inner = std::min((1.0 + bglo * bglo) * w, (1.0 + b2glo * b2glo) * u);
  return std::max(1.0, (1.0 + L * L) * inner);
}

Learner::Learner(Game game, LearnerConfig config)
    : game_(std::move(game)),
      config_(config),
      pareto_(pareto_representatives(game_)),
      cum_(Eigen::VectorXd::Zero(game_.k)) {
  if (config_.delta <= 0.0 || config_.delta > 0.5) {
    throw InvalidInputError("learner: delta must lie in (0, 1/2]");
  }
  scale_ = config_.L > 0.0 ? config_.L : default_scale(game_);
  if (config_.adaptive) {
    if (config_.B > 0.0) {
      cap_ = config_.B;
    } else {
      try {
        cap_ = adaptive_cap(game_, scale_);
      } catch (const NoWitnessError&) {
        // No class guarantee; cap at the rate that keeps the most uniform
        // designs feasible.
        const OptimalDesign design = optimal_design(game_, 1e-3, 2000);
        cap_ = std::max(1.0, scale_ * z_value(game_, design.pi, config_.delta) / 2.0);
      }
    }
    eta_ = std::min(1.0 / cap_, std::sqrt(std::log(std::max(2, game_.k))));
  } else {
    if (config_.eta <= 0.0) throw InvalidInputError("learner: fixed eta must be positive");
    eta_ = config_.eta;
  }
}

RoundPlan Learner::plan() {
  const Simplex q = exp_weights(cum_, eta_, pareto_, game_.k);
  if (game_.k == 1) {
    const Simplex p = Simplex::point_mass(1, 0);
    RoundPlan out{q, p, p, eta_, 0.0, z_value(game_, p, config_.delta), 0};
    return out;
  }
  ExplorationOptions options = config_.solver;
  if (config_.reuse_solution && warm_.has_value()) options.warm_start = warm_;
  const ExplorationSolution sol = solve_exploration(game_, q, eta_, scale_, config_.delta, options);
  if (config_.reuse_solution) warm_ = sol.p;
  RoundPlan out{q,
                sol.p,
                sol.p.mix_uniform(config_.delta),
                eta_,
                sol.phi_value,
                sol.z,
                sol.iterations};
  return out;
}

int Learner::sample(const RoundPlan& plan, double uniform01) {
  double acc = 0.0;
  const int k = plan.p.size();
  for (int a = 0; a < k; ++a) {
    acc += plan.p(a);
    if (uniform01 < acc) return a;
  }
  return k - 1;
}

RoundOutcome Learner::observe(const RoundPlan& plan, int action, const Eigen::VectorXd& signal) {
  RoundOutcome out;
  out.y_hat = estimate_losses(game_, plan.q, plan.p, action, signal);
  out.stability_violated =
      plan.eta * out.y_hat.lpNorm<Eigen::Infinity>() > 1.0 + 1e-12;
  out.v = std::max(0.0, plan.phi_value);
  cum_ += out.y_hat;
  if (config_.adaptive) {
    v_sum_ += out.v;
    eta_ = std::min(1.0 / cap_,
                    std::sqrt(std::log(std::max(2, game_.k)) / (1.0 + v_sum_)));
  }
  return out;
}

}  // namespace linpm
