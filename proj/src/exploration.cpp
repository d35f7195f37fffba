#include "linpm/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "linpm/errors.hpp"
#include "linpm/rng.hpp"

namespace linpm {

namespace {

// Distinct-feature representatives; pairs of identical features carry zero energy.
std::vector<int> feature_reps(const Game& game) {
  std::vector<int> reps;
  for (const auto& group : duplicate_feature_groups(game)) reps.push_back(group.front());
  return reps;
}

struct Evaluation {
  double linear = 0.0;   // transfer term (support value or fixed inner product) / eta
  double quad = 0.0;     // anchored variance term
  double z = 0.0;
  Eigen::VectorXd grad_objective;  // subgradient of linear + quad
  Eigen::VectorXd grad_z;
};

// Evaluates the exploration objective, the stability statistic, and
// subgradients of both at p.  A fixed loss replaces the support function when
// provided (the inner minimization of the two-sided certificate).
Evaluation evaluate(const Game& game, const Simplex& p, const Simplex& q, double eta, double L,
                    double delta, const std::vector<int>& reps,
                    const Eigen::VectorXd* fixed_loss) {
  const int k = game.k;
  const double shrink = 1.0 - delta;
  Evaluation out;
  out.grad_objective = Eigen::VectorXd::Zero(k);
  out.grad_z = Eigen::VectorXd::Zero(k);

  const Eigen::MatrixXd qdag = q_dagger(game, p, delta);

  // Transfer term.
  const Eigen::VectorXd drift = game.feature_matrix * (p.vec() - q.vec());
  if (fixed_loss != nullptr) {
    out.linear = drift.dot(*fixed_loss) / eta;
    out.grad_objective = game.feature_matrix.transpose() * *fixed_loss / eta;
  } else {
    const SupportEval support = support_function(game, drift);
    out.linear = support.value / eta;
    out.grad_objective = game.feature_matrix.transpose() * support.maximizer / eta;
  }

  // Anchored variance term and its gradient.
  const Eigen::VectorXd anchor = game.feature_matrix * q.vec();
  std::vector<Eigen::VectorXd> pulls;  // qdag (x_a - anchor), weighted below
  std::vector<double> weights;
  double quad = 0.0;
  for (int a = 0; a < k; ++a) {
    if (q(a) <= 0.0) continue;
    const Eigen::VectorXd y = game.features[static_cast<size_t>(a)] - anchor;
    const Eigen::VectorXd v = qdag * y;
    quad += q(a) * y.dot(v);
    pulls.push_back(v);
    weights.push_back(q(a));
  }
  out.quad = 2.0 * L * L * quad;
  for (int c = 0; c < k; ++c) {
    const Eigen::MatrixXd& m = game.observations[static_cast<size_t>(c)];
    double s = 0.0;
    for (size_t i = 0; i < pulls.size(); ++i) {
      s += weights[i] * (m.transpose() * pulls[i]).squaredNorm();
    }
    out.grad_objective(c) -= 2.0 * L * L * shrink * s;
  }

  // Stability statistic: worst pairwise energy plus worst observation leverage.
  double best_energy = 0.0;
  Eigen::VectorXd best_pull;  // qdag (x_a - x_b) at the maximizing pair
  for (size_t i = 0; i < reps.size(); ++i) {
    for (size_t j = i + 1; j < reps.size(); ++j) {
      const Eigen::VectorXd diff = game.features[static_cast<size_t>(reps[i])] -
                                   game.features[static_cast<size_t>(reps[j])];
      const Eigen::VectorXd v = qdag * diff;
      const double e = diff.dot(v);
      if (e > best_energy) {
        best_energy = e;
        best_pull = v;
      }
    }
  }
  double best_leverage = 0.0;
  Eigen::VectorXd leverage_pull;  // qdag M_c v at the maximizing (c, eigvec v)
  for (int c = 0; c < k; ++c) {
    const Eigen::MatrixXd& m = game.observations[static_cast<size_t>(c)];
    const Eigen::MatrixXd s = m.transpose() * qdag * m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    const int top = static_cast<int>(s.rows()) - 1;
    if (eig.eigenvalues()(top) > best_leverage) {
      best_leverage = eig.eigenvalues()(top);
      leverage_pull = qdag * (m * eig.eigenvectors().col(top));
    }
  }
  out.z = best_energy + best_leverage;
  for (int c = 0; c < k; ++c) {
    const Eigen::MatrixXd& m = game.observations[static_cast<size_t>(c)];
    double g = 0.0;
    if (best_pull.size() > 0) g += (m.transpose() * best_pull).squaredNorm();
    if (leverage_pull.size() > 0) g += (m.transpose() * leverage_pull).squaredNorm();
    out.grad_z(c) -= shrink * g;
  }
  return out;
}

// Retreat toward uniform until the design is invertible, then evaluate.
Evaluation safe_evaluate(const Game& game, Simplex& p, const Simplex& q, double eta, double L,
                         double delta, const std::vector<int>& reps,
                         const Eigen::VectorXd* fixed_loss) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    try {
      return evaluate(game, p, q, eta, L, delta, reps, fixed_loss);
    } catch (const IllConditionedError&) {
      p = p.mix_uniform(1.0 / 64.0);
    }
  }
  throw IllConditionedError("solve_exploration: design stays singular near the iterate");
}

struct Incumbent {
  explicit Incumbent(const Simplex& start) : p(start) {}
  Simplex p;
  double objective = std::numeric_limits<double>::infinity();
  double z = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

// Shared constrained minimizer for phi (fixed_loss == nullptr) and for the
// fixed-loss objective of the two-sided certificate.
ExplorationSolution solve_constrained(const Game& game, const Simplex& q, double eta, double L,
                                      double delta, const ExplorationOptions& options,
                                      const Eigen::VectorXd* fixed_loss) {
  if (eta <= 0.0 || L <= 0.0) throw InvalidInputError("solve_exploration: eta and L must be positive");
  if (delta < 0.0 || delta > 0.5) throw InvalidInputError("solve_exploration: delta outside [0, 1/2]");
  if (q.size() != game.k) throw InvalidInputError("solve_exploration: q has the wrong length");
  const double limit = 2.0 / (eta * L);
  const std::vector<int> reps = feature_reps(game);

  ExplorationSolution out{Simplex::uniform(game.k), 0.0, 0.0, 0, false};
  if (game.k == 1) {
    Simplex p = Simplex::point_mass(1, 0);
    const Evaluation e = safe_evaluate(game, p, q, eta, L, delta, reps, fixed_loss);
    if (e.z > limit + options.z_slack) {
      throw EtaTooLargeError("solve_exploration: single-action stability exceeds the limit", e.z);
    }
    out.p = p;
    out.phi_value = e.linear + e.quad;
    out.z = e.z;
    return out;
  }

  // Starting points: warm start if provided, plus uniform as the safe anchor.
  Simplex uniform = Simplex::uniform(game.k);
  Evaluation eval_uniform = safe_evaluate(game, uniform, q, eta, L, delta, reps, fixed_loss);
  Simplex p = options.warm_start.value_or(uniform);
  if (p.size() != game.k) throw InvalidInputError("solve_exploration: warm start has the wrong length");
  Evaluation eval = safe_evaluate(game, p, q, eta, L, delta, reps, fixed_loss);

  // Safe anchor: the most stable point seen anywhere (used to polish feasibility).
  Simplex anchor = eval_uniform.z <= eval.z ? uniform : p;
  double anchor_z = std::min(eval_uniform.z, eval.z);

  // Feasibility probe: descend on z alone when both starts violate the limit.
  if (anchor_z > limit + options.z_slack) {
    Simplex probe = anchor;
    for (int t = 1; t <= 400; ++t) {
      Evaluation e = safe_evaluate(game, probe, q, eta, L, delta, reps, fixed_loss);
      if (e.z < anchor_z) {
        anchor_z = e.z;
        anchor = probe;
      }
      if (anchor_z <= limit) break;
      const double norm = e.grad_z.norm();
      if (norm < 1e-15) break;
      probe = Simplex::project(probe.vec() - (0.5 / std::sqrt(static_cast<double>(t))) *
                                                 e.grad_z / norm);
    }
    if (anchor_z > limit + options.z_slack) {
      throw EtaTooLargeError(
          "solve_exploration: no distribution satisfies the stability constraint at this "
          "learning rate",
          anchor_z);
    }
  }

  Incumbent best(p);
  const auto consider = [&](const Simplex& cand, const Evaluation& e) {
    const bool feasible = e.z <= limit + options.z_slack;
    const double objective = e.linear + e.quad;
    if ((feasible && (!best.feasible || objective < best.objective)) ||
        (!feasible && !best.feasible && e.z < best.z)) {
      best.p = cand;
      best.objective = objective;
      best.z = e.z;
      best.feasible = feasible;
    }
    if (e.z < anchor_z) {
      anchor_z = e.z;
      anchor = cand;
    }
  };
  consider(p, eval);
  consider(uniform, eval_uniform);

  // Exact-penalty projected subgradient with a doubling penalty weight and a
  // coarse-to-fine step schedule.
  const std::vector<double> step_scales = {0.5, 0.1, 0.02, 0.004};
  const int phase_iters =
      std::max(1, options.max_iters / static_cast<int>(step_scales.size()));
  double last_tracked = std::numeric_limits<double>::infinity();
  int since_improvement = 0;
  int total_iters = 0;
  double rho = 4.0 * (1.0 + std::abs(best.objective)) / std::max(limit, 1e-12);
  bool stop = false;

  for (int round = 0; round < 8 && !stop; ++round) {
    Simplex cur = best.feasible ? best.p : anchor;
    for (double scale : step_scales) {
      for (int t = 1; t <= phase_iters; ++t) {
        ++total_iters;
        Evaluation e = safe_evaluate(game, cur, q, eta, L, delta, reps, fixed_loss);
        consider(cur, e);

        if (options.early_stop_tol > 0.0 && best.feasible) {
          if (best.objective < last_tracked - options.early_stop_tol) {
            last_tracked = best.objective;
            since_improvement = 0;
          } else if (++since_improvement >= options.early_stop_window) {
            stop = true;
            break;
          }
        }

        Eigen::VectorXd grad = e.grad_objective;
        if (e.z > limit) grad += rho * e.grad_z;
        const double norm = grad.norm();
        if (norm < 1e-15) {
          stop = true;
          break;
        }
        cur = Simplex::project(cur.vec() - (scale / std::sqrt(static_cast<double>(t))) *
                                               grad / norm);
      }
      if (stop) break;
    }
    if (best.feasible) break;
    rho *= 4.0;
  }

  // Feasibility polish: slide the incumbent toward the stable anchor until the
  // constraint holds (the feasible set is convex, so a crossing point exists).
  Simplex final_p = best.p;
  Evaluation final_eval = safe_evaluate(game, final_p, q, eta, L, delta, reps, fixed_loss);
  if (final_eval.z > limit && anchor_z <= limit) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 40; ++i) {
      const double mid = 0.5 * (lo + hi);
      Simplex cand(((1.0 - mid) * final_p.vec() + mid * anchor.vec()).eval());
      const Evaluation e = safe_evaluate(game, cand, q, eta, L, delta, reps, fixed_loss);
      if (e.z <= limit) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    Simplex cand(((1.0 - hi) * final_p.vec() + hi * anchor.vec()).eval());
    final_p = cand;
    final_eval = safe_evaluate(game, final_p, q, eta, L, delta, reps, fixed_loss);
  }
  if (final_eval.z > limit + options.z_slack) {
    throw EtaTooLargeError("solve_exploration: could not certify a stable distribution",
                           final_eval.z);
  }

  out.p = final_p;
  out.phi_value = final_eval.linear + final_eval.quad;
  out.z = final_eval.z;
  out.iterations = total_iters;
  out.constraint_active = final_eval.z >= limit - 1e-3 * std::max(limit, 1.0);
  return out;
}

}  // namespace

double energy(const Game& game, int a, int b, const Simplex& p, double delta) {
  if (a < 0 || a >= game.k || b < 0 || b >= game.k) {
    throw InvalidInputError("energy: action index out of range");
  }
  const Eigen::MatrixXd qdag = q_dagger(game, p, delta);
  const Eigen::VectorXd diff =
      game.features[static_cast<size_t>(a)] - game.features[static_cast<size_t>(b)];
  return diff.dot(qdag * diff);
}

double max_energy(const Game& game, const Simplex& p, double delta) {
  const Eigen::MatrixXd qdag = q_dagger(game, p, delta);
  const std::vector<int> reps = feature_reps(game);
  double best = 0.0;
  for (size_t i = 0; i < reps.size(); ++i) {
    for (size_t j = i + 1; j < reps.size(); ++j) {
      const Eigen::VectorXd diff = game.features[static_cast<size_t>(reps[i])] -
                                   game.features[static_cast<size_t>(reps[j])];
      best = std::max(best, diff.dot(qdag * diff));
    }
  }
  return best;
}

double z_value(const Game& game, const Simplex& p, double delta) {
  const Eigen::MatrixXd qdag = q_dagger(game, p, delta);
  double leverage = 0.0;
  for (int c = 0; c < game.k; ++c) {
    const Eigen::MatrixXd& m = game.observations[static_cast<size_t>(c)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.transpose() * qdag * m);
    leverage = std::max(leverage, eig.eigenvalues().maxCoeff());
  }
  return max_energy(game, p, delta) + leverage;
}

double phi(const Game& game, const Simplex& p, const Simplex& q, double eta, double L,
           double delta) {
  if (eta <= 0.0) throw InvalidInputError("phi: eta must be positive");
  const Eigen::VectorXd drift = game.feature_matrix * (p.vec() - q.vec());
  return support_function(game, drift).value / eta + phi_quadratic(game, p, q, L, delta);
}

double phi_quadratic(const Game& game, const Simplex& p, const Simplex& q, double L,
                     double delta) {
  const Eigen::MatrixXd qdag = q_dagger(game, p, delta);
  const Eigen::VectorXd anchor = game.feature_matrix * q.vec();
  double quad = 0.0;
  for (int a = 0; a < game.k; ++a) {
    if (q(a) <= 0.0) continue;
    const Eigen::VectorXd y = game.features[static_cast<size_t>(a)] - anchor;
    quad += q(a) * y.dot(qdag * y);
  }
  return 2.0 * L * L * quad;
}

ExplorationSolution solve_exploration(const Game& game, const Simplex& q, double eta, double L,
                                      double delta, const ExplorationOptions& options) {
  return solve_constrained(game, q, eta, L, delta, options, nullptr);
}

namespace {

// Candidate losses for the certificate's lower bound: extreme points where the
// space has few, boundary-scaled direction grids otherwise.
std::vector<Eigen::VectorXd> loss_grid(const Game& game, int grid, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> out;
  const int d = game.d;
  const LossSpace& space = game.loss_space;

  const auto scale_to_boundary = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    switch (space.kind) {
      case LossSpace::Kind::kLpBall: {
        const double norm = std::isinf(space.p)
                                ? u.lpNorm<Eigen::Infinity>()
                                : std::pow(u.array().abs().pow(space.p).sum(), 1.0 / space.p);
        return norm > 0.0 ? Eigen::VectorXd(space.radius * u / norm) : u;
      }
      case LossSpace::Kind::kPolarOfFeatures: {
        double worst = 0.0;
        for (const auto& x : game.features) worst = std::max(worst, std::abs(x.dot(u)));
        return worst > 0.0 ? Eigen::VectorXd(u / worst) : u;
      }
      case LossSpace::Kind::kUnitBox01:
        return u;  // handled by corners below
    }
    return u;
  };

  // Corners for box-shaped spaces (all extreme points when d is small).
  const bool box_like = (space.kind == LossSpace::Kind::kLpBall && std::isinf(space.p)) ||
                        space.kind == LossSpace::Kind::kUnitBox01;
  if (box_like && d <= 12) {
    const double lo = space.kind == LossSpace::Kind::kUnitBox01 ? 0.0 : -space.radius;
    const double hi = space.kind == LossSpace::Kind::kUnitBox01 ? 1.0 : space.radius;
    for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
      Eigen::VectorXd corner(d);
      for (int i = 0; i < d; ++i) corner(i) = (mask & (1u << i)) ? hi : lo;
      out.push_back(corner);
    }
  }

  if (space.kind != LossSpace::Kind::kUnitBox01) {
    if (d == 1) {
      Eigen::VectorXd u(1);
      u << 1.0;
      out.push_back(scale_to_boundary(u));
      out.push_back(scale_to_boundary(-u));
    } else if (d == 2) {
      for (int i = 0; i < grid; ++i) {
        const double theta = 2.0 * std::numbers::pi * i / grid;
        Eigen::VectorXd u(2);
        u << std::cos(theta), std::sin(theta);
        out.push_back(scale_to_boundary(u));
      }
    } else if (d == 3) {
      // Fibonacci sphere: near-uniform direction coverage.
      const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
      for (int i = 0; i < grid; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / grid;
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double theta = golden * i;
        Eigen::VectorXd u(3);
        u << r * std::cos(theta), y, r * std::sin(theta);
        out.push_back(scale_to_boundary(u));
      }
    } else {
      const CounterRng rng = make_rng(seed, 0, RngStream::kInstanceSelection);
      std::uint64_t counter = 0;
      for (int i = 0; i < grid; ++i) {
        Eigen::VectorXd u(d);
        for (int j = 0; j < d; ++j) u(j) = rng.gaussian(counter++);
        if (u.norm() < 1e-12) continue;
        out.push_back(scale_to_boundary(u));
      }
    }
  }
  return out;
}

}  // namespace

TwoSidedValue lambda_star_two_sided(const Game& game, const Simplex& q, double eta, double L,
                                    double delta, int grid, std::uint64_t seed) {
  ExplorationOptions outer;
  outer.max_iters = 4000;
  const ExplorationSolution top = solve_constrained(game, q, eta, L, delta, outer, nullptr);

  TwoSidedValue out;
  out.upper = top.phi_value;
  out.lower = -std::numeric_limits<double>::infinity();

  ExplorationOptions inner;
  inner.max_iters = 1200;
  inner.warm_start = top.p;
  const std::vector<Eigen::VectorXd> losses = loss_grid(game, grid, seed);
  out.grid_size = static_cast<int>(losses.size());
  for (const Eigen::VectorXd& loss : losses) {
    const ExplorationSolution sol =
        solve_constrained(game, q, eta, L, delta, inner, &loss);
    out.lower = std::max(out.lower, sol.phi_value);
  }
  if (losses.empty()) out.lower = 0.0;
  out.gap = (out.upper - out.lower) / std::max(std::abs(out.upper), 1e-12);
  return out;
}

}  // namespace linpm
