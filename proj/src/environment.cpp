#include "linpm/environment.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "linpm/errors.hpp"
#include "linpm/matrix_utils.hpp"
#include "linpm/observability.hpp"

namespace linpm {

Eigen::VectorXd clip_loss(const Eigen::VectorXd& loss, const LossSpace& space, bool* clipped) {
  if (!loss.allFinite()) throw InvalidInputError("clip_loss: non-finite loss");
  if (clipped != nullptr) *clipped = false;
  switch (space.kind) {
    case LossSpace::Kind::kLpBall: {
      const double norm = std::isinf(space.p)
                              ? loss.lpNorm<Eigen::Infinity>()
                              : (space.p == 1.0
                                     ? loss.lpNorm<1>()
                                     : std::pow(loss.array().abs().pow(space.p).sum(),
                                                1.0 / space.p));
      if (norm <= space.radius) return loss;
      if (clipped != nullptr) *clipped = true;
      return loss * (space.radius / norm);
    }
    case LossSpace::Kind::kUnitBox01: {
      Eigen::VectorXd out = loss.cwiseMax(0.0).cwiseMin(1.0);
      if (clipped != nullptr) *clipped = (out - loss).lpNorm<Eigen::Infinity>() > 0.0;
      return out;
    }
    case LossSpace::Kind::kPolarOfFeatures:
      throw InvalidInputError("clip_loss: no projection is defined for polar loss spaces");
  }
  throw InvalidInputError("clip_loss: unknown loss space");
}

namespace {

// Component of x orthogonal to the column space of basis (an orthonormal matrix).
Eigen::VectorXd orthogonal_component(const Eigen::VectorXd& x, const Eigen::MatrixXd& basis) {
  if (basis.cols() == 0) return x;
  return x - basis * (basis.transpose() * x);
}

// Orthonormal basis of the observations of a subset of actions.
Eigen::MatrixXd subset_observation_basis(const Game& game, const std::vector<int>& actions) {
  int cols = 0;
  for (int a : actions) cols += static_cast<int>(game.observations[static_cast<size_t>(a)].cols());
  Eigen::MatrixXd stacked(game.d, cols);
  int offset = 0;
  for (int a : actions) {
    const auto& m = game.observations[static_cast<size_t>(a)];
    stacked.middleCols(offset, m.cols()) = m;
    offset += static_cast<int>(m.cols());
  }
  return orthonormal_basis(stacked);
}

// A unit vector orthogonal to diff, or empty when d == 1.
Eigen::VectorXd hyperplane_direction(const Eigen::VectorXd& diff) {
  const int d = static_cast<int>(diff.size());
  if (d <= 1) return Eigen::VectorXd();
  int smallest = 0;
  for (int i = 1; i < d; ++i) {
    if (std::abs(diff(i)) < std::abs(diff(smallest))) smallest = i;
  }
  Eigen::VectorXd u = Eigen::VectorXd::Unit(d, smallest);
  const double scale = diff.squaredNorm();
  if (scale > 0.0) u -= (diff(smallest) / scale) * diff;
  const double norm = u.norm();
  if (norm < 1e-12) return Eigen::VectorXd();
  return u / norm;
}

}  // namespace

HardPair neighbor_hard_pair(const Game& game, HardKind kind, double delta, std::uint64_t seed) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw InvalidInputError("neighbor_hard_pair: delta must lie in (0, 1]");
  }
  const double r = inscribed_l2_radius(game);  // throws for non-centered spaces

  const ObservabilityReport report = classify(game);
  struct Candidate {
    int a, b;
    Eigen::VectorXd v;
    std::vector<int> neighborhood;
  };
  std::vector<Candidate> candidates;
  for (const PairWitness& w : report.witnesses) {
    if (!w.neighbors) continue;
    const Eigen::VectorXd diff =
        game.features[static_cast<size_t>(w.a)] - game.features[static_cast<size_t>(w.b)];
    if (diff.norm() == 0.0) continue;
    Eigen::VectorXd v;
    switch (kind) {
      case HardKind::kLocal:
        v = diff;
        break;
      case HardKind::kGlobal:
        v = orthogonal_component(diff, subset_observation_basis(game, w.neighborhood));
        break;
      case HardKind::kHopeless:
        v = orthogonal_component(diff, game.observation_basis);
        break;
    }
    if (kind != HardKind::kLocal && v.norm() <= kSpanResidual * diff.norm()) continue;
    candidates.push_back({w.a, w.b, v, w.neighborhood});
  }
  if (candidates.empty()) {
    throw NoWitnessError("neighbor_hard_pair: no neighbor pair of the requested kind exists");
  }

  const CounterRng rng = make_rng(seed, 0, RngStream::kInstanceSelection);
  const size_t pick = std::min(candidates.size() - 1,
                               static_cast<size_t>(rng.uniform(0) * candidates.size()));
  const Candidate& cand = candidates[pick];

  HardPair out;
  out.a = cand.a;
  out.b = cand.b;
  out.direction = cand.v;
  out.push = (r / (4.0 * cand.v.norm())) * cand.v;
  out.delta = delta;
  out.gap = delta * r * cand.v.norm() / 4.0;

  // Interior point of the shared cell facet, scaled onto the r/4 sphere (cells
  // are cones, so scaling preserves relative interiority).
  const CellInteriorPoint cell = cell_interior_point(game, cand.a, cand.b);
  Eigen::VectorXd theta = cell.loss;
  if (theta.norm() <= 1e-12) {
    // Degenerate facet program (no off-segment actions): any direction in the
    // tie hyperplane of the pair works.
    const Eigen::VectorXd diff =
        game.features[static_cast<size_t>(cand.a)] - game.features[static_cast<size_t>(cand.b)];
    theta = hyperplane_direction(diff);
    if (theta.size() == 0) theta = Eigen::VectorXd::Zero(game.d);
  }
  if (theta.norm() > 1e-12) theta *= (r / 4.0) / theta.norm();
  out.theta = theta;
  out.theta_a = theta - delta * out.push;
  out.theta_b = theta + delta * out.push;

  // Measured optimality slack of theta over actions off the pair's segment.
  for (int c : report.pareto_representatives) {
    if (std::find(cand.neighborhood.begin(), cand.neighborhood.end(), c) !=
        cand.neighborhood.end()) {
      continue;
    }
    const double slack = (game.features[static_cast<size_t>(c)] -
                          game.features[static_cast<size_t>(cand.a)])
                             .dot(theta);
    out.margin = std::min(out.margin, slack);
  }
  return out;
}

IllConditionedFamily ill_conditioned_family(int k, double epsilon, double delta) {
  if (k < 1) throw InvalidInputError("ill_conditioned_family: k must be positive");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw InvalidInputError("ill_conditioned_family: epsilon must lie in (0, 1]");
  }
  if (!(delta > 0.0 && delta <= 0.25)) {
    throw InvalidInputError("ill_conditioned_family: delta must lie in (0, 1/4]");
  }
  IllConditionedFamily out;
  out.epsilon = epsilon;
  out.delta = delta;
  out.theta_0 = Eigen::VectorXd::Constant(k, 0.5);
  const double lift = 0.5 + delta * (1.0 - epsilon) / k;
  for (int a = 0; a < k; ++a) {
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(k, lift);
    theta(a) -= delta;
    out.thetas.push_back(theta);
  }
  return out;
}

Environment Environment::fixed_sequence(const Game& game, std::vector<Eigen::VectorXd> losses,
                                        std::string name) {
  if (losses.empty()) throw InvalidInputError("fixed_sequence: empty loss list");
  for (const auto& loss : losses) {
    if (loss.size() != game.d) throw InvalidInputError("fixed_sequence: loss dimension mismatch");
    if (!loss_space_contains(game, loss, 1e-9)) {
      throw InvalidInputError("fixed_sequence: loss outside the loss space");
    }
  }
  Environment env;
  env.kind = Kind::kFixedSequence;
  env.sequence = std::move(losses);
  env.name = std::move(name);
  return env;
}

Environment Environment::stochastic(const Game& game, Eigen::VectorXd theta, double sigma,
                                    NoiseShape shape, bool clip, std::string name) {
  if (theta.size() != game.d) throw InvalidInputError("stochastic: theta dimension mismatch");
  if (!theta.allFinite()) throw InvalidInputError("stochastic: non-finite theta");
  if (sigma < 0.0) throw InvalidInputError("stochastic: sigma must be nonnegative");
  // The mean must be a legal loss vector itself: otherwise clipping would
  // silently bias the draws and the mean costs x_a' theta lose their meaning.
  if (!loss_space_contains(game, theta, 1e-9)) {
    throw InvalidInputError("stochastic: theta lies outside the loss space");
  }
  Environment env;
  env.kind = Kind::kStochasticParam;
  env.theta = std::move(theta);
  env.sigma = sigma;
  env.noise_shape = shape;
  env.clip = clip;
  env.name = std::move(name);
  return env;
}

LossDraw sample_loss(const Game& game, const Environment& env, std::uint64_t t,
                     const CounterRng& rng) {
  LossDraw out;
  switch (env.kind) {
    case Environment::Kind::kFixedSequence: {
      if (t >= env.sequence.size()) {
        throw InvalidInputError("sample_loss: round beyond the fixed sequence length");
      }
      out.loss = env.sequence[t];
      return out;
    }
    case Environment::Kind::kStochasticParam: {
      Eigen::VectorXd loss = env.theta;
      if (env.sigma > 0.0) {
        if (env.noise_shape == Environment::NoiseShape::kIsotropic) {
          const std::uint64_t base = t * static_cast<std::uint64_t>(game.d);
          for (int i = 0; i < game.d; ++i) {
            loss(i) += env.sigma * rng.gaussian(base + static_cast<std::uint64_t>(i));
          }
        } else {
          loss.array() += env.sigma * rng.gaussian(t);
        }
      }
      if (env.clip) loss = clip_loss(loss, game.loss_space, &out.clipped);
      out.loss = loss;
      return out;
    }
  }
  throw InvalidInputError("sample_loss: unknown environment kind");
}

}  // namespace linpm
