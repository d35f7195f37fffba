#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "linpm/environment.hpp"
#include "linpm/errors.hpp"
#include "linpm/game.hpp"
#include "linpm/observability.hpp"
#include "linpm/rng.hpp"

using namespace linpm;

TEST_CASE("clipping projects back into each loss space") {
  bool clipped = false;

  // Euclidean ball: radial scaling.
  const Eigen::Vector2d l2 = clip_loss(Eigen::Vector2d(3, 4), LossSpace::l2_ball(1.0), &clipped);
  CHECK(clipped);
  CHECK(l2.isApprox(Eigen::Vector2d(0.6, 0.8), 1e-12));

  // Sup-norm ball: radial scaling as well, preserving the direction.
  const Eigen::Vector2d linf =
      clip_loss(Eigen::Vector2d(2.0, -0.5), LossSpace::linf_ball(1.0), &clipped);
  CHECK(clipped);
  CHECK(linf.isApprox(Eigen::Vector2d(1.0, -0.25), 1e-12));

  // Unit box: coordinatewise clamping.
  const Eigen::Vector2d box =
      clip_loss(Eigen::Vector2d(1.5, -0.2), LossSpace::unit_box01(), &clipped);
  CHECK(clipped);
  CHECK(box.isApprox(Eigen::Vector2d(1.0, 0.0), 1e-12));

  // Members pass through untouched.
  const Eigen::Vector2d inside =
      clip_loss(Eigen::Vector2d(0.3, -0.4), LossSpace::l2_ball(1.0), &clipped);
  CHECK_FALSE(clipped);
  CHECK(inside == Eigen::Vector2d(0.3, -0.4));

  CHECK_THROWS_AS(clip_loss(Eigen::Vector2d(1, 1), LossSpace::polar_of_features()),
                  InvalidInputError);
}

TEST_CASE("local hard pairs realize the documented two-point geometry") {
  const Game g = make_standard_bandit(3);
  const double delta = 0.25;
  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
    const HardPair pair = neighbor_hard_pair(g, HardKind::kLocal, delta, seed);
    const Eigen::VectorXd diff =
        g.features[static_cast<size_t>(pair.a)] - g.features[static_cast<size_t>(pair.b)];

    // Push is the scaled pair direction; the two parameters sit symmetrically.
    CHECK(pair.direction.isApprox(diff, 1e-12));
    CHECK((pair.theta_a - (pair.theta - delta * pair.push)).norm() < 1e-12);
    CHECK((pair.theta_b - (pair.theta + delta * pair.push)).norm() < 1e-12);

    // Gap identity: |<x_a - x_b, theta_a - theta>| = Delta r ||v|| / 4.
    const double r = inscribed_l2_radius(g);
    CHECK(pair.gap ==
          doctest::Approx(delta * r * pair.direction.norm() / 4.0).epsilon(1e-10));
    CHECK(std::abs(diff.dot(pair.theta_a - pair.theta)) == doctest::Approx(pair.gap));

    // Both parameters stay inside the loss space: ||theta|| = r/4 and the push
    // adds at most r/4 more.
    CHECK(pair.theta.norm() == doctest::Approx(r / 4.0).epsilon(1e-10));
    CHECK(loss_space_contains(g, pair.theta_a, 1e-9));
    CHECK(loss_space_contains(g, pair.theta_b, 1e-9));

    // a is optimal under theta_a, b under theta_b.
    Eigen::VectorXd costs_a(g.k), costs_b(g.k);
    for (int c = 0; c < g.k; ++c) {
      costs_a(c) = g.features[static_cast<size_t>(c)].dot(pair.theta_a);
      costs_b(c) = g.features[static_cast<size_t>(c)].dot(pair.theta_b);
    }
    CHECK(costs_a(pair.a) <= costs_a.minCoeff() + 1e-12);
    CHECK(costs_b(pair.b) <= costs_b.minCoeff() + 1e-12);
    // The pair's cost difference within one instance is exactly the gap; the
    // two instances contrast by twice that.
    CHECK(costs_a(pair.b) - costs_a(pair.a) == doctest::Approx(pair.gap).epsilon(1e-9));
    CHECK((g.features[static_cast<size_t>(pair.a)] - g.features[static_cast<size_t>(pair.b)])
              .dot(pair.theta_b - pair.theta_a) ==
          doctest::Approx(2.0 * pair.gap).epsilon(1e-9));
  }
}

TEST_CASE("the seed draws different qualifying pairs") {
  const Game g = make_standard_bandit(3);
  std::set<std::pair<int, int>> seen;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const HardPair pair = neighbor_hard_pair(g, HardKind::kLocal, 0.1, seed);
    seen.insert({pair.a, pair.b});
  }
  CHECK(seen.size() > 1);  // three neighbor pairs exist; sampling should vary
}

TEST_CASE("global hard pairs push orthogonally to the neighborhood span") {
  const Game g = make_feedback_graph(Graph::from_edges(3, {{0, 1}, {1, 2}}, {1}));
  const HardPair pair = neighbor_hard_pair(g, HardKind::kGlobal, 0.2, 0);
  // Only the leaf pair qualifies.
  CHECK(pair.a == 0);
  CHECK(pair.b == 2);
  // The push never shows up in any neighborhood observation.
  for (int c : neighborhood(g, pair.a, pair.b)) {
    const Eigen::MatrixXd& m = g.observations[static_cast<size_t>(c)];
    CHECK((m.transpose() * pair.direction).lpNorm<Eigen::Infinity>() < 1e-9);
  }
  // But the revealing action does see it, so the instance is learnable at all.
  CHECK((g.observations[1].transpose() * pair.direction).lpNorm<Eigen::Infinity>() > 1e-3);
  CHECK(pair.gap > 0.0);

  // A locally observable game has no such pair.
  CHECK_THROWS_AS(neighbor_hard_pair(make_standard_bandit(3), HardKind::kGlobal, 0.2),
                  NoWitnessError);
}

TEST_CASE("hopeless pairs are invisible to every observation") {
  const Game g = make_composite_cycle(9);
  const HardPair pair = neighbor_hard_pair(g, HardKind::kHopeless, 0.2, 3);
  const Eigen::VectorXd signal_gap =
      g.stacked_observations.transpose() * (pair.theta_a - pair.theta_b);
  CHECK(signal_gap.lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK(pair.gap > 0.0);
  CHECK_THROWS_AS(neighbor_hard_pair(make_composite_cycle(10), HardKind::kHopeless, 0.2),
                  NoWitnessError);
}

TEST_CASE("ill-conditioned family separates arms invisibly to other observations") {
  const int k = 3;
  const double eps = 0.5, delta = 0.2;
  const Game g = make_ill_conditioned(k, eps);
  const IllConditionedFamily fam = ill_conditioned_family(k, eps, delta);

  CHECK(fam.theta_0.isApprox(Eigen::VectorXd::Constant(k, 0.5), 1e-12));
  REQUIRE(static_cast<int>(fam.thetas.size()) == k);
  for (int a = 0; a < k; ++a) {
    const Eigen::VectorXd& th = fam.thetas[static_cast<size_t>(a)];
    // Arm a beats every other arm by exactly delta.
    for (int b = 0; b < k; ++b) {
      if (b == a) continue;
      CHECK(th(b) - th(a) == doctest::Approx(delta).epsilon(1e-12));
    }
    // Observing arm c != a yields exactly the theta_0 signal; observing arm a
    // differs by exactly epsilon * delta.
    for (int c = 0; c < k; ++c) {
      const double response =
          (g.observations[static_cast<size_t>(c)].transpose() * (fam.theta_0 - th))(0);
      if (c == a) {
        CHECK(std::abs(response - eps * delta) < 1e-12);
      } else {
        CHECK(std::abs(response) < 1e-12);
      }
    }
    // All parameters stay inside the unit box with margin.
    CHECK(th.minCoeff() >= 0.25 - 1e-12);
    CHECK(th.maxCoeff() <= 0.75 + 1e-12);
  }

  CHECK_THROWS_AS(ill_conditioned_family(3, 0.5, 0.3), InvalidInputError);  // delta > 1/4
  CHECK_THROWS_AS(ill_conditioned_family(3, 0.0, 0.1), InvalidInputError);  // epsilon = 0
}

TEST_CASE("environment factories validate their inputs") {
  const Game g = make_standard_bandit(3);

  // Fixed sequences must consist of members of the loss space with matching dimension.
  CHECK_THROWS_AS(
      Environment::fixed_sequence(g, {Eigen::VectorXd(Eigen::Vector3d(2.0, 0, 0))}),
      InvalidInputError);
  CHECK_THROWS_AS(Environment::fixed_sequence(g, {Eigen::VectorXd(Eigen::Vector2d(0.5, 0))}),
                  InvalidInputError);

  // Stochastic parameters must live inside the space; sigma must be nonnegative.
  CHECK_THROWS_AS(
      Environment::stochastic(g, Eigen::VectorXd(Eigen::Vector3d(2.0, 0, 0)), 0.1),
      InvalidInputError);
  CHECK_THROWS_AS(
      Environment::stochastic(g, Eigen::VectorXd(Eigen::Vector3d(0.5, 0, 0)), -0.1),
      InvalidInputError);

  const Environment ok =
      Environment::stochastic(g, Eigen::VectorXd(Eigen::Vector3d(0.5, 0, 0)), 0.1);
  CHECK(ok.kind == Environment::Kind::kStochasticParam);
}

TEST_CASE("fixed sequences replay exactly and reject out-of-range rounds") {
  const Game g = make_standard_bandit(2);
  const std::vector<Eigen::VectorXd> seq = {Eigen::VectorXd(Eigen::Vector2d(0.5, -0.5)),
                                            Eigen::VectorXd(Eigen::Vector2d(-1.0, 1.0))};
  const Environment env = Environment::fixed_sequence(g, seq);
  const CounterRng rng(1, 0, 2);
  CHECK(sample_loss(g, env, 0, rng).loss == seq[0]);
  CHECK(sample_loss(g, env, 1, rng).loss == seq[1]);
  CHECK_FALSE(sample_loss(g, env, 1, rng).clipped);
  CHECK_THROWS_AS(sample_loss(g, env, 2, rng), InvalidInputError);
}

TEST_CASE("stochastic draws are deterministic in (seed, round)") {
  const Game g = make_standard_bandit(3);
  const Environment env =
      Environment::stochastic(g, Eigen::VectorXd(Eigen::Vector3d(0.2, 0.0, -0.2)), 0.3);
  const CounterRng rng_a = make_rng(5, 0, RngStream::kEnvironmentNoise);
  const CounterRng rng_b = make_rng(5, 0, RngStream::kEnvironmentNoise);
  for (std::uint64_t t : {0ULL, 1ULL, 17ULL}) {
    CHECK(sample_loss(g, env, t, rng_a).loss == sample_loss(g, env, t, rng_b).loss);
  }
  // Different rounds and different streams give different draws.
  CHECK(sample_loss(g, env, 0, rng_a).loss != sample_loss(g, env, 1, rng_a).loss);
  const CounterRng other = make_rng(6, 0, RngStream::kEnvironmentNoise);
  CHECK(sample_loss(g, env, 0, rng_a).loss != sample_loss(g, env, 0, other).loss);
}

TEST_CASE("rank-one noise moves all coordinates together") {
  const Game g = make_standard_bandit(3);
  const Eigen::VectorXd theta = Eigen::VectorXd(Eigen::Vector3d(0.1, 0.0, -0.1));
  const Environment env = Environment::stochastic(g, theta, 0.2,
                                                  Environment::NoiseShape::kRankOneOnes,
                                                  /*clip=*/false);
  const CounterRng rng = make_rng(9, 0, RngStream::kEnvironmentNoise);
  for (std::uint64_t t = 0; t < 20; ++t) {
    const Eigen::VectorXd residual = sample_loss(g, env, t, rng).loss - theta;
    CHECK(std::abs(residual(0) - residual(1)) < 1e-12);
    CHECK(std::abs(residual(0) - residual(2)) < 1e-12);
  }
}

TEST_CASE("isotropic noise has the right first two moments") {
  const Game g = make_standard_bandit(2);
  const Eigen::VectorXd theta = Eigen::VectorXd::Zero(2);
  const double sigma = 0.1;
  const Environment env = Environment::stochastic(g, theta, sigma,
                                                  Environment::NoiseShape::kIsotropic,
                                                  /*clip=*/false);
  const CounterRng rng = make_rng(10, 0, RngStream::kEnvironmentNoise);
  const int n = 20000;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  double second = 0.0;
  double cross = 0.0;
  for (int t = 0; t < n; ++t) {
    const Eigen::VectorXd l = sample_loss(g, env, static_cast<std::uint64_t>(t), rng).loss;
    mean += l;
    second += l.squaredNorm();
    cross += l(0) * l(1);
  }
  mean /= n;
  // Standard error is sigma / sqrt(n) ~ 7e-4 per coordinate; allow 5 sigma.
  CHECK(mean.lpNorm<Eigen::Infinity>() < 5e-3);
  CHECK(second / n == doctest::Approx(2.0 * sigma * sigma).epsilon(0.05));
  CHECK(std::abs(cross / n) < 5e-4);
}

TEST_CASE("clipped stochastic draws stay inside the loss space") {
  const Game g = make_standard_bandit(2);
  // Mean on the boundary with large noise: many draws need clipping.
  const Environment env = Environment::stochastic(
      g, Eigen::VectorXd(Eigen::Vector2d(0.95, 0.0)), 1.0);
  const CounterRng rng = make_rng(11, 0, RngStream::kEnvironmentNoise);
  int clipped_count = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const LossDraw draw = sample_loss(g, env, t, rng);
    CHECK(loss_space_contains(g, draw.loss, 1e-9));
    if (draw.clipped) ++clipped_count;
  }
  CHECK(clipped_count > 0);
}
