#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "linpm/constants.hpp"
#include "linpm/errors.hpp"
#include "linpm/game.hpp"
#include "linpm/observability.hpp"
#include "linpm/rng.hpp"

using namespace linpm;

namespace {

Eigen::VectorXd reconstruct(const Game& game, const std::vector<Eigen::VectorXd>& blocks) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(game.d);
  for (int c = 0; c < game.k; ++c) {
    if (blocks[static_cast<size_t>(c)].size() > 0) {
      sum += game.observations[static_cast<size_t>(c)] * blocks[static_cast<size_t>(c)];
    }
  }
  return sum;
}

double group_norm(const std::vector<Eigen::VectorXd>& blocks) {
  double sum = 0.0;
  for (const auto& b : blocks) {
    if (b.size() > 0) sum += b.norm();
  }
  return sum;
}

}  // namespace

TEST_CASE("min_group_norm closed forms") {
  SUBCASE("bandit blocks are forced coordinatewise") {
    const Game g = make_standard_bandit(3);
    const Eigen::VectorXd target = Eigen::Vector3d(1, -1, 0);
    const GroupNormSolution sol = min_group_norm(g, target);
    CHECK(sol.value == doctest::Approx(2.0).epsilon(1e-7));
    CHECK((reconstruct(g, sol.blocks) - target).norm() < 1e-7);
  }
  SUBCASE("a single all-seeing block wins by the triangle inequality") {
    // Per-action observation columns are orthonormal, so the group objective is
    // at least the Euclidean norm of the target; one identity block attains it.
    const Game g = make_full_information(3);
    const GroupNormSolution sol = min_group_norm(g, Eigen::Vector3d(1, -1, 0));
    CHECK(sol.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));

    const Game cyc = make_feedback_graph(Graph::cycle(5, true));
    Eigen::VectorXd t = Eigen::VectorXd::Zero(5);
    t(0) = 1.0;
    t(1) = -1.0;
    const GroupNormSolution sol2 = min_group_norm(cyc, t);
    CHECK(sol2.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK((reconstruct(cyc, sol2.blocks) - t).norm() < 1e-6);
  }
  SUBCASE("restriction to a non-spanning set throws") {
    const Game g = make_standard_bandit(3);
    CHECK_THROWS_AS(min_group_norm(g, Eigen::Vector3d(1, -1, 0), {0}), NoWitnessError);
    const GroupNormSolution ok = min_group_norm(g, Eigen::Vector3d(1, -1, 0), {0, 1});
    CHECK(ok.value == doctest::Approx(2.0).epsilon(1e-7));
  }
}

TEST_CASE("global alignment constants on reference games") {
  const Game bandit = make_standard_bandit(3);
  CHECK(beta_2_glo(bandit) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(beta_glo(bandit) == doctest::Approx(2.0).epsilon(1e-6));

  // Full information stacks three identity blocks: the least-norm solution
  // spreads the target equally, shrinking the Euclidean value by sqrt(3).
  const Game full = make_full_information(3);
  CHECK(beta_2_glo(full) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-9));
  CHECK(beta_glo(full) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));

  // Hopeless game: no alignment exists at all.
  CHECK_THROWS_AS(beta_2_glo(make_composite_cycle(9)), NoWitnessError);
}

TEST_CASE("alignment chain inequalities hold on several games") {
  const std::vector<Game> games = {make_standard_bandit(3), make_full_information(3),
                                   make_feedback_graph(Graph::cycle(5, true)),
                                   make_feedback_graph(Graph::from_edges(3, {{0, 1}, {1, 2}}, {1})),
                                   make_composite_bipartite(4)};
  for (const Game& g : games) {
    CAPTURE(g.name);
    const double b2 = beta_2_glo(g);
    const double bg = beta_glo(g);
    CHECK(b2 <= bg + 1e-6);
    CHECK(bg <= std::sqrt(static_cast<double>(g.k)) * b2 + 1e-6);
  }
}

TEST_CASE("locally restricted alignment dominates the global one") {
  const std::vector<Game> games = {make_standard_bandit(3), make_full_information(3),
                                   make_feedback_graph(Graph::cycle(5, true))};
  for (const Game& g : games) {
    CAPTURE(g.name);
    const BetaLocResult loc = beta_loc(g);
    CHECK(loc.exact);
    CHECK(loc.orderings > 0);
    CHECK(loc.value >= beta_glo(g) - 1e-6);
  }
  CHECK(beta_loc(make_standard_bandit(3)).value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("restricted alignment is infeasible beyond local observability") {
  // A revealing middle action rescues global observability, but orderings that
  // rank it last leave the leaf pair unresolvable.
  const Game weak = make_feedback_graph(Graph::from_edges(3, {{0, 1}, {1, 2}}, {1}));
  CHECK_THROWS_AS(beta_loc(weak), IllConditionedError);
}

TEST_CASE("sampled orderings lower-bound the exact enumeration") {
  const Game g = make_feedback_graph(Graph::cycle(5, true));
  const BetaLocResult exact = beta_loc(g, BetaLocMode::kEnumerate);
  const BetaLocResult sampled = beta_loc(g, BetaLocMode::kSampled, 200, 7);
  CHECK_FALSE(sampled.exact);
  CHECK(sampled.value <= exact.value + 1e-6);
  CHECK(sampled.value > 0.0);
}

TEST_CASE("subset indices: ordering, spanning subsets, and exact reference values") {
  const std::vector<Game> games = {make_standard_bandit(3), make_full_information(3),
                                   make_feedback_graph(Graph::cycle(5, true)),
                                   make_composite_cycle(9)};
  for (const Game& g : games) {
    CAPTURE(g.name);
    const SubsetIndexResult w = w_star(g);
    const SubsetIndexResult u = u_star(g);
    CHECK(w.exact);
    CHECK(u.exact);
    // Per-action observation blocks are sub-blocks of the stack, so the
    // per-action norm never exceeds the stacked norm on the same subset, and
    // the full set attains exactly |full| (projector norm one).
    CHECK(w.value <= u.value + 1e-9);
    CHECK(u.value <= static_cast<double>(g.k) + 1e-9);
    // Returned subsets must span the whole observation space.
    for (const SubsetIndexResult* r : {&w, &u}) {
      int cols = 0;
      for (int a : r->subset) cols += static_cast<int>(g.observations[static_cast<size_t>(a)].cols());
      Eigen::MatrixXd stacked(g.d, cols);
      int at = 0;
      for (int a : r->subset) {
        const auto& m = g.observations[static_cast<size_t>(a)];
        stacked.block(0, at, g.d, m.cols()) = m;
        at += static_cast<int>(m.cols());
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
      qr.setThreshold(1e-9);
      CHECK(static_cast<int>(qr.rank()) == g.observation_rank);
    }
  }

  CHECK(w_star(make_standard_bandit(3)).value == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(w_star(make_full_information(3)).value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(u_star(make_full_information(3)).value == doctest::Approx(3.0).epsilon(1e-9));
  // One full observation plus the leaves: the revealing action alone spans.
  CHECK(w_star(make_feedback_graph(Graph::from_edges(3, {{0, 1}, {1, 2}}, {1}))).value ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("greedy subset search upper-bounds the exhaustive optimum") {
  const std::vector<Game> games = {make_standard_bandit(4), make_composite_cycle(10),
                                   make_feedback_graph(Graph::cycle(5, true))};
  for (const Game& g : games) {
    CAPTURE(g.name);
    for (auto fn : {&w_star, &u_star}) {
      const SubsetIndexResult exact = fn(g, SubsetSearchMode::kExhaustive);
      const SubsetIndexResult greedy = fn(g, SubsetSearchMode::kGreedy);
      CHECK_FALSE(greedy.exact);
      CHECK(greedy.value >= exact.value - 1e-9);
    }
  }
}

TEST_CASE("ten-cycle composite constants match the hand computation") {
  const Game g = make_composite_cycle(10);
  CHECK(beta_2_glo(g) == doctest::Approx(std::sqrt(54.0)).epsilon(1e-6));
  CHECK(beta_2_glo(g) <= 2.0 * std::sqrt(19.0));
  CHECK(w_star(g).value == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(u_star(g).value == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("estimator scale bounds") {
  CHECK(omega_bound(make_full_information(3)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(omega_bound(make_feedback_graph(Graph::cycle(5, true))) ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK(omega_bound(make_feedback_graph(Graph::cycle(5, true), LossSpace::unit_box01())) ==
        doctest::Approx(1.0));
  // Averaged observations have unit l1 columns; scalar signals stay in [-1, 1].
  CHECK(omega_bound(make_standard_bandit(3)) == doctest::Approx(1.0));
  CHECK(omega_bound(make_composite_cycle(9)) == doctest::Approx(1.0));
  const Game duel = make_linear_dueling(
      {Eigen::VectorXd(Eigen::Vector2d(1, 0)), Eigen::VectorXd(Eigen::Vector2d(0, 1)),
       Eigen::VectorXd(Eigen::Vector2d(0.5, 0.5))});
  CHECK(omega_bound(duel) == doctest::Approx(1.0));
}

TEST_CASE("graph constants by exhaustive hand-checkable cases") {
  const GraphConstants empty3 = graph_constants(Graph::empty(3, true));
  CHECK(empty3.independence_number == 3);
  CHECK(empty3.total_domination_number == 3);

  const GraphConstants cyc5 = graph_constants(Graph::cycle(5, true));
  CHECK(cyc5.independence_number == 2);
  CHECK(cyc5.total_domination_number == 2);

  const GraphConstants comp4 = graph_constants(Graph::complete(4, false));
  CHECK(comp4.independence_number == 1);
  CHECK(comp4.total_domination_number == 2);

  const GraphConstants path3 = graph_constants(Graph::from_edges(3, {{0, 1}, {1, 2}}, {1}));
  CHECK(path3.independence_number == 2);
  CHECK(path3.total_domination_number == 1);

  const GraphConstants bip = graph_constants(Graph::complete_bipartite(2, false));
  CHECK(bip.independence_number == 2);
  CHECK(bip.total_domination_number == 2);

  CHECK_THROWS_AS(graph_constants(Graph::empty(2, false)), NoWitnessError);
}

TEST_CASE("graph observability predicates") {
  CHECK(graph_strongly_observable(Graph::cycle(5, true)));
  CHECK(graph_strongly_observable(Graph::complete(4, false)));
  CHECK_FALSE(graph_strongly_observable(Graph::from_edges(3, {{0, 1}, {1, 2}}, {1})));
  CHECK(graph_weakly_observable(Graph::from_edges(3, {{0, 1}, {1, 2}}, {1})));
  CHECK_FALSE(graph_weakly_observable(Graph::empty(2, false)));
}

TEST_CASE("strong-graph estimation weights reconstruct gaps with two units") {
  const CounterRng rng(99, 0, 5);
  std::uint64_t counter = 0;
  const std::vector<Game> games = {make_feedback_graph(Graph::cycle(5, true)),
                                   make_feedback_graph(Graph::complete(5, false)),
                                   make_full_information(4)};
  for (const Game& g : games) {
    CAPTURE(g.name);
    const GraphConstants gc = graph_constants(*g.graph);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd loss(g.k);
      for (int i = 0; i < g.k; ++i) loss(i) = 2.0 * rng.uniform(counter++) - 1.0;
      const EstimationWeights w = strong_graph_weights(g, loss);

      // The optimal action is the loss minimizer.
      CHECK(loss(w.optimal_action) == loss.minCoeff());
      std::set<int> g1_image;
      for (int a = 0; a < g.k; ++a) {
        if (a == w.optimal_action) {
          CHECK(group_norm(w.blocks[static_cast<size_t>(a)]) == 0.0);
          continue;
        }
        const Eigen::VectorXd target = g.features[static_cast<size_t>(a)] -
                                       g.features[static_cast<size_t>(w.optimal_action)];
        CHECK((reconstruct(g, w.blocks[static_cast<size_t>(a)]) - target).norm() < 1e-12);
        CHECK(group_norm(w.blocks[static_cast<size_t>(a)]) <= 2.0 + 1e-12);
        g1_image.insert(w.g1[static_cast<size_t>(a)]);
      }
      CHECK(w.beta <= 2.0 + 1e-12);
      // First-pointer targets form an independent set (self-loops ignored).
      for (int a : g1_image) {
        for (int b : g1_image) {
          if (a != b) CHECK_FALSE(g.graph->has_edge(a, b));
        }
      }
      CHECK(w.support_size <= gc.independence_number + 1);
    }
  }
}

TEST_CASE("estimation weights reject unsupported games") {
  CHECK_THROWS_AS(strong_graph_weights(make_standard_bandit(3), Eigen::Vector3d(0, 1, 2)),
                  InvalidInputError);
  CHECK_THROWS_AS(
      strong_graph_weights(make_feedback_graph(Graph::from_edges(3, {{0, 1}, {1, 2}}, {1})),
                           Eigen::Vector3d(0, 1, 2)),
      InvalidInputError);
  CHECK_THROWS_AS(strong_graph_weights(make_full_information(3), Eigen::Vector2d(0, 1)),
                  InvalidInputError);
}

TEST_CASE("aggregate constants report fills the fields the verdict allows") {
  const ConstantsReport local = compute_constants(make_standard_bandit(3));
  CHECK(local.verdict == Observability::kLocallyObservable);
  REQUIRE(local.beta_2_glo.has_value());
  REQUIRE(local.beta_glo.has_value());
  REQUIRE(local.beta_loc.has_value());
  CHECK(local.omega == doctest::Approx(1.0));
  CHECK(local.graph.has_value());

  const ConstantsReport hopeless = compute_constants(make_composite_cycle(9));
  CHECK(hopeless.verdict == Observability::kHopeless);
  CHECK_FALSE(hopeless.beta_2_glo.has_value());
  CHECK_FALSE(hopeless.beta_loc.has_value());

  const ConstantsReport global =
      compute_constants(make_feedback_graph(Graph::from_edges(3, {{0, 1}, {1, 2}}, {1})));
  CHECK(global.verdict == Observability::kGloballyObservable);
  REQUIRE(global.beta_2_glo.has_value());
  CHECK_FALSE(global.beta_loc.has_value());
}
