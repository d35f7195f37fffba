#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "linpm/errors.hpp"
#include "linpm/game.hpp"
#include "linpm/json_io.hpp"
#include "linpm/lp.hpp"
#include "linpm/rng.hpp"

using namespace linpm;

namespace {

std::vector<Eigen::VectorXd> vecs(const std::vector<std::vector<double>>& rows) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& row : rows) {
    Eigen::VectorXd v(row.size());
    for (size_t i = 0; i < row.size(); ++i) v(static_cast<Eigen::Index>(i)) = row[i];
    out.push_back(v);
  }
  return out;
}

}  // namespace

TEST_CASE("constructors produce consistent shapes and caches") {
  const Game g = make_feedback_graph(Graph::cycle(5, true));
  CHECK(g.k == 5);
  CHECK(g.d == 5);
  REQUIRE(g.features.size() == 5);
  REQUIRE(g.observations.size() == 5);
  CHECK(g.observations[0].rows() == 5);
  CHECK(g.observations[0].cols() == 3);  // self + two cycle neighbors
  CHECK(g.feature_matrix.cols() == 5);
  CHECK(g.observation_rank == 5);
  CHECK((g.obs_gram_total - g.stacked_observations * g.stacked_observations.transpose()).norm() <
        1e-12);

  const Game bandit = make_standard_bandit(3);
  CHECK(bandit.k == 3);
  CHECK(bandit.graph.has_value());
  CHECK(bandit.observations[1].cols() == 1);
  CHECK((bandit.observations[1] - Eigen::MatrixXd::Identity(3, 3).col(1)).norm() == 0.0);
}

TEST_CASE("boundedness validation accepts the shipped corpus and rejects a scaled cube") {
  CHECK(validate(make_full_information(3)).pass);
  CHECK(validate(make_standard_bandit(4)).pass);
  CHECK(validate(make_composite_cycle(9)).pass);
  CHECK(validate(make_ill_conditioned(3, 0.5)).pass);

  // Two coordinate actions over the radius-2 cube: the pair gap reaches 4.
  const Game wide = make_custom(vecs({{1, 0}, {0, 1}}),
                                {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)},
                                LossSpace::linf_ball(2.0));
  const BoundednessReport report = validate(wide);
  CHECK(report.max_pair_gap == doctest::Approx(4.0));
  CHECK_FALSE(report.pass);
}

TEST_CASE("support function closed forms") {
  Eigen::VectorXd x(2);
  x << 3.0, -4.0;

  const Game l2 = make_custom(vecs({{0.1, 0.0}, {0.0, 0.1}}),
                              {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)},
                              LossSpace::l2_ball(2.0));
  CHECK(support_function(l2, x).value == doctest::Approx(2.0 * 5.0));

  const Game linf = make_custom(vecs({{0.1, 0.0}, {0.0, 0.1}}),
                                {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)},
                                LossSpace::linf_ball(1.0));
  CHECK(support_function(linf, x).value == doctest::Approx(7.0));

  const Game l1 = make_custom(vecs({{0.1, 0.0}, {0.0, 0.1}}),
                              {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)},
                              LossSpace::lp_ball(1.0, 3.0));
  CHECK(support_function(l1, x).value == doctest::Approx(12.0));

  const Game box = make_custom(vecs({{0.5, 0.0}, {0.0, 0.5}}),
                               {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)},
                               LossSpace::unit_box01());
  CHECK(support_function(box, x).value == doctest::Approx(3.0));  // only positive coordinates

  // Every reported maximizer must be a member attaining the value.
  for (const Game* g : {&l2, &linf, &l1, &box}) {
    const SupportEval eval = support_function(*g, x);
    CHECK(loss_space_contains(*g, eval.maximizer, 1e-7));
    CHECK(x.dot(eval.maximizer) == doctest::Approx(eval.value).epsilon(1e-9));
  }
}

TEST_CASE("polar support function matches an LP oracle") {
  const Game bandit =
      make_linear_bandit(vecs({{1.0, 0.0}, {0.0, 1.0}, {0.6, 0.6}}));
  REQUIRE(bandit.loss_space.kind == LossSpace::Kind::kPolarOfFeatures);
  const CounterRng rng(4, 0, 5);
  std::uint64_t counter = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(2);
    x << rng.gaussian(counter++), rng.gaussian(counter++);
    const SupportEval eval = support_function(bandit, x);

    // Oracle: maximize x'l subject to |<x_a, l>| <= 1 for all scaled features.
    Eigen::MatrixXd a_ub(2 * bandit.k, 2);
    Eigen::VectorXd b_ub = Eigen::VectorXd::Ones(2 * bandit.k);
    for (int a = 0; a < bandit.k; ++a) {
      a_ub.row(2 * a) = bandit.features[static_cast<size_t>(a)].transpose();
      a_ub.row(2 * a + 1) = -bandit.features[static_cast<size_t>(a)].transpose();
    }
    const LpResult lp =
        solve_lp(-x, a_ub, b_ub, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0));
    REQUIRE(lp.status == LpStatus::kOptimal);
    CHECK(eval.value == doctest::Approx(-lp.value).epsilon(1e-6));
    CHECK(loss_space_contains(bandit, eval.maximizer, 1e-7));
  }
}

TEST_CASE("membership and inscribed radius") {
  const Game linf = make_full_information(2);  // unit L-infinity ball
  Eigen::VectorXd in(2), out(2);
  in << 1.0, -1.0;
  out << 1.0 + 1e-6, 0.0;
  CHECK(loss_space_contains(linf, in));
  CHECK_FALSE(loss_space_contains(linf, out));
  CHECK(inscribed_l2_radius(linf) == doctest::Approx(1.0));

  const Game bandit = make_linear_bandit(vecs({{1.0, 0.0}, {0.0, 0.5}}));
  // Polar of the scaled features contains the ball of radius 1 / max norm.
  const double r = inscribed_l2_radius(bandit);
  double max_norm = 0.0;
  for (const auto& f : bandit.features) max_norm = std::max(max_norm, f.norm());
  CHECK(r == doctest::Approx(1.0 / max_norm));

  const Game box = make_feedback_graph(Graph::complete(3, true), LossSpace::unit_box01());
  CHECK_THROWS_AS(inscribed_l2_radius(box), InvalidInputError);
}

TEST_CASE("duplicate feature groups") {
  const Game g = make_custom(
      vecs({{1, 0}, {0, 1}, {1, 0}, {0.5, 0.5}}),
      {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2),
       Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)},
      LossSpace::linf_ball(1.0));
  const auto groups = duplicate_feature_groups(g);
  REQUIRE(groups.size() == 3);
  CHECK(groups[0] == std::vector<int>{0, 2});
  CHECK(groups[1] == std::vector<int>{1});
  CHECK(groups[2] == std::vector<int>{3});
}

TEST_CASE("dueling construction normalizes the loss-range bound") {
  const Game duel = make_linear_dueling(vecs({{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}}));
  CHECK(duel.k == 9);
  CHECK(validate(duel).pass);
  // Duplicated pair features (a,b) and (b,a) collapse into one group, and the
  // sums for {0,1} and {2,2} coincide because arm 2 is the midpoint of 0 and 1:
  // six unordered pairs, five distinct feature values.
  CHECK(duplicate_feature_groups(duel).size() == 5);
}

TEST_CASE("ill-conditioned observations blend the average with the own loss") {
  const double eps = 0.5;
  const Game g = make_ill_conditioned(3, eps);
  REQUIRE(g.observations[1].cols() == 1);
  const Eigen::VectorXd col = g.observations[1].col(0);
  for (int i = 0; i < 3; ++i) {
    const double expected = (1.0 - eps) / 3.0 + (i == 1 ? eps : 0.0);
    CHECK(col(i) == doctest::Approx(expected));
  }
  CHECK_THROWS_AS(make_ill_conditioned(3, 0.0), InvalidInputError);
  CHECK_THROWS_AS(make_ill_conditioned(3, 1.5), InvalidInputError);
}

TEST_CASE("JSON round trip preserves a game exactly") {
  const Game original = make_composite_cycle(9);
  const nlohmann::json doc = game_to_json(original);
  const Game restored = game_from_json(doc);
  REQUIRE(restored.k == original.k);
  REQUIRE(restored.d == original.d);
  for (int a = 0; a < original.k; ++a) {
    CHECK((restored.features[static_cast<size_t>(a)] - original.features[static_cast<size_t>(a)])
              .norm() == 0.0);
    CHECK((restored.observations[static_cast<size_t>(a)] -
           original.observations[static_cast<size_t>(a)])
              .norm() == 0.0);
  }
  CHECK(restored.loss_space == original.loss_space);
}

TEST_CASE("JSON loader rejects malformed input") {
  CHECK_THROWS_AS(game_from_json(nlohmann::json{{"params", {{"k", 3}}}}), InvalidInputError);
  CHECK_THROWS_AS(game_from_json(nlohmann::json{{"variant", "no_such_family"}}),
                  InvalidInputError);
  CHECK_THROWS_AS(load_game("/nonexistent/path.json"), InvalidInputError);
}
