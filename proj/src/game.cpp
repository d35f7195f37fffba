#include "linpm/game.hpp"

#include <cmath>
#include <limits>

#include "linpm/errors.hpp"
#include "linpm/lp.hpp"
#include "linpm/matrix_utils.hpp"

namespace linpm {

// --- Graph -------------------------------------------------------------------

Graph Graph::from_edges(int k, const std::vector<std::pair<int, int>>& edges,
                        const std::vector<int>& self_loops) {
  if (k < 1) throw InvalidInputError("Graph: needs at least one vertex");
  Graph g;
  g.k_ = k;
  g.adj_.assign(static_cast<size_t>(k), std::vector<bool>(static_cast<size_t>(k), false));
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= k || b < 0 || b >= k) throw InvalidInputError("Graph: edge endpoint out of range");
    g.adj_[static_cast<size_t>(a)][static_cast<size_t>(b)] = true;
    g.adj_[static_cast<size_t>(b)][static_cast<size_t>(a)] = true;
  }
  for (int a : self_loops) {
    if (a < 0 || a >= k) throw InvalidInputError("Graph: self-loop vertex out of range");
    g.adj_[static_cast<size_t>(a)][static_cast<size_t>(a)] = true;
  }
  return g;
}

Graph Graph::empty(int k, bool self_loops) {
  std::vector<int> loops;
  if (self_loops) {
    for (int a = 0; a < k; ++a) loops.push_back(a);
  }
  return from_edges(k, {}, loops);
}

Graph Graph::complete(int k, bool self_loops) {
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) edges.emplace_back(a, b);
  }
  std::vector<int> loops;
  if (self_loops) {
    for (int a = 0; a < k; ++a) loops.push_back(a);
  }
  return from_edges(k, edges, loops);
}

Graph Graph::cycle(int k, bool self_loops) {
  if (k < 3) throw InvalidInputError("Graph::cycle: needs at least three vertices");
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < k; ++a) edges.emplace_back(a, (a + 1) % k);
  std::vector<int> loops;
  if (self_loops) {
    for (int a = 0; a < k; ++a) loops.push_back(a);
  }
  return from_edges(k, edges, loops);
}

Graph Graph::complete_bipartite(int half, bool self_loops) {
  if (half < 1) throw InvalidInputError("Graph::complete_bipartite: needs at least one vertex per side");
  const int k = 2 * half;
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < half; ++a) {
    for (int b = half; b < k; ++b) edges.emplace_back(a, b);
  }
  std::vector<int> loops;
  if (self_loops) {
    for (int a = 0; a < k; ++a) loops.push_back(a);
  }
  return from_edges(k, edges, loops);
}

std::vector<int> Graph::neighbors(int a) const {
  if (a < 0 || a >= k_) throw InvalidInputError("Graph::neighbors: vertex out of range");
  std::vector<int> out;
  for (int b = 0; b < k_; ++b) {
    if (adj_[static_cast<size_t>(a)][static_cast<size_t>(b)]) out.push_back(b);
  }
  return out;
}

// --- LossSpace ---------------------------------------------------------------

LossSpace LossSpace::lp_ball(double p, double radius) {
  if (!(p >= 1.0)) throw InvalidInputError("LossSpace: Lp exponent must be >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInputError("LossSpace: radius must be positive");
  LossSpace s;
  s.kind = Kind::kLpBall;
  s.p = p;
  s.radius = radius;
  return s;
}

LossSpace LossSpace::linf_ball(double radius) {
  return lp_ball(std::numeric_limits<double>::infinity(), radius);
}

LossSpace LossSpace::polar_of_features() {
  LossSpace s;
  s.kind = Kind::kPolarOfFeatures;
  return s;
}

LossSpace LossSpace::unit_box01() {
  LossSpace s;
  s.kind = Kind::kUnitBox01;
  return s;
}

bool LossSpace::operator==(const LossSpace& other) const {
  if (kind != other.kind) return false;
  if (kind != Kind::kLpBall) return true;
  return p == other.p && radius == other.radius;
}

std::string game_kind_name(GameKind kind) {
  switch (kind) {
    case GameKind::kFullInformation: return "full_information";
    case GameKind::kFeedbackGraph: return "feedback_graph";
    case GameKind::kLinearBandit: return "linear_bandit";
    case GameKind::kLinearDueling: return "linear_dueling";
    case GameKind::kIllConditioned: return "ill_conditioned";
    case GameKind::kCompositeGraph: return "composite_graph";
    case GameKind::kCustom: return "custom";
  }
  return "unknown";
}

// --- construction ------------------------------------------------------------

namespace {

// Fill caches and check structural invariants shared by every construction.
Game finalize(Game g) {
  if (g.k < 1) throw InvalidInputError("Game: needs at least one action");
  if (g.d < 1) throw InvalidInputError("Game: loss dimension must be positive");
  if (static_cast<int>(g.features.size()) != g.k || static_cast<int>(g.observations.size()) != g.k)
    throw InvalidInputError("Game: need one feature vector and one observation matrix per action");

  int total_cols = 0;
  for (int a = 0; a < g.k; ++a) {
    const auto& x = g.features[static_cast<size_t>(a)];
    const auto& m = g.observations[static_cast<size_t>(a)];
    if (x.size() != g.d) throw InvalidInputError("Game: feature dimension mismatch");
    if (m.rows() != g.d) throw InvalidInputError("Game: observation row dimension mismatch");
    if (m.cols() < 1) throw InvalidInputError("Game: every action needs at least one observation column");
    if (!x.allFinite() || !m.allFinite()) throw InvalidInputError("Game: non-finite entries");
    total_cols += static_cast<int>(m.cols());
  }

  g.feature_matrix.resize(g.d, g.k);
  for (int a = 0; a < g.k; ++a) g.feature_matrix.col(a) = g.features[static_cast<size_t>(a)];

  g.stacked_observations.resize(g.d, total_cols);
  int offset = 0;
  g.obs_gram.clear();
  g.obs_gram_total = Eigen::MatrixXd::Zero(g.d, g.d);
  for (int a = 0; a < g.k; ++a) {
    const auto& m = g.observations[static_cast<size_t>(a)];
    g.stacked_observations.middleCols(offset, m.cols()) = m;
    offset += static_cast<int>(m.cols());
    g.obs_gram.push_back(m * m.transpose());
    g.obs_gram_total += g.obs_gram.back();
  }
  g.observation_basis = orthonormal_basis(g.stacked_observations);
  g.observation_rank = static_cast<int>(g.observation_basis.cols());

  if (g.loss_space.kind == LossSpace::Kind::kPolarOfFeatures &&
      numerical_rank(g.feature_matrix) < g.d) {
    throw InvalidInputError(
        "Game: polar loss space requires features spanning the loss dimension (compactness)");
  }
  return g;
}

// Rescale every feature (and feature-derived observation) so the loss range
// assumption holds; only matters for non-polar loss spaces.
double boundedness_scale(const Game& g) {
  const BoundednessReport report = validate(g);
  return report.pass ? 1.0 : 2.0 / report.max_pair_gap;
}

}  // namespace

Game make_full_information(int k, const LossSpace& space) {
  if (k < 1) throw InvalidInputError("make_full_information: k must be positive");
  Game g;
  g.kind = GameKind::kFullInformation;
  g.k = k;
  g.d = k;
  g.loss_space = space;
  g.graph = Graph::complete(k, /*self_loops=*/true);
  for (int a = 0; a < k; ++a) {
    g.features.push_back(Eigen::VectorXd::Unit(k, a));
    g.observations.push_back(Eigen::MatrixXd::Identity(k, k));
  }
  g.name = "full_information(" + std::to_string(k) + ")";
  return finalize(std::move(g));
}

Game make_feedback_graph(const Graph& graph, const LossSpace& space) {
  const int k = graph.size();
  Game g;
  g.kind = GameKind::kFeedbackGraph;
  g.k = k;
  g.d = k;
  g.loss_space = space;
  g.graph = graph;
  for (int a = 0; a < k; ++a) {
    g.features.push_back(Eigen::VectorXd::Unit(k, a));
    const std::vector<int> nbrs = graph.neighbors(a);
    // A vertex nobody lets observe anything still needs one (zero) column.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, std::max<size_t>(nbrs.size(), 1));
    for (size_t j = 0; j < nbrs.size(); ++j) m(nbrs[j], static_cast<int>(j)) = 1.0;
    g.observations.push_back(std::move(m));
  }
  g.name = "feedback_graph(" + std::to_string(k) + ")";
  return finalize(std::move(g));
}

Game make_linear_bandit(const std::vector<Eigen::VectorXd>& features, const LossSpace& space) {
  if (features.empty()) throw InvalidInputError("make_linear_bandit: needs at least one feature");
  Game g;
  g.kind = GameKind::kLinearBandit;
  g.k = static_cast<int>(features.size());
  g.d = static_cast<int>(features.front().size());
  g.loss_space = space;
  g.features = features;
  for (const auto& x : features) g.observations.push_back(x);
  g.name = "linear_bandit(" + std::to_string(g.k) + "," + std::to_string(g.d) + ")";
  Game built = finalize(std::move(g));
  const double scale = boundedness_scale(built);
  if (scale < 1.0) {
    std::vector<Eigen::VectorXd> scaled;
    for (const auto& x : features) scaled.push_back(scale * x);
    Game rebuilt = make_linear_bandit(scaled, space);
    rebuilt.feature_scale = scale;
    return rebuilt;
  }
  return built;
}

Game make_linear_dueling(const std::vector<Eigen::VectorXd>& base_features, const LossSpace& space) {
  if (base_features.empty()) throw InvalidInputError("make_linear_dueling: needs at least one base arm");
  const int m = static_cast<int>(base_features.size());
  const int d = static_cast<int>(base_features.front().size());
  Game g;
  g.kind = GameKind::kLinearDueling;
  g.k = m * m;
  g.d = d;
  g.loss_space = space;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const auto& xa = base_features[static_cast<size_t>(a)];
      const auto& xb = base_features[static_cast<size_t>(b)];
      if (xa.size() != d || xb.size() != d) throw InvalidInputError("make_linear_dueling: dimension mismatch");
      g.features.push_back(xa + xb);
      g.observations.push_back(Eigen::MatrixXd(xa - xb));
    }
  }
  g.name = "linear_dueling(" + std::to_string(m) + ")";
  Game built = finalize(std::move(g));
  const double scale = boundedness_scale(built);
  if (scale < 1.0) {
    std::vector<Eigen::VectorXd> scaled;
    for (const auto& x : base_features) scaled.push_back(scale * x);
    Game rebuilt = make_linear_dueling(scaled, space);
    rebuilt.feature_scale = scale;
    return rebuilt;
  }
  return built;
}

Game make_ill_conditioned(int k, double epsilon, const LossSpace& space) {
  if (k < 1) throw InvalidInputError("make_ill_conditioned: k must be positive");
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw InvalidInputError("make_ill_conditioned: epsilon must lie in (0, 1]");
  Game g;
  g.kind = GameKind::kIllConditioned;
  g.k = k;
  g.d = k;
  g.loss_space = space;
  const Eigen::VectorXd base = Eigen::VectorXd::Constant(k, (1.0 - epsilon) / k);
  for (int a = 0; a < k; ++a) {
    g.features.push_back(Eigen::VectorXd::Unit(k, a));
    Eigen::VectorXd column = base;
    column(a) += epsilon;
    g.observations.push_back(column);
  }
  g.name = "ill_conditioned(" + std::to_string(k) + ")";
  return finalize(std::move(g));
}

Game make_composite_graph(const Graph& graph, const LossSpace& space) {
  const int k = graph.size();
  Game g;
  g.kind = GameKind::kCompositeGraph;
  g.k = k;
  g.d = k;
  g.loss_space = space;
  g.graph = graph;
  for (int a = 0; a < k; ++a) {
    if (!graph.has_edge(a, a))
      throw InvalidInputError("make_composite_graph: every vertex needs a self-loop");
    const std::vector<int> nbrs = graph.neighbors(a);
    Eigen::VectorXd column = Eigen::VectorXd::Zero(k);
    for (int b : nbrs) column(b) = 1.0 / static_cast<double>(nbrs.size());
    g.features.push_back(Eigen::VectorXd::Unit(k, a));
    g.observations.push_back(column);
  }
  g.name = "composite_graph(" + std::to_string(k) + ")";
  return finalize(std::move(g));
}

Game make_composite_cycle(int k) {
  Game g = make_composite_graph(Graph::cycle(k, /*self_loops=*/true));
  g.name = "composite_cycle(" + std::to_string(k) + ")";
  return g;
}

Game make_composite_bipartite(int k) {
  if (k < 2 || k % 2 != 0) throw InvalidInputError("make_composite_bipartite: k must be even and >= 2");
  Game g = make_composite_graph(Graph::complete_bipartite(k / 2, /*self_loops=*/true));
  g.name = "composite_bipartite(" + std::to_string(k) + ")";
  return g;
}

Game make_standard_bandit(int k) {
  Game g = make_composite_graph(Graph::empty(k, /*self_loops=*/true));
  g.name = "standard_bandit(" + std::to_string(k) + ")";
  return g;
}

Game make_custom(std::vector<Eigen::VectorXd> features, std::vector<Eigen::MatrixXd> observations,
                 const LossSpace& space, GameKind kind) {
  Game g;
  g.kind = kind;
  g.k = static_cast<int>(features.size());
  g.d = g.k > 0 ? static_cast<int>(features.front().size()) : 0;
  g.features = std::move(features);
  g.observations = std::move(observations);
  g.loss_space = space;
  g.name = "custom(" + std::to_string(g.k) + "," + std::to_string(g.d) + ")";
  return finalize(std::move(g));
}

// --- loss-space geometry -----------------------------------------------------

namespace {

SupportEval support_lp_ball(const LossSpace& space, const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  const double c = space.radius;
  SupportEval out;
  out.maximizer = Eigen::VectorXd::Zero(d);
  if (x.lpNorm<Eigen::Infinity>() == 0.0) return out;

  if (std::isinf(space.p)) {  // dual exponent 1
    out.value = c * x.lpNorm<1>();
    for (int i = 0; i < d; ++i) out.maximizer(i) = x(i) > 0 ? c : (x(i) < 0 ? -c : 0.0);
    return out;
  }
  if (space.p == 1.0) {  // dual exponent infinity
    int best = 0;
    x.cwiseAbs().maxCoeff(&best);
    out.value = c * std::abs(x(best));
    out.maximizer(best) = x(best) > 0 ? c : -c;
    return out;
  }
  const double q = space.p / (space.p - 1.0);
  double norm_q = 0.0;
  for (int i = 0; i < d; ++i) norm_q += std::pow(std::abs(x(i)), q);
  norm_q = std::pow(norm_q, 1.0 / q);
  out.value = c * norm_q;
  for (int i = 0; i < d; ++i) {
    const double mag = std::pow(std::abs(x(i)) / norm_q, q - 1.0);
    out.maximizer(i) = c * (x(i) >= 0 ? mag : -mag);
  }
  return out;
}

SupportEval support_box01(const Eigen::VectorXd& x) {
  SupportEval out;
  out.maximizer = Eigen::VectorXd::Zero(x.size());
  for (int i = 0; i < x.size(); ++i) {
    if (x(i) > 0.0) {
      out.value += x(i);
      out.maximizer(i) = 1.0;
    }
  }
  return out;
}

// Polar of the feature set: losses with |<feature_a, loss>| <= 1 for all a.
// The value is the minimum l1-norm of coefficients expressing x over the
// features (the dual program); the maximizer comes from the primal program.
SupportEval support_polar(const Game& game, const Eigen::VectorXd& x) {
  SupportEval out;
  out.maximizer = Eigen::VectorXd::Zero(game.d);
  if (x.lpNorm<Eigen::Infinity>() == 0.0) return out;

  // Dual: min sum(u) + sum(v) subject to H (u - v) = x, u, v >= 0.
  const int k = game.k;
  Eigen::MatrixXd a_eq(game.d, 2 * k);
  a_eq << game.feature_matrix, -game.feature_matrix;
  Eigen::VectorXd cost = Eigen::VectorXd::Ones(2 * k);
  LpResult dual = solve_lp_standard(a_eq, x, cost);
  if (dual.status != LpStatus::kOptimal)
    throw IllConditionedError("support_function: polar dual program failed");
  out.value = dual.value;

  // Primal: max <x, loss> subject to -1 <= <feature_a, loss> <= 1.
  Eigen::MatrixXd a_ub(2 * k, game.d);
  a_ub.topRows(k) = game.feature_matrix.transpose();
  a_ub.bottomRows(k) = -game.feature_matrix.transpose();
  LpResult primal = solve_lp(-x, a_ub, Eigen::VectorXd::Ones(2 * k), Eigen::MatrixXd::Zero(0, game.d),
                             Eigen::VectorXd::Zero(0));
  if (primal.status != LpStatus::kOptimal)
    throw IllConditionedError("support_function: polar primal program failed");
  out.maximizer = primal.x;
  return out;
}

}  // namespace

SupportEval support_function(const Game& game, const Eigen::VectorXd& x) {
  if (x.size() != game.d) throw InvalidInputError("support_function: dimension mismatch");
  if (!x.allFinite()) throw InvalidInputError("support_function: non-finite direction");
  switch (game.loss_space.kind) {
    case LossSpace::Kind::kLpBall: return support_lp_ball(game.loss_space, x);
    case LossSpace::Kind::kUnitBox01: return support_box01(x);
    case LossSpace::Kind::kPolarOfFeatures: return support_polar(game, x);
  }
  throw InvalidInputError("support_function: unknown loss space");
}

bool loss_space_contains(const Game& game, const Eigen::VectorXd& loss, double tol) {
  if (loss.size() != game.d) return false;
  switch (game.loss_space.kind) {
    case LossSpace::Kind::kLpBall: {
      const LossSpace& s = game.loss_space;
      if (std::isinf(s.p)) return loss.lpNorm<Eigen::Infinity>() <= s.radius + tol;
      if (s.p == 1.0) return loss.lpNorm<1>() <= s.radius + tol;
      if (s.p == 2.0) return loss.norm() <= s.radius + tol;
      double norm = 0.0;
      for (int i = 0; i < loss.size(); ++i) norm += std::pow(std::abs(loss(i)), s.p);
      return std::pow(norm, 1.0 / s.p) <= s.radius + tol;
    }
    case LossSpace::Kind::kUnitBox01:
      return loss.minCoeff() >= -tol && loss.maxCoeff() <= 1.0 + tol;
    case LossSpace::Kind::kPolarOfFeatures: {
      for (int a = 0; a < game.k; ++a) {
        if (std::abs(game.features[static_cast<size_t>(a)].dot(loss)) > 1.0 + tol) return false;
      }
      return true;
    }
  }
  return false;
}

double inscribed_l2_radius(const Game& game) {
  const LossSpace& s = game.loss_space;
  switch (s.kind) {
    case LossSpace::Kind::kLpBall:
      if (s.p >= 2.0) return s.radius;
      return s.radius * std::pow(static_cast<double>(game.d), 0.5 - 1.0 / s.p);
    case LossSpace::Kind::kPolarOfFeatures: {
      double max_norm = 0.0;
      for (const auto& x : game.features) max_norm = std::max(max_norm, x.norm());
      if (max_norm == 0.0) throw InvalidInputError("inscribed_l2_radius: all features zero");
      return 1.0 / max_norm;
    }
    case LossSpace::Kind::kUnitBox01:
      throw InvalidInputError("inscribed_l2_radius: the unit box contains no origin-centered ball");
  }
  throw InvalidInputError("inscribed_l2_radius: unknown loss space");
}

BoundednessReport validate(const Game& game) {
  BoundednessReport report;
  for (int a = 0; a < game.k; ++a) {
    for (int b = a + 1; b < game.k; ++b) {
      const Eigen::VectorXd diff =
          game.features[static_cast<size_t>(a)] - game.features[static_cast<size_t>(b)];
      const double gap =
          std::max(support_function(game, diff).value, support_function(game, -diff).value);
      report.max_pair_gap = std::max(report.max_pair_gap, gap);
    }
  }
  report.pass = report.max_pair_gap <= 2.0 + 1e-9;
  return report;
}

std::vector<std::vector<int>> duplicate_feature_groups(const Game& game, double tol) {
  std::vector<std::vector<int>> groups;
  std::vector<int> assigned(static_cast<size_t>(game.k), -1);
  for (int a = 0; a < game.k; ++a) {
    if (assigned[static_cast<size_t>(a)] >= 0) continue;
    groups.push_back({a});
    assigned[static_cast<size_t>(a)] = static_cast<int>(groups.size()) - 1;
    const auto& xa = game.features[static_cast<size_t>(a)];
    for (int b = a + 1; b < game.k; ++b) {
      if (assigned[static_cast<size_t>(b)] >= 0) continue;
      const auto& xb = game.features[static_cast<size_t>(b)];
      if ((xa - xb).lpNorm<Eigen::Infinity>() <= tol * (1.0 + xa.lpNorm<Eigen::Infinity>())) {
        groups.back().push_back(b);
        assigned[static_cast<size_t>(b)] = static_cast<int>(groups.size()) - 1;
      }
    }
  }
  return groups;
}

}  // namespace linpm
