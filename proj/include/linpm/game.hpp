#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace linpm {

// Undirected feedback graph over actions; self-loops allowed and meaningful
// (a self-loop means the action observes its own loss).
class Graph {
 public:
  Graph() = default;
  // edges are unordered pairs; self_loops lists vertices observing themselves.
  static Graph from_edges(int k, const std::vector<std::pair<int, int>>& edges,
                          const std::vector<int>& self_loops);
  static Graph empty(int k, bool self_loops);
  static Graph complete(int k, bool self_loops);
  static Graph cycle(int k, bool self_loops);
  // Complete bipartite between {0..half-1} and {half..2*half-1}.
  static Graph complete_bipartite(int half, bool self_loops);

  int size() const { return k_; }
  bool has_edge(int a, int b) const { return adj_[static_cast<size_t>(a)][static_cast<size_t>(b)]; }
  // Neighbors of a in increasing order; contains a itself iff a has a self-loop.
  std::vector<int> neighbors(int a) const;
  int degree(int a) const { return static_cast<int>(neighbors(a).size()); }

 private:
  int k_ = 0;
  std::vector<std::vector<bool>> adj_;
};

// Convex, compact set of loss vectors the adversary may pick from.
struct LossSpace {
  enum class Kind { kLpBall, kPolarOfFeatures, kUnitBox01 };

  Kind kind = Kind::kLpBall;
  double p = 2.0;       // Lp-ball exponent, may be +infinity
  double radius = 1.0;  // Lp-ball radius

  static LossSpace lp_ball(double p, double radius);
  static LossSpace l2_ball(double radius) { return lp_ball(2.0, radius); }
  static LossSpace linf_ball(double radius);
  static LossSpace polar_of_features();
  static LossSpace unit_box01();

  bool operator==(const LossSpace& other) const;
};

// Which constructor produced a game.  Drives the exact scale-bound table and
// lets reports name the family.
enum class GameKind {
  kFullInformation,
  kFeedbackGraph,
  kLinearBandit,
  kLinearDueling,
  kIllConditioned,
  kCompositeGraph,
  kCustom,
};

std::string game_kind_name(GameKind kind);

// A finite-action game: per-action feature vectors (loss weights) and
// observation matrices (what the action reveals about the loss vector).
struct Game {
  GameKind kind = GameKind::kCustom;
  int k = 0;  // number of actions
  int d = 0;  // loss-vector dimension
  std::vector<Eigen::VectorXd> features;      // k vectors in R^d
  std::vector<Eigen::MatrixXd> observations;  // k matrices, d x n(a), n(a) >= 1
  LossSpace loss_space;
  std::optional<Graph> graph;  // present for graph-backed constructions
  double feature_scale = 1.0;  // normalization applied at construction, if any

  // Derived quantities cached at construction.
  Eigen::MatrixXd feature_matrix;         // d x k, columns are features
  Eigen::MatrixXd stacked_observations;   // d x (sum of n(a))
  Eigen::MatrixXd observation_basis;      // d x r orthonormal basis of its column space
  std::vector<Eigen::MatrixXd> obs_gram;  // M_a M_a' per action
  Eigen::MatrixXd obs_gram_total;         // sum of obs_gram
  int observation_rank = 0;               // r

  std::string name;  // human-readable label for reports
};

// --- constructors ------------------------------------------------------------

// Every action sees the entire loss vector.
Game make_full_information(int k, const LossSpace& space = LossSpace::linf_ball(1.0));
// Playing a reveals the loss coordinates of a's graph neighbors.
Game make_feedback_graph(const Graph& graph, const LossSpace& space = LossSpace::linf_ball(1.0));
// Playing a reveals the scalar product of a's feature with the loss vector.
Game make_linear_bandit(const std::vector<Eigen::VectorXd>& features,
                        const LossSpace& space = LossSpace::polar_of_features());
// Pairs of base arms; the pair (a, b) costs the sum of both arms' losses and
// reveals their difference.
Game make_linear_dueling(const std::vector<Eigen::VectorXd>& base_features,
                         const LossSpace& space = LossSpace::polar_of_features());
// Playing a reveals a scalar blend: (1-eps) * average loss + eps * own loss.
Game make_ill_conditioned(int k, double epsilon,
                          const LossSpace& space = LossSpace::linf_ball(1.0));
// Playing a reveals the average loss over a's neighborhood (self-loops required).
Game make_composite_graph(const Graph& graph, const LossSpace& space = LossSpace::linf_ball(1.0));
Game make_composite_cycle(int k);
Game make_composite_bipartite(int k);  // complete bipartite on k/2 + k/2 vertices
// k-armed bandit: composite game on the edgeless graph (observe own loss only).
Game make_standard_bandit(int k);
// Explicit matrices; no normalization beyond validation.
Game make_custom(std::vector<Eigen::VectorXd> features, std::vector<Eigen::MatrixXd> observations,
                 const LossSpace& space, GameKind kind = GameKind::kCustom);

// --- loss-space geometry -----------------------------------------------------

struct SupportEval {
  double value = 0.0;        // sup over the loss space of <x, loss>
  Eigen::VectorXd maximizer; // a loss vector attaining the sup
};

// Support function of the game's loss space in direction x.
SupportEval support_function(const Game& game, const Eigen::VectorXd& x);

// Membership test with additive slack.
bool loss_space_contains(const Game& game, const Eigen::VectorXd& loss, double tol = 1e-9);

// Radius of the largest origin-centered Euclidean ball inside the loss space.
// Throws for non-centered spaces (the unit box).
double inscribed_l2_radius(const Game& game);

// --- validation --------------------------------------------------------------

struct BoundednessReport {
  double max_pair_gap = 0.0;  // max over action pairs of sup |<x_a - x_b, loss>|
  bool pass = false;          // max_pair_gap <= 2 + 1e-9
};

// Checks the loss-range normalization every analysis quantity assumes.
BoundednessReport validate(const Game& game);

// Action indices grouped by identical feature vectors; groups ordered by their
// smallest member, members increasing.
std::vector<std::vector<int>> duplicate_feature_groups(const Game& game, double tol = 1e-9);

}  // namespace linpm
