#include "linpm/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "linpm/errors.hpp"
#include "linpm/lp.hpp"
#include "linpm/matrix_utils.hpp"
#include "linpm/rng.hpp"

namespace linpm {

namespace {

std::vector<int> all_actions(int k) {
  std::vector<int> out(static_cast<size_t>(k));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

}  // namespace

GroupNormSolution min_group_norm(const Game& game, const Eigen::VectorXd& target,
                                 const std::vector<int>& allowed_in) {
  if (target.size() != game.d) throw InvalidInputError("min_group_norm: target dimension mismatch");
  const std::vector<int> allowed = allowed_in.empty() ? all_actions(game.k) : allowed_in;
  for (int a : allowed) {
    if (a < 0 || a >= game.k) throw InvalidInputError("min_group_norm: allowed action out of range");
  }

  // Stack the allowed observation matrices.
  int n = 0;
  for (int a : allowed) n += static_cast<int>(game.observations[static_cast<size_t>(a)].cols());
  Eigen::MatrixXd stacked(game.d, n);
  std::vector<int> offsets;
  int offset = 0;
  for (int a : allowed) {
    const auto& m = game.observations[static_cast<size_t>(a)];
    stacked.middleCols(offset, m.cols()) = m;
    offsets.push_back(offset);
    offset += static_cast<int>(m.cols());
  }

  GroupNormSolution out;
  out.blocks.assign(static_cast<size_t>(game.k), Eigen::VectorXd());
  for (int a = 0; a < game.k; ++a) {
    out.blocks[static_cast<size_t>(a)] =
        Eigen::VectorXd::Zero(game.observations[static_cast<size_t>(a)].cols());
  }

  const Eigen::MatrixXd pinv = pseudoinverse(stacked);
  const Eigen::VectorXd v0 = pinv * target;
  const double feas_residual = (stacked * v0 - target).norm();
  if (feas_residual > 1e-8 * (1.0 + target.norm())) {
    throw NoWitnessError("min_group_norm: target is outside the allowed observation span");
  }

  // Kernel of the stacked matrix (full SVD; right singular vectors past the rank).
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? kRankTolerance * sigma(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff && sigma(i) > 0.0) ++rank;
  }
  const Eigen::MatrixXd kernel = svd.matrixV().rightCols(n - rank);

  const auto group_norm = [&](const Eigen::VectorXd& v) {
    double total = 0.0;
    for (size_t j = 0; j < allowed.size(); ++j) {
      const int cols =
          static_cast<int>(game.observations[static_cast<size_t>(allowed[j])].cols());
      total += v.segment(offsets[j], cols).norm();
    }
    return total;
  };

  Eigen::VectorXd best = v0;
  double best_value = group_norm(v0);
  int iterations = 0;

  if (kernel.cols() > 0) {
    // Proximal splitting: alternate the group-norm proximal map with the
    // projection onto the affine solution set v0 + range(kernel).
    const double rho = 1.0;
    Eigen::VectorXd x = v0;
    Eigen::VectorXd w = v0;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    int last_improvement = 0;
    const int max_iters = 50000;
    for (int iter = 1; iter <= max_iters; ++iter) {
      iterations = iter;
      const Eigen::VectorXd t = x - u;
      for (size_t j = 0; j < allowed.size(); ++j) {
        const int cols =
            static_cast<int>(game.observations[static_cast<size_t>(allowed[j])].cols());
        const auto seg = t.segment(offsets[j], cols);
        const double norm = seg.norm();
        const double shrink = norm > 1.0 / rho ? 1.0 - 1.0 / (rho * norm) : 0.0;
        w.segment(offsets[j], cols) = shrink * seg;
      }
      const Eigen::VectorXd y = w + u - v0;
      x = v0 + kernel * (kernel.transpose() * y);
      u += w - x;

      const double value = group_norm(x);
      if (value < best_value - 1e-9) {
        best_value = value;
        best = x;
        last_improvement = iter;
      }
      if (iter - last_improvement >= 100) break;
    }
  }

  out.value = best_value;
  out.residual = (stacked * best - target).norm();
  out.iterations = iterations;
  for (size_t j = 0; j < allowed.size(); ++j) {
    const int a = allowed[j];
    const int cols = static_cast<int>(game.observations[static_cast<size_t>(a)].cols());
    out.blocks[static_cast<size_t>(a)] = best.segment(offsets[j], cols);
  }
  return out;
}

namespace {

// Distinct-feature representative pairs along with the span-membership check.
std::vector<std::pair<int, int>> alignment_pairs(const Game& game) {
  std::vector<int> reps;
  for (const auto& group : duplicate_feature_groups(game)) reps.push_back(group.front());
  std::vector<std::pair<int, int>> pairs;
  for (size_t i = 0; i < reps.size(); ++i) {
    for (size_t j = i + 1; j < reps.size(); ++j) pairs.emplace_back(reps[i], reps[j]);
  }
  return pairs;
}

void require_globally_observable(const Game& game) {
  const Eigen::MatrixXd& basis = game.observation_basis;
  for (const auto& [a, b] : alignment_pairs(game)) {
    const Eigen::VectorXd diff =
        game.features[static_cast<size_t>(a)] - game.features[static_cast<size_t>(b)];
    if (diff.norm() == 0.0) continue;
    const double residual = (diff - basis * (basis.transpose() * diff)).norm() / diff.norm();
    if (residual > kSpanResidual) {
      throw NoWitnessError("alignment constants undefined: pair (" + std::to_string(a) + "," +
                           std::to_string(b) + ") escapes the observation span");
    }
  }
}

}  // namespace

double beta_2_glo(const Game& game) {
  require_globally_observable(game);
  const Eigen::MatrixXd pinv = pseudoinverse(game.stacked_observations);
  double best = 0.0;
  for (const auto& [a, b] : alignment_pairs(game)) {
    const Eigen::VectorXd diff =
        game.features[static_cast<size_t>(a)] - game.features[static_cast<size_t>(b)];
    best = std::max(best, (pinv * diff).norm());
  }
  return best;
}

double beta_glo(const Game& game) {
  require_globally_observable(game);
  double best = 0.0;
  for (const auto& [a, b] : alignment_pairs(game)) {
    const Eigen::VectorXd diff =
        game.features[static_cast<size_t>(a)] - game.features[static_cast<size_t>(b)];
    best = std::max(best, min_group_norm(game, diff).value);
  }
  return best;
}

// --- beta_loc -----------------------------------------------------------------

namespace {

// Max-margin program certifying that a strict ordering of the distinct feature
// values is realizable inside the loss space.  Homogeneous constraints make
// realizability scale-free, so centered spaces are tested over the unit box;
// the (non-centered) unit box is tested over itself.
struct OrderingCheck {
  bool realizable = false;
  Eigen::VectorXd loss;
};

OrderingCheck ordering_realizable(const Game& game, const std::vector<int>& ordered_reps,
                                  double margin) {
  const int d = game.d;
  const int g = static_cast<int>(ordered_reps.size());
  const bool shifted_box = game.loss_space.kind == LossSpace::Kind::kUnitBox01;

  // Variables (loss, m): maximize m subject to consecutive-gap and box rows.
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(d + 1);
  cost(d) = -1.0;
  const int rows = (g - 1) + 2 * d;
  Eigen::MatrixXd a_ub(rows, d + 1);
  Eigen::VectorXd b_ub(rows);
  a_ub.setZero();
  for (int i = 0; i + 1 < g; ++i) {
    const Eigen::VectorXd row =
        game.features[static_cast<size_t>(ordered_reps[static_cast<size_t>(i)])] -
        game.features[static_cast<size_t>(ordered_reps[static_cast<size_t>(i + 1)])];
    a_ub.block(i, 0, 1, d) = row.transpose() / row.norm();
    a_ub(i, d) = 1.0;
    b_ub(i) = 0.0;
  }
  for (int i = 0; i < d; ++i) {
    a_ub(g - 1 + 2 * i, i) = 1.0;
    b_ub(g - 1 + 2 * i) = 1.0;
    a_ub(g - 1 + 2 * i + 1, i) = -1.0;
    b_ub(g - 1 + 2 * i + 1) = shifted_box ? 0.0 : 1.0;
  }
  const LpResult r = solve_lp(cost, a_ub, b_ub, Eigen::MatrixXd::Zero(0, d + 1),
                              Eigen::VectorXd::Zero(0));
  OrderingCheck out;
  if (r.status == LpStatus::kOptimal && r.x(d) >= margin) {
    out.realizable = true;
    out.loss = r.x.head(d);
  }
  return out;
}

struct RestrictedKey {
  int action;
  std::vector<int> allowed;
  bool operator<(const RestrictedKey& other) const {
    if (action != other.action) return action < other.action;
    return allowed < other.allowed;
  }
};

// Alignment weights for one loss realization: for every Pareto action, the
// cheapest reconstruction of its gap to the optimal action using only
// currently-not-better actions.  Returns (worst value, union support size).
std::pair<double, int> alignment_for_ordering(
    const Game& game, const std::vector<int>& pareto_reps, int anchor,
    const std::vector<int>& allowed_per_rank, const std::vector<int>& rank_of_action,
    std::map<RestrictedKey, GroupNormSolution>& cache) {
  double worst = 0.0;
  std::vector<bool> in_support(static_cast<size_t>(game.k), false);
  for (int a : pareto_reps) {
    if (a == anchor) continue;
    // Actions whose feature value ranks no worse than a's.
    std::vector<int> allowed;
    for (int c = 0; c < game.k; ++c) {
      if (rank_of_action[static_cast<size_t>(c)] <= rank_of_action[static_cast<size_t>(a)])
        allowed.push_back(c);
    }
    (void)allowed_per_rank;
    const Eigen::VectorXd target =
        game.features[static_cast<size_t>(a)] - game.features[static_cast<size_t>(anchor)];
    RestrictedKey key{a, allowed};
    auto it = cache.find(key);
    if (it == cache.end()) {
      GroupNormSolution sol;
      try {
        sol = min_group_norm(game, target, allowed);
      } catch (const NoWitnessError&) {
        throw IllConditionedError(
            "beta_loc: realizable ordering admits no restricted alignment; the game is not "
            "locally observable");
      }
      it = cache.emplace(key, std::move(sol)).first;
    }
    worst = std::max(worst, it->second.value);
    for (int c = 0; c < game.k; ++c) {
      if (it->second.blocks[static_cast<size_t>(c)].size() > 0 &&
          it->second.blocks[static_cast<size_t>(c)].norm() > 1e-9) {
        in_support[static_cast<size_t>(c)] = true;
      }
    }
  }
  const int support =
      static_cast<int>(std::count(in_support.begin(), in_support.end(), true));
  return {worst, support};
}

}  // namespace

BetaLocResult beta_loc(const Game& game, BetaLocMode mode, int samples, std::uint64_t seed) {
  const auto groups = duplicate_feature_groups(game);
  const int g = static_cast<int>(groups.size());
  const std::vector<int> pareto = pareto_actions(game);
  std::vector<int> pareto_reps;
  for (const auto& group : groups) {
    if (std::binary_search(pareto.begin(), pareto.end(), group.front()))
      pareto_reps.push_back(group.front());
  }

  BetaLocResult result;
  if (pareto_reps.size() <= 1) {
    result.exact = true;
    return result;  // nothing to estimate: one effective action
  }

  std::map<RestrictedKey, GroupNormSolution> cache;

  if (mode == BetaLocMode::kEnumerate) {
    if (g > 7) {
      throw InvalidInputError(
          "beta_loc: more than seven distinct feature values; use the sampled mode");
    }
    std::vector<int> order(static_cast<size_t>(g));
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> rank_of_action(static_cast<size_t>(game.k));
    do {
      std::vector<int> ordered_reps;
      for (int gi : order) ordered_reps.push_back(groups[static_cast<size_t>(gi)].front());
      const OrderingCheck check = ordering_realizable(game, ordered_reps, 1e-6);
      if (!check.realizable) continue;
      ++result.orderings;
      for (int pos = 0; pos < g; ++pos) {
        for (int member : groups[static_cast<size_t>(order[static_cast<size_t>(pos)])]) {
          rank_of_action[static_cast<size_t>(member)] = pos;
        }
      }
      // Anchor: lowest-index action among the top-ranked group.
      const int anchor = *std::min_element(groups[static_cast<size_t>(order[0])].begin(),
                                           groups[static_cast<size_t>(order[0])].end());
      const auto [value, support] =
          alignment_for_ordering(game, pareto_reps, anchor, {}, rank_of_action, cache);
      if (value > result.value) result.value = value;
      result.max_support = std::max(result.max_support, support);
    } while (std::next_permutation(order.begin(), order.end()));
    result.exact = true;
    return result;
  }

  // Sampled mode: draw losses, order actions empirically, keep the worst case.
  const CounterRng rng = make_rng(seed, 0, RngStream::kLossSampling);
  std::uint64_t counter = 0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd loss(game.d);
    // Rejection-sample from the smallest box containing the loss space.
    bool accepted = false;
    for (int attempt = 0; attempt < 256 && !accepted; ++attempt) {
      for (int i = 0; i < game.d; ++i) {
        const double u = rng.uniform(counter++);
        loss(i) = game.loss_space.kind == LossSpace::Kind::kUnitBox01 ? u : 2.0 * u - 1.0;
      }
      if (game.loss_space.kind == LossSpace::Kind::kLpBall) {
        loss *= game.loss_space.radius;
      }
      accepted = loss_space_contains(game, loss, 1e-12);
    }
    if (!accepted) continue;
    ++result.orderings;

    std::vector<double> score(static_cast<size_t>(game.k));
    for (int a = 0; a < game.k; ++a) score[static_cast<size_t>(a)] = game.features[static_cast<size_t>(a)].dot(loss);
    // Rank by loss value with a tolerance so ties share a rank.
    std::vector<int> order_idx(static_cast<size_t>(game.k));
    std::iota(order_idx.begin(), order_idx.end(), 0);
    std::sort(order_idx.begin(), order_idx.end(),
              [&](int a, int b) { return score[static_cast<size_t>(a)] < score[static_cast<size_t>(b)]; });
    std::vector<int> rank_of_action(static_cast<size_t>(game.k), 0);
    int rank = 0;
    for (size_t i = 1; i < order_idx.size(); ++i) {
      if (score[static_cast<size_t>(order_idx[i])] >
          score[static_cast<size_t>(order_idx[i - 1])] + 1e-9) {
        ++rank;
      }
      rank_of_action[static_cast<size_t>(order_idx[i])] = rank;
    }
    int anchor = order_idx[0];
    for (int a : order_idx) {
      if (rank_of_action[static_cast<size_t>(a)] == 0) anchor = std::min(anchor, a);
    }
    const auto [value, support] =
        alignment_for_ordering(game, pareto_reps, anchor, {}, rank_of_action, cache);
    if (value > result.value) result.value = value;
    result.max_support = std::max(result.max_support, support);
  }
  result.exact = false;
  return result;
}

// --- subset indices -------------------------------------------------------------

namespace {

struct SubsetContext {
  int r = 0;
  std::vector<Eigen::MatrixXd> gram_basis;  // U' M_a M_a' U per action
  Eigen::MatrixXd gram_total_basis;         // U' (sum) U
};

SubsetContext make_subset_context(const Game& game) {
  SubsetContext ctx;
  ctx.r = game.observation_rank;
  const Eigen::MatrixXd& u = game.observation_basis;
  for (int a = 0; a < game.k; ++a) {
    ctx.gram_basis.push_back(u.transpose() * game.obs_gram[static_cast<size_t>(a)] * u);
  }
  ctx.gram_total_basis = u.transpose() * game.obs_gram_total * u;
  return ctx;
}

// Largest generalized eigenvalue of (target, design); -1 when the design is singular.
double max_generalized_eigenvalue(const Eigen::MatrixXd& target, const Eigen::MatrixXd& design) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> chk(design);
  const double lo = chk.eigenvalues().minCoeff();
  const double hi = chk.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || lo < 1e-12 * std::max(hi, 1.0)) return -1.0;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(target, design,
                                                                Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  return eig.eigenvalues().maxCoeff();
}

// Subset score for the w-style (per-action) or u-style (stacked) index.
double subset_value(const SubsetContext& ctx, const std::vector<int>& subset, bool stacked) {
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(ctx.r, ctx.r);
  for (int s : subset) design += ctx.gram_basis[static_cast<size_t>(s)];
  double worst = -1.0;
  if (stacked) {
    worst = max_generalized_eigenvalue(ctx.gram_total_basis, design);
  } else {
    for (const auto& gram : ctx.gram_basis) {
      const double v = max_generalized_eigenvalue(gram, design);
      if (v < 0.0) return -1.0;
      worst = std::max(worst, v);
    }
  }
  if (worst < 0.0) return -1.0;
  return static_cast<double>(subset.size()) * worst;
}

SubsetIndexResult subset_index(const Game& game, SubsetSearchMode mode, bool stacked) {
  const SubsetContext ctx = make_subset_context(game);
  SubsetIndexResult out;
  out.value = std::numeric_limits<double>::infinity();

  if (mode == SubsetSearchMode::kExhaustive) {
    if (game.k > kExhaustiveSubsetLimit) {
      throw InvalidInputError("subset index: exhaustive search limited to " +
                              std::to_string(kExhaustiveSubsetLimit) + " actions; use greedy");
    }
    for (std::uint32_t mask = 1; mask < (1u << game.k); ++mask) {
      std::vector<int> subset;
      for (int a = 0; a < game.k; ++a) {
        if (mask & (1u << a)) subset.push_back(a);
      }
      const double value = subset_value(ctx, subset, stacked);
      if (value >= 0.0 && value < out.value) {
        out.value = value;
        out.subset = subset;
      }
    }
    out.exact = true;
    if (!std::isfinite(out.value)) throw IllConditionedError("subset index: no spanning subset found");
    return out;
  }

  // Greedy: first reach a spanning subset by maximal rank growth, then accept
  // single additions while they reduce the score.
  std::vector<int> subset;
  std::vector<bool> used(static_cast<size_t>(game.k), false);
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(ctx.r, ctx.r);
  int current_rank = 0;
  while (current_rank < ctx.r) {
    int best_a = -1, best_rank = current_rank;
    for (int a = 0; a < game.k; ++a) {
      if (used[static_cast<size_t>(a)]) continue;
      const int rank = numerical_rank(design + ctx.gram_basis[static_cast<size_t>(a)], 1e-10);
      if (rank > best_rank) {
        best_rank = rank;
        best_a = a;
      }
    }
    if (best_a < 0) throw IllConditionedError("subset index: cannot span the observation space");
    design += ctx.gram_basis[static_cast<size_t>(best_a)];
    used[static_cast<size_t>(best_a)] = true;
    subset.push_back(best_a);
    current_rank = best_rank;
  }
  std::sort(subset.begin(), subset.end());
  double value = subset_value(ctx, subset, stacked);
  bool improved = true;
  while (improved && static_cast<int>(subset.size()) < game.k) {
    improved = false;
    int best_a = -1;
    double best_value = value;
    for (int a = 0; a < game.k; ++a) {
      if (used[static_cast<size_t>(a)]) continue;
      std::vector<int> candidate = subset;
      candidate.push_back(a);
      std::sort(candidate.begin(), candidate.end());
      const double v = subset_value(ctx, candidate, stacked);
      if (v >= 0.0 && v < best_value - 1e-12) {
        best_value = v;
        best_a = a;
      }
    }
    if (best_a >= 0) {
      used[static_cast<size_t>(best_a)] = true;
      subset.push_back(best_a);
      std::sort(subset.begin(), subset.end());
      value = best_value;
      improved = true;
    }
  }
  out.value = value;
  out.subset = subset;
  out.exact = false;
  return out;
}

}  // namespace

SubsetIndexResult w_star(const Game& game, SubsetSearchMode mode) {
  return subset_index(game, mode, /*stacked=*/false);
}

SubsetIndexResult u_star(const Game& game, SubsetSearchMode mode) {
  return subset_index(game, mode, /*stacked=*/true);
}

// --- estimator scale -------------------------------------------------------------

double omega_bound(const Game& game) {
  const LossSpace& space = game.loss_space;
  const bool graph_like =
      game.kind == GameKind::kFullInformation || game.kind == GameKind::kFeedbackGraph;

  // Coordinate-observation games admit scale bounds independent of the
  // neighborhood sizes: estimates subtract at most two inverse-probability
  // weighted coordinates.
  if (graph_like && space.kind == LossSpace::Kind::kLpBall && std::isinf(space.p)) {
    return std::sqrt(2.0) * space.radius;
  }
  if (graph_like && space.kind == LossSpace::Kind::kUnitBox01) {
    return 1.0;
  }

  // Generic fallback: the worst observation magnitude over the loss space.
  double worst = 0.0;
  for (int a = 0; a < game.k; ++a) {
    const Eigen::MatrixXd& m = game.observations[static_cast<size_t>(a)];
    double bound = 0.0;
    switch (space.kind) {
      case LossSpace::Kind::kLpBall: {
        if (std::isinf(space.p)) {
          double sum = 0.0;
          for (int j = 0; j < m.cols(); ++j) {
            const double col_l1 = m.col(j).lpNorm<1>();
            sum += col_l1 * col_l1;
          }
          bound = space.radius * std::sqrt(sum);
        } else if (space.p == 1.0) {
          for (int i = 0; i < m.rows(); ++i) bound = std::max(bound, m.row(i).norm());
          bound *= space.radius;
        } else {
          const double op_norm = m.jacobiSvd().singularValues()(0);
          const double factor =
              space.p >= 2.0 ? std::pow(static_cast<double>(game.d), 0.5 - 1.0 / space.p) : 1.0;
          bound = space.radius * factor * op_norm;
        }
        break;
      }
      case LossSpace::Kind::kUnitBox01: {
        double sum = 0.0;
        for (int j = 0; j < m.cols(); ++j) {
          const double pos = m.col(j).cwiseMax(0.0).sum();
          const double neg = -m.col(j).cwiseMin(0.0).sum();
          sum += std::max(pos, neg) * std::max(pos, neg);
        }
        bound = std::sqrt(sum);
        break;
      }
      case LossSpace::Kind::kPolarOfFeatures: {
        double sum = 0.0;
        for (int j = 0; j < m.cols(); ++j) {
          const Eigen::VectorXd col = m.col(j);
          const double s = std::max(support_function(game, col).value,
                                    support_function(game, -col).value);
          sum += s * s;
        }
        bound = std::sqrt(sum);
        break;
      }
    }
    worst = std::max(worst, bound);
  }
  return worst;
}

// --- graph quantities --------------------------------------------------------------

GraphConstants graph_constants(const Graph& graph) {
  const int k = graph.size();
  if (k > 20) throw InvalidInputError("graph_constants: exact search limited to 20 vertices");

  std::vector<std::uint32_t> adj_no_self(static_cast<size_t>(k), 0);
  std::vector<std::uint32_t> covers(static_cast<size_t>(k), 0);
  for (int a = 0; a < k; ++a) {
    for (int b : graph.neighbors(a)) {
      covers[static_cast<size_t>(a)] |= 1u << b;  // playing near a observes b
      if (b != a) adj_no_self[static_cast<size_t>(a)] |= 1u << b;
    }
  }

  // A vertex nobody observes makes domination undefined.
  std::uint32_t observed = 0;
  for (int a = 0; a < k; ++a) observed |= covers[static_cast<size_t>(a)];
  const std::uint32_t full = k == 32 ? ~0u : (1u << k) - 1;
  if (observed != full) {
    throw NoWitnessError("graph_constants: some vertex is observed by nobody");
  }

  GraphConstants out;
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    bool independent = true;
    int count = 0;
    std::uint32_t cover = 0;
    for (int a = 0; a < k; ++a) {
      if (!(mask & (1u << a))) continue;
      ++count;
      if (adj_no_self[static_cast<size_t>(a)] & mask) independent = false;
      cover |= covers[static_cast<size_t>(a)];
    }
    if (independent) out.independence_number = std::max(out.independence_number, count);
    if (cover == full &&
        (out.total_domination_number == 0 || count < out.total_domination_number)) {
      out.total_domination_number = count;
    }
  }
  return out;
}

bool graph_strongly_observable(const Graph& graph) {
  const int k = graph.size();
  for (int a = 0; a < k; ++a) {
    if (graph.has_edge(a, a)) continue;
    for (int b = 0; b < k; ++b) {
      if (b != a && !graph.has_edge(a, b)) return false;
    }
  }
  return true;
}

bool graph_weakly_observable(const Graph& graph) {
  const int k = graph.size();
  for (int a = 0; a < k; ++a) {
    bool observed = false;
    for (int b = 0; b < k && !observed; ++b) observed = graph.has_edge(b, a);
    if (!observed) return false;
  }
  return true;
}

// --- strong-graph estimation weights -------------------------------------------------

EstimationWeights strong_graph_weights(const Game& game, const Eigen::VectorXd& loss) {
  if (!game.graph.has_value() ||
      (game.kind != GameKind::kFullInformation && game.kind != GameKind::kFeedbackGraph)) {
    throw InvalidInputError("strong_graph_weights: needs a coordinate-observation graph game");
  }
  const Graph& graph = *game.graph;
  if (!graph_strongly_observable(graph)) {
    throw InvalidInputError("strong_graph_weights: graph is not strongly observable");
  }
  if (loss.size() != game.k) throw InvalidInputError("strong_graph_weights: loss dimension mismatch");

  const int k = game.k;
  int a_star = 0;
  for (int a = 1; a < k; ++a) {
    if (loss(a) < loss(a_star)) a_star = a;
  }

  EstimationWeights out;
  out.optimal_action = a_star;
  out.g1.assign(static_cast<size_t>(k), a_star);
  out.g2.assign(static_cast<size_t>(k), a_star);

  // Node elimination: repeatedly remove a low-loss vertex together with its
  // neighborhood; removed neighbors point their first estimator at it.
  std::vector<bool> alive(static_cast<size_t>(k), true);
  int alive_count = k;
  bool first_round = true;
  while (alive_count > 0) {
    int b = -1;
    if (first_round) {
      b = a_star;
      first_round = false;
    } else {
      for (int a = 0; a < k; ++a) {
        if (alive[static_cast<size_t>(a)] && (b < 0 || loss(a) < loss(b))) b = a;
      }
    }
    std::vector<int> removed;
    for (int a : graph.neighbors(b)) {
      if (alive[static_cast<size_t>(a)]) {
        if (a != a_star) out.g1[static_cast<size_t>(a)] = b;
        removed.push_back(a);
      }
    }
    if (alive[static_cast<size_t>(b)]) removed.push_back(b);
    for (int a : removed) {
      if (alive[static_cast<size_t>(a)]) {
        alive[static_cast<size_t>(a)] = false;
        --alive_count;
      }
    }
  }

  if (!graph.has_edge(a_star, a_star)) {
    int c = -1;
    for (int a = 0; a < k; ++a) {
      if (a != a_star && (c < 0 || loss(a) < loss(c))) c = a;
    }
    for (int a = 0; a < k; ++a) {
      if (a != a_star) out.g2[static_cast<size_t>(a)] = c;
    }
  }

  // Materialize the coefficient blocks over the observation columns.
  out.blocks.assign(static_cast<size_t>(k), {});
  std::vector<bool> in_support(static_cast<size_t>(k), false);
  const auto column_of = [&](int observer, int observed) {
    const std::vector<int> nbrs = graph.neighbors(observer);
    const auto it = std::find(nbrs.begin(), nbrs.end(), observed);
    if (it == nbrs.end())
      throw IllConditionedError("strong_graph_weights: pointer target is not observed");
    return static_cast<int>(it - nbrs.begin());
  };
  double beta = 0.0;
  for (int a = 0; a < k; ++a) {
    auto& blocks = out.blocks[static_cast<size_t>(a)];
    blocks.assign(static_cast<size_t>(k), Eigen::VectorXd());
    for (int c = 0; c < k; ++c) {
      blocks[static_cast<size_t>(c)] =
          Eigen::VectorXd::Zero(game.observations[static_cast<size_t>(c)].cols());
    }
    if (a == a_star) continue;
    blocks[static_cast<size_t>(out.g1[static_cast<size_t>(a)])](
        column_of(out.g1[static_cast<size_t>(a)], a)) += 1.0;
    blocks[static_cast<size_t>(out.g2[static_cast<size_t>(a)])](
        column_of(out.g2[static_cast<size_t>(a)], a_star)) -= 1.0;
    double norm_sum = 0.0;
    for (int c = 0; c < k; ++c) {
      const double n = blocks[static_cast<size_t>(c)].norm();
      norm_sum += n;
      if (n > 0.0) in_support[static_cast<size_t>(c)] = true;
    }
    beta = std::max(beta, norm_sum);
  }
  out.beta = beta;
  out.support_size = static_cast<int>(std::count(in_support.begin(), in_support.end(), true));
  return out;
}

// --- aggregate report -----------------------------------------------------------------

ConstantsReport compute_constants(const Game& game, std::optional<SubsetSearchMode> subset_mode,
                                  std::optional<BetaLocMode> beta_mode) {
  ConstantsReport report;
  const ObservabilityReport obs = classify(game);
  report.verdict = obs.verdict;

  const SubsetSearchMode smode = subset_mode.value_or(
      game.k <= kExhaustiveSubsetLimit ? SubsetSearchMode::kExhaustive : SubsetSearchMode::kGreedy);
  report.w_star = w_star(game, smode);
  report.u_star = u_star(game, smode);
  report.omega = omega_bound(game);

  if (obs.verdict == Observability::kLocallyObservable ||
      obs.verdict == Observability::kGloballyObservable ||
      obs.verdict == Observability::kTrivial) {
    try {
      report.beta_2_glo = beta_2_glo(game);
      report.beta_glo = beta_glo(game);
    } catch (const NoWitnessError&) {
      // Trivial games with disconnected observations can lack the alignment.
    }
  }
  if (obs.verdict == Observability::kLocallyObservable) {
    const int groups = static_cast<int>(duplicate_feature_groups(game).size());
    const BetaLocMode bmode =
        beta_mode.value_or(groups <= 7 ? BetaLocMode::kEnumerate : BetaLocMode::kSampled);
    report.beta_loc = beta_loc(game, bmode);
  }
  if (game.graph.has_value() && game.k <= 20) {
    report.graph = graph_constants(*game.graph);
  }
  return report;
}

}  // namespace linpm
