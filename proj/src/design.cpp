#include "linpm/design.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "linpm/errors.hpp"

namespace linpm {

namespace {

void check_design_args(const Game& game, const Simplex& pi, double delta, double max_delta) {
  if (pi.size() != game.k) throw InvalidInputError("design: distribution size mismatch");
  if (!(delta >= 0.0) || delta > max_delta)
    throw InvalidInputError("design: delta outside [0, " + std::to_string(max_delta) + "]");
}

}  // namespace

Eigen::MatrixXd design_matrix(const Game& game, const Simplex& pi, double delta) {
  check_design_args(game, pi, delta, 0.5);
  Eigen::MatrixXd q = (delta / game.k) * game.obs_gram_total;
  for (int a = 0; a < game.k; ++a) {
    q += (1.0 - delta) * pi(a) * game.obs_gram[static_cast<size_t>(a)];
  }
  return q;
}

Eigen::MatrixXd q_dagger(const Game& game, const Simplex& pi, double delta) {
  check_design_args(game, pi, delta, 0.5);
  const Eigen::MatrixXd& u = game.observation_basis;
  const Eigen::MatrixXd q = design_matrix(game, pi, delta);
  const Eigen::MatrixXd b = u.transpose() * q * u;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  if (eig.info() != Eigen::Success)
    throw IllConditionedError("q_dagger: eigendecomposition failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lo = lambda.minCoeff();
  const double hi = lambda.maxCoeff();
  if (!(lo > 0.0) || hi / lo > kDesignConditionLimit) {
    throw IllConditionedError(
        "q_dagger: restricted design matrix is singular or ill-conditioned "
        "(needs delta > 0 or a spanning support)");
  }
  const Eigen::MatrixXd b_inv =
      eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return u * b_inv * u.transpose();
}

OptimalDesign optimal_design(const Game& game, double tol, int max_iters) {
  const Eigen::MatrixXd& u = game.observation_basis;
  const int r = game.observation_rank;
  const int k = game.k;
  if (r == 0) throw InvalidInputError("optimal_design: all observations are zero");

  // Restricted per-action blocks W_a = U' M_a.
  std::vector<Eigen::MatrixXd> w;
  for (int a = 0; a < k; ++a) w.push_back(u.transpose() * game.observations[static_cast<size_t>(a)]);

  Eigen::VectorXd pi = Eigen::VectorXd::Constant(k, 1.0 / k);
  const auto restricted = [&](const Eigen::VectorXd& p) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(r, r);
    for (int a = 0; a < k; ++a) {
      if (p(a) > 0.0) b += p(a) * w[static_cast<size_t>(a)] * w[static_cast<size_t>(a)].transpose();
    }
    return b;
  };
  const auto logdet = [&](const Eigen::MatrixXd& b) {
    const Eigen::LLT<Eigen::MatrixXd> llt(b);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    for (int i = 0; i < r; ++i) v += std::log(llt.matrixL()(i, i));
    return 2.0 * v;
  };

  OptimalDesign out{Simplex::uniform(k), 0.0, 0};
  for (int iter = 0; iter < max_iters; ++iter) {
    const Eigen::MatrixXd b = restricted(pi);
    const Eigen::MatrixXd b_inv = b.ldlt().solve(Eigen::MatrixXd::Identity(r, r));
    // Leverage of each action under the current design.
    double best_lev = -1.0;
    int best_a = 0;
    for (int a = 0; a < k; ++a) {
      const double lev = (w[static_cast<size_t>(a)].transpose() * b_inv * w[static_cast<size_t>(a)]).trace();
      if (lev > best_lev) {
        best_lev = lev;
        best_a = a;
      }
    }
    out.value = best_lev;
    out.iterations = iter;
    if (best_lev - r <= tol) break;  // duality gap of the log-det program

    // Line search on the segment toward the most-leveraged action.
    const Eigen::VectorXd dir = Eigen::VectorXd::Unit(k, best_a);
    double lo = 0.0, hi = 1.0;
    for (int step = 0; step < 60; ++step) {
      const double g1 = lo + (hi - lo) / 3.0, g2 = hi - (hi - lo) / 3.0;
      const double f1 = logdet(restricted((1.0 - g1) * pi + g1 * dir));
      const double f2 = logdet(restricted((1.0 - g2) * pi + g2 * dir));
      if (f1 < f2) {
        lo = g1;
      } else {
        hi = g2;
      }
    }
    const double gamma = 0.5 * (lo + hi);
    pi = (1.0 - gamma) * pi + gamma * dir;
    pi = pi.cwiseMax(0.0);
    pi /= pi.sum();
  }
  out.pi = Simplex(pi);
  return out;
}

}  // namespace linpm
