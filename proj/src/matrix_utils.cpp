#include "linpm/matrix_utils.hpp"

#include <algorithm>
#include <cmath>

#include "linpm/errors.hpp"

namespace linpm {

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& a, double tol) {
  if (!a.allFinite()) throw InvalidInputError("pseudoinverse: matrix has non-finite entries");
  if (a.size() == 0) return Eigen::MatrixXd::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? tol * sigma(0) : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sigma.size());
  for (int i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff && sigma(i) > 0.0) inv(i) = 1.0 / sigma(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& a, double tol) {
  if (!a.allFinite()) throw InvalidInputError("orthonormal_basis: matrix has non-finite entries");
  if (a.size() == 0) return Eigen::MatrixXd::Zero(a.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? tol * sigma(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff && sigma(i) > 0.0) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

int numerical_rank(const Eigen::MatrixXd& a, double tol) {
  return static_cast<int>(orthonormal_basis(a, tol).cols());
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol) {
  return pseudoinverse(a, tol) * b;
}

Simplex::Simplex(Eigen::VectorXd v) : v_(std::move(v)) {
  if (v_.size() < 1) throw InvalidInputError("Simplex: needs at least one entry");
  if (!v_.allFinite()) throw InvalidInputError("Simplex: non-finite entry");
  for (int i = 0; i < v_.size(); ++i) {
    if (v_(i) < -1e-12) throw InvalidInputError("Simplex: negative entry");
    v_(i) = std::max(v_(i), 0.0);
  }
  const double total = v_.sum();
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInputError("Simplex: entries do not sum to one");
  v_ /= total;
}

Simplex Simplex::uniform(int k) {
  if (k < 1) throw InvalidInputError("Simplex::uniform: k must be positive");
  return Simplex(Eigen::VectorXd::Constant(k, 1.0 / k));
}

Simplex Simplex::point_mass(int k, int action) {
  if (k < 1 || action < 0 || action >= k) throw InvalidInputError("Simplex::point_mass: bad index");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
  v(action) = 1.0;
  return Simplex(std::move(v));
}

// Euclidean projection onto the simplex (sort-based threshold algorithm).
Simplex Simplex::project(const Eigen::VectorXd& v) {
  const int k = static_cast<int>(v.size());
  if (k < 1) throw InvalidInputError("Simplex::project: empty vector");
  std::vector<double> u(v.data(), v.data() + k);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double running = 0.0, theta = 0.0;
  int support = 0;
  for (int i = 0; i < k; ++i) {
    running += u[static_cast<size_t>(i)];
    const double candidate = (running - 1.0) / (i + 1);
    if (u[static_cast<size_t>(i)] - candidate > 0.0) {
      theta = candidate;
      support = i + 1;
    }
  }
  (void)support;
  Eigen::VectorXd out(k);
  for (int i = 0; i < k; ++i) out(i) = std::max(v(i) - theta, 0.0);
  out /= out.sum();
  return Simplex(std::move(out));
}

Simplex Simplex::mix_uniform(double delta) const {
  if (delta < 0.0 || delta > 1.0) throw InvalidInputError("mix_uniform: delta outside [0,1]");
  const int k = size();
  return Simplex((1.0 - delta) * v_ + delta * Eigen::VectorXd::Constant(k, 1.0 / k));
}

}  // namespace linpm
