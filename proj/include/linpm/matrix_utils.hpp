#pragma once

#include <Eigen/Dense>

namespace linpm {

// Default relative cutoff under which singular values are treated as zero.
inline constexpr double kRankTolerance = 1e-10;

// Moore–Penrose pseudo-inverse via SVD.  Singular values below
// tol * sigma_max are dropped.  Throws InvalidInputError on non-finite input.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& a, double tol = kRankTolerance);

// Orthonormal basis of the column space (left singular vectors with singular
// value above tol * sigma_max).  An all-zero matrix yields a d x 0 result.
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& a, double tol = kRankTolerance);

// Numerical rank under the same cutoff.
int numerical_rank(const Eigen::MatrixXd& a, double tol = kRankTolerance);

// Least-squares solve min ||a x - b|| via SVD with the same cutoff.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              double tol = kRankTolerance);

// Probability vector over actions.  Construction validates: entries >= -1e-12
// (tiny negatives are clipped), sum within 1e-9 of one (then renormalized).
class Simplex {
 public:
  explicit Simplex(Eigen::VectorXd v);

  // Uniform distribution over k actions.
  static Simplex uniform(int k);
  // Point mass on one action.
  static Simplex point_mass(int k, int action);
  // Euclidean projection of an arbitrary vector onto the simplex.
  static Simplex project(const Eigen::VectorXd& v);

  const Eigen::VectorXd& vec() const { return v_; }
  double operator()(int i) const { return v_(i); }
  int size() const { return static_cast<int>(v_.size()); }

  // (1 - delta) * this + delta * uniform.
  Simplex mix_uniform(double delta) const;

 private:
  Eigen::VectorXd v_;
};

}  // namespace linpm
