#ifndef KREINFRAME_LINALG_HPP
#define KREINFRAME_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace kreinframe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

// Flip each column so that its largest-magnitude entry is positive.
inline void canonicalize_signs(Matrix& basis) {
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    Eigen::Index at = 0;
    basis.col(c).cwiseAbs().maxCoeff(&at);
    if (basis(at, c) < 0.0) basis.col(c) *= -1.0;
  }
}

/// Euclidean-orthonormal basis of the column span of `generators`, via QR
/// with column pivoting. Pivots below `rel_tol * max_pivot` are dropped.
inline Matrix orthonormal_basis(const Matrix& generators, double rel_tol) {
  const Eigen::Index n = generators.rows();
  if (generators.cols() == 0) return Matrix(n, 0);
  Eigen::ColPivHouseholderQR<Matrix> qr(generators);
  qr.setThreshold(rel_tol);
  const Eigen::Index r = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(n, r);
  canonicalize_signs(q);
  return q;
}

/// Smallest singular value above `rel_tol * sigma_max`; 0 for the zero matrix.
inline double smallest_nonzero_singular_value(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s(0) <= 0.0) return 0.0;
  double out = s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) out = s(i);
  return out;
}

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Extreme eigenvalues of the pencil (a, g) with g symmetric positive
/// definite. Falls back to the QZ solver when g is close to singular.
inline std::pair<double, double> generalized_extremes(const Matrix& a, const Matrix& g) {
  const Matrix as = symmetrize(a);
  const Matrix gs = symmetrize(g);
  Eigen::SelfAdjointEigenSolver<Matrix> gsolve(gs, Eigen::EigenvaluesOnly);
  const double gmin = gsolve.eigenvalues().minCoeff();
  const double gmax = gsolve.eigenvalues().maxCoeff();
  if (gmin > 1e-6 * std::max(1.0, gmax)) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(as, gs, Eigen::EigenvaluesOnly);
    return {solver.eigenvalues().minCoeff(), solver.eigenvalues().maxCoeff()};
  }
  Eigen::GeneralizedEigenSolver<Matrix> qz(as, gs, false);
  const auto alphas = qz.alphas();
  const auto betas = qz.betas();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < alphas.size(); ++i) {
    const double lambda = alphas(i).real() / betas(i);
    lo = std::min(lo, lambda);
    hi = std::max(hi, lambda);
  }
  return {lo, hi};
}

/// Relative-rank of a matrix under the same rule as orthonormal_basis.
inline Eigen::Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s(0) <= 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

}  // namespace detail
}  // namespace kreinframe

#endif  // KREINFRAME_LINALG_HPP
