#ifndef KREINFRAME_KREIN_SPACE_HPP
#define KREINFRAME_KREIN_SPACE_HPP

#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "kreinframe/error.hpp"
#include "kreinframe/linalg.hpp"
#include "kreinframe/tolerance.hpp"

namespace kreinframe {

/// A finite-dimensional real Krein space given by its fundamental symmetry J.
///
/// Cheap to copy: the matrices live behind a shared immutable block, so
/// subspaces and families can hold the space by value.
class KreinSpace {
 public:
  Eigen::Index dim() const { return data_->j.rows(); }
  const Matrix& J() const { return data_->j; }
  Eigen::Index positive_dim() const { return data_->p; }
  Eigen::Index negative_dim() const { return dim() - data_->p; }
  const Matrix& plus_projector() const { return data_->plus; }
  const Matrix& minus_projector() const { return data_->minus; }
  /// Euclidean-orthonormal bases of K+ and K- (eigenvectors of J).
  const Matrix& plus_basis() const { return data_->plus_basis; }
  const Matrix& minus_basis() const { return data_->minus_basis; }

  bool same_as(const KreinSpace& other) const {
    return data_ == other.data_ || (dim() == other.dim() && J() == other.J());
  }

 private:
  struct Data {
    Matrix j;
    Matrix plus;
    Matrix minus;
    Matrix plus_basis;
    Matrix minus_basis;
    Eigen::Index p = 0;
  };

  explicit KreinSpace(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  std::shared_ptr<const Data> data_;

  friend KreinSpace make_krein_space(const Matrix& j, double sym_tol);
};

/// Validates J (symmetric involution) and precomputes P+, P- and the signature.
inline KreinSpace make_krein_space(const Matrix& j, double sym_tol = Tolerances{}.sym) {
  if (j.rows() != j.cols() || j.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "J must be a non-empty square matrix");
  const Eigen::Index n = j.rows();
  const Matrix id = Matrix::Identity(n, n);
  const double asym = (j - j.transpose()).norm();
  const double invol = (j * j - id).norm();
  if (asym > sym_tol || invol > sym_tol)
    throw Error(ErrorCode::NotAnInvolution,
                "||J - J^T|| = " + std::to_string(asym) + ", ||J J - I|| = " + std::to_string(invol));

  auto d = std::make_shared<KreinSpace::Data>();
  d->j = detail::symmetrize(j);
  d->plus = 0.5 * (id + d->j);
  d->minus = 0.5 * (id - d->j);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(d->j);
  const Vector& lambda = eig.eigenvalues();  // ascending: -1 block, then +1 block
  Eigen::Index q = 0;
  while (q < n && lambda(q) < 0.0) ++q;
  d->p = n - q;
  const double trace_p = d->plus.trace();
  if (std::abs(trace_p - static_cast<double>(d->p)) > 0.5)
    throw Error(ErrorCode::NotAnInvolution, "signature inconsistent with trace((I+J)/2)");
  d->minus_basis = eig.eigenvectors().leftCols(q);
  d->plus_basis = eig.eigenvectors().rightCols(d->p);
  detail::canonicalize_signs(d->minus_basis);
  detail::canonicalize_signs(d->plus_basis);
  return KreinSpace(std::move(d));
}

/// Convenience: J = diag(signs).
inline KreinSpace make_diagonal_krein_space(const Vector& signs) {
  return make_krein_space(signs.asDiagonal().toDenseMatrix());
}

inline void check_dim(const KreinSpace& k, Eigen::Index rows, const char* what) {
  if (rows != k.dim())
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " has dimension " + std::to_string(rows) +
                    ", space has " + std::to_string(k.dim()));
}

/// [x, y] = x^T J y.
inline double indefinite_product(const Vector& x, const Vector& y, const KreinSpace& k) {
  check_dim(k, x.size(), "x");
  check_dim(k, y.size(), "y");
  return x.dot(k.J() * y);
}

/// Associated Hilbert product [x, J y] = <x, y>.
inline double j_product(const Vector& x, const Vector& y, const KreinSpace& k) {
  check_dim(k, x.size(), "x");
  check_dim(k, y.size(), "y");
  return x.dot(y);
}

/// T# = J T^T J, the adjoint with respect to the indefinite product.
inline Matrix j_adjoint(const Matrix& t, const KreinSpace& k) {
  if (t.rows() != k.dim() || t.cols() != k.dim())
    throw Error(ErrorCode::DimensionMismatch, "operator must be n x n");
  return k.J() * t.transpose() * k.J();
}

}  // namespace kreinframe

#endif  // KREINFRAME_KREIN_SPACE_HPP
