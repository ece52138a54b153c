#ifndef KREINFRAME_SUBSPACE_HPP
#define KREINFRAME_SUBSPACE_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kreinframe/krein_space.hpp"

namespace kreinframe {

/// A subspace of a Krein space, stored as a basis that is orthonormal in the
/// associated Hilbert product (B^T B = I).
class Subspace {
 public:
  const KreinSpace& space() const { return space_; }
  const Matrix& basis() const { return basis_; }
  Eigen::Index dim() const { return basis_.cols(); }
  Eigen::Index ambient_dim() const { return basis_.rows(); }

  /// Wraps a basis already known to be orthonormal; no checks beyond shape.
  static Subspace from_orthonormal(KreinSpace k, Matrix basis) {
    check_dim(k, basis.rows(), "basis");
    return Subspace(std::move(k), std::move(basis));
  }

 private:
  Subspace(KreinSpace k, Matrix b) : space_(std::move(k)), basis_(std::move(b)) {}
  KreinSpace space_;
  Matrix basis_;
};

/// Span of the columns of `generators`. Rank-deficient input is reduced.
inline Subspace span(const Matrix& generators, const KreinSpace& k,
                     double rank_tol = Tolerances{}.rank) {
  check_dim(k, generators.rows(), "generators");
  if (generators.cols() == 0 || generators.colwise().norm().maxCoeff() <= rank_tol)
    throw Error(ErrorCode::ZeroSubspace, "all generating vectors vanish");
  return Subspace::from_orthonormal(k, detail::orthonormal_basis(generators, rank_tol));
}

inline Subspace span(std::span<const Vector> vectors, const KreinSpace& k,
                     double rank_tol = Tolerances{}.rank) {
  Matrix g(k.dim(), static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    check_dim(k, vectors[i].size(), "vector");
    g.col(static_cast<Eigen::Index>(i)) = vectors[i];
  }
  return span(g, k, rank_tol);
}

/// Compression of J to the subspace: G = B^T J B.
struct GramOperator {
  Matrix matrix;
};

inline GramOperator gram_operator(const Subspace& w) {
  const Matrix& b = w.basis();
  return {detail::symmetrize(b.transpose() * w.space().J() * b)};
}

enum class SubspaceKind {
  UniformlyPositive,
  UniformlyNegative,
  PositiveNonUniform,
  NegativeNonUniform,
  Neutral,
  Indefinite,
};

inline const char* to_string(SubspaceKind kind) {
  switch (kind) {
    case SubspaceKind::UniformlyPositive: return "UniformlyPositive";
    case SubspaceKind::UniformlyNegative: return "UniformlyNegative";
    case SubspaceKind::PositiveNonUniform: return "PositiveNonUniform";
    case SubspaceKind::NegativeNonUniform: return "NegativeNonUniform";
    case SubspaceKind::Neutral: return "Neutral";
    case SubspaceKind::Indefinite: return "Indefinite";
  }
  return "Unknown";
}

inline bool is_uniformly_definite(SubspaceKind kind) {
  return kind == SubspaceKind::UniformlyPositive || kind == SubspaceKind::UniformlyNegative;
}

struct Classification {
  SubspaceKind kind = SubspaceKind::Neutral;
  /// Uniform kinds: min |eigenvalue| of the correct sign. Otherwise min |eigenvalue|.
  double margin = 0.0;
  bool regular = false;
  /// Smallest nonzero singular value of G (0 when G vanishes).
  double gamma = 0.0;
  bool maximal_definite = false;
  /// Unit vector in the subspace with [w, w] ~ 0 for the non-uniform kinds.
  std::optional<Vector> witness;
  Vector eigenvalues;

  int sign() const {
    if (kind == SubspaceKind::UniformlyPositive) return 1;
    if (kind == SubspaceKind::UniformlyNegative) return -1;
    return 0;
  }
};

/// Classifies W from the spectrum of its Gram operator.
inline Classification classify(const Subspace& w, const Tolerances& tol = {}) {
  const Matrix g = gram_operator(w).matrix;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  const Vector& lambda = eig.eigenvalues();
  const Matrix& vecs = eig.eigenvectors();
  const Eigen::Index k = lambda.size();
  const double lo = lambda(0);
  const double hi = lambda(k - 1);
  const double tau = tol.def;

  Classification c;
  c.eigenvalues = lambda;
  Eigen::Index small_at = 0;
  const double min_abs = lambda.cwiseAbs().minCoeff(&small_at);
  c.margin = min_abs;
  c.regular = min_abs > tau;
  c.gamma = detail::smallest_nonzero_singular_value(g, tol.rank);

  const auto lift = [&](const Vector& coeffs) -> Vector {
    Vector v = w.basis() * coeffs;
    return v / v.norm();
  };

  if (lo >= tau) {
    c.kind = SubspaceKind::UniformlyPositive;
    c.margin = lo;
  } else if (hi <= -tau) {
    c.kind = SubspaceKind::UniformlyNegative;
    c.margin = -hi;
  } else if (std::max(std::abs(lo), std::abs(hi)) < tau) {
    c.kind = SubspaceKind::Neutral;
    c.witness = lift(vecs.col(0));
  } else if (lo <= -tau && hi >= tau) {
    c.kind = SubspaceKind::Indefinite;
    // sqrt(-lo) u_hi + sqrt(hi) u_lo is neutral.
    c.witness = lift(std::sqrt(-lo) * vecs.col(k - 1) + std::sqrt(hi) * vecs.col(0));
  } else {
    c.kind = lo > -tau ? SubspaceKind::PositiveNonUniform : SubspaceKind::NegativeNonUniform;
    c.witness = lift(vecs.col(small_at));
  }
  c.maximal_definite =
      (c.kind == SubspaceKind::UniformlyPositive && w.dim() == w.space().positive_dim()) ||
      (c.kind == SubspaceKind::UniformlyNegative && w.dim() == w.space().negative_dim());
  return c;
}

/// Orthogonal projection in the associated Hilbert space: B B^T.
inline Matrix orthogonal_projection(const Subspace& w) {
  return w.basis() * w.basis().transpose();
}

/// J-orthogonal projection Q = B G^{-1} B^T J. Requires W regular.
inline Matrix j_projection(const Subspace& w, const Tolerances& tol = {}) {
  const Matrix g = gram_operator(w).matrix;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
  const double smin = eig.eigenvalues().cwiseAbs().minCoeff();
  if (smin <= tol.def)
    throw Error(ErrorCode::NotRegular,
                "Gram operator is singular (sigma_min = " + std::to_string(smin) + ")");
  const Matrix bt_j = w.basis().transpose() * w.space().J();
  return w.basis() * g.partialPivLu().solve(bt_j);
}

/// Distance of W's basis from M, in the associated Hilbert norm.
inline double containment_residual(const Subspace& w, const Subspace& m) {
  return (w.basis() - orthogonal_projection(m) * w.basis()).norm();
}

inline bool same_span(const Subspace& a, const Subspace& b, double tol) {
  return a.dim() == b.dim() && containment_residual(a, b) <= tol &&
         containment_residual(b, a) <= tol;
}

/// Residual ||(Q_W - pi_W) pi_M|| for W contained in a uniformly definite M.
inline double check_rjpp(const Subspace& w, const Subspace& m, const Tolerances& tol = {}) {
  if (containment_residual(w, m) > tol.num)
    throw Error(ErrorCode::NotContained, "W is not contained in M");
  const Classification cm = classify(m, tol);
  if (!is_uniformly_definite(cm.kind))
    throw Error(ErrorCode::NotUniformlyDefinite,
                std::string("M is ") + to_string(cm.kind), 0, cm.witness.value_or(Vector()));
  return detail::spectral_norm((j_projection(w, tol) - orthogonal_projection(w)) *
                               orthogonal_projection(m));
}

/// Smallest nonzero singular value (0 for the zero matrix).
inline double reduced_min_modulus(const Matrix& t, double rank_tol = Tolerances{}.rank) {
  return detail::smallest_nonzero_singular_value(t, rank_tol);
}

/// Angular operator of a uniformly definite subspace with respect to the
/// canonical decomposition, together with the norm relation it satisfies.
struct AngularOperator {
  /// n x n operator, zero outside its domain P+W (P-W for the negative case).
  Matrix matrix;
  double norm = 0.0;
  int sign = 1;
  /// gamma(G_W).
  double gram_gamma = 0.0;
  /// (1 - gamma) / (1 + gamma); equals norm^2.
  double norm_ratio = 0.0;
  double squared_relation_residual = 0.0;
  /// |norm - (1 - gamma)/(1 + gamma)|: the unsquared reading of the relation.
  double unsquared_discrepancy = 0.0;
};

inline AngularOperator angular_operator(const Subspace& w, const Tolerances& tol = {}) {
  const Classification c = classify(w, tol);
  if (!is_uniformly_definite(c.kind))
    throw Error(ErrorCode::NotDefinite, std::string("subspace is ") + to_string(c.kind), 0,
                c.witness.value_or(Vector()));
  const KreinSpace& k = w.space();
  const bool positive = c.sign() > 0;
  const Matrix& dom = positive ? k.plus_basis() : k.minus_basis();
  const Matrix& cod = positive ? k.minus_basis() : k.plus_basis();
  const Matrix a = dom.transpose() * w.basis();  // coordinates of the dominant part
  const Matrix b = cod.transpose() * w.basis();

  AngularOperator out;
  out.sign = c.sign();
  out.matrix = Matrix::Zero(k.dim(), k.dim());
  if (b.rows() > 0) {
    // a has full column rank for a uniformly definite subspace.
    const Matrix a_pinv = a.completeOrthogonalDecomposition().pseudoInverse();
    const Matrix kc = b * a_pinv;
    out.matrix = cod * kc * dom.transpose();
    out.norm = detail::spectral_norm(kc);
  }
  out.gram_gamma = c.gamma;
  out.norm_ratio = (1.0 - c.gamma) / (1.0 + c.gamma);
  out.squared_relation_residual = std::abs(out.norm * out.norm - out.norm_ratio);
  out.unsquared_discrepancy = std::abs(out.norm - out.norm_ratio);
  return out;
}

/// Image T(W) as a subspace.
inline Subspace image(const Matrix& t, const Subspace& w, double rank_tol = Tolerances{}.rank) {
  return span(t * w.basis(), w.space(), rank_tol);
}

}  // namespace kreinframe

#endif  // KREINFRAME_SUBSPACE_HPP
