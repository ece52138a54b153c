#ifndef KREINFRAME_BOUNDS_HPP
#define KREINFRAME_BOUNDS_HPP

#include <algorithm>
#include <cmath>
#include <utility>

#include "kreinframe/subspace.hpp"

namespace kreinframe {

/// The four J-frame bounds, in ascending order:
/// neg_lower <= neg_upper < 0 < pos_lower <= pos_upper.
struct JBounds {
  double neg_lower = 0.0;
  double neg_upper = 0.0;
  double pos_lower = 0.0;
  double pos_upper = 0.0;

  bool well_ordered() const {
    return neg_lower <= neg_upper && neg_upper < 0.0 && 0.0 < pos_lower && pos_lower <= pos_upper;
  }

  /// Bounds predicted for the canonical dual.
  JBounds reciprocal() const {
    return {1.0 / neg_upper, 1.0 / neg_lower, 1.0 / pos_upper, 1.0 / pos_lower};
  }

  double max_relative_difference(const JBounds& other) const {
    const auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
    return std::max({rel(neg_lower, other.neg_lower), rel(neg_upper, other.neg_upper),
                     rel(pos_lower, other.pos_lower), rel(pos_upper, other.pos_upper)});
  }
};

namespace detail {

/// One sign part of a synthesis operator: columns `t` with a sign-definite
/// coefficient product `coef` (identity-like for vectors, block Gram for
/// subspace families). The part's frame operator is t coef^{-1} t^T J.
struct SynthesisPart {
  Matrix t;
  Matrix coef;
  int sign = 1;
};

inline Matrix part_frame_operator(const SynthesisPart& part, const KreinSpace& k) {
  if (part.t.cols() == 0) return Matrix::Zero(k.dim(), k.dim());
  return part.t * part.coef.partialPivLu().solve(part.t.transpose() * k.J());
}

/// Extremes of sum |...|^2 / [f, f] over f in the range of the part, as a
/// signed interval: (A+, B+) for the positive part, (B-, A-) for the negative.
inline std::pair<double, double> part_bounds(const SynthesisPart& part, const KreinSpace& k,
                                             double rank_tol) {
  const Matrix basis = orthonormal_basis(part.t, rank_tol);
  const double s = static_cast<double>(part.sign);
  const Matrix gram = s * (basis.transpose() * k.J() * basis);
  const Matrix c = part.t.transpose() * k.J() * basis;
  const Matrix coef_pos = s * part.coef;
  const Matrix form = c.transpose() * coef_pos.ldlt().solve(c);
  const auto [lo, hi] = generalized_extremes(form, gram);
  if (part.sign > 0) return {lo, hi};
  return {-hi, -lo};
}

/// Closed-form estimates: B = ||T||^2 / gamma(G_M), A = gamma(T)^2 gamma(G_M)^2.
inline std::pair<double, double> part_estimates(const SynthesisPart& part, const KreinSpace& k,
                                                double rank_tol, double& gamma_t, double& norm_t,
                                                double& gamma_g) {
  const Matrix basis = orthonormal_basis(part.t, rank_tol);
  const Matrix gram = basis.transpose() * k.J() * basis;
  gamma_g = smallest_nonzero_singular_value(gram, rank_tol);
  gamma_t = smallest_nonzero_singular_value(part.t, rank_tol);
  norm_t = spectral_norm(part.t);
  const double s = static_cast<double>(part.sign);
  const double outer = s * norm_t * norm_t / gamma_g;
  const double inner = s * gamma_t * gamma_t * gamma_g * gamma_g;
  if (part.sign > 0) return {inner, outer};
  return {outer, inner};
}

}  // namespace detail
}  // namespace kreinframe

#endif  // KREINFRAME_BOUNDS_HPP
