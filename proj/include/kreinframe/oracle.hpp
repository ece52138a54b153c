#ifndef KREINFRAME_ORACLE_HPP
#define KREINFRAME_ORACLE_HPP

// Brute-force comparators. Nothing here calls the fast paths of the frame
// modules; only spaces and subspaces are shared.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "kreinframe/subspace.hpp"

namespace kreinframe::oracle {

/// Extreme eigenvalues (A, B) of sum f_i f_i^T.
inline std::pair<double, double> hilbert_frame_bounds(const Matrix& vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(vectors * vectors.transpose(), Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  return {std::max(ev(0), 0.0), ev(ev.size() - 1)};
}

/// Extreme eigenvalues (C, D) of sum v_i^2 pi_{W_i}.
inline std::pair<double, double> hilbert_fusion_bounds(const std::vector<Subspace>& subspaces,
                                                       const std::vector<double>& weights) {
  if (subspaces.empty()) return {0.0, 0.0};
  if (subspaces.size() != weights.size())
    throw Error(ErrorCode::DimensionMismatch, "one weight per subspace");
  const Eigen::Index n = subspaces.front().ambient_dim();
  Matrix s = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < subspaces.size(); ++i)
    s += weights[i] * weights[i] * orthogonal_projection(subspaces[i]);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  return {std::max(ev(0), 0.0), ev(ev.size() - 1)};
}

inline bool completeness_check(const std::vector<Subspace>& subspaces, const KreinSpace& k,
                               double rank_tol = Tolerances{}.rank) {
  Eigen::Index cols = 0;
  for (const auto& w : subspaces) cols += w.dim();
  Matrix all(k.dim(), cols);
  Eigen::Index at = 0;
  for (const auto& w : subspaces) {
    check_dim(k, w.ambient_dim(), "subspace");
    all.middleCols(at, w.dim()) = w.basis();
    at += w.dim();
  }
  return detail::numerical_rank(all, rank_tol) == k.dim();
}

struct RayleighExtrema {
  double solver_min = 0.0;
  double solver_max = 0.0;
  double sampled_min = 0.0;
  double sampled_max = 0.0;
  std::uint64_t seed = 0;
  int samples = 0;
};

namespace detail {

inline Vector unit_sample(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> normal;
  Vector x(d);
  for (Eigen::Index i = 0; i < d; ++i) x(i) = normal(rng);
  return x / x.norm();
}

inline double quotient(const Matrix& a, const Matrix& g, const Vector& x) {
  return x.dot(a * x) / x.dot(g * x);
}

// Extreme Ritz value of the pencil (a, g) on the span of `basis`, computed by
// Jacobi rotations on the small projected problem.
inline Vector ritz_vector(const Matrix& a, const Matrix& g, const Matrix& basis, bool maximize) {
  const Eigen::Index k = basis.cols();
  // Orthonormalize the trial basis in the g-metric by modified Gram-Schmidt.
  Matrix v(basis.rows(), 0);
  for (Eigen::Index c = 0; c < k; ++c) {
    Vector y = basis.col(c);
    for (Eigen::Index j = 0; j < v.cols(); ++j) y -= v.col(j).dot(g * y) * v.col(j);
    const double norm = std::sqrt(std::max(y.dot(g * y), 0.0));
    if (norm <= 1e-12 * std::sqrt(basis.col(c).dot(g * basis.col(c)))) continue;
    v.conservativeResize(Eigen::NoChange, v.cols() + 1);
    v.rightCols(1) = y / norm;
  }
  Matrix h = v.transpose() * a * v;
  const Eigen::Index m = h.rows();
  Matrix rot = Matrix::Identity(m, m);
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = i + 1; j < m; ++j) off += h(i, j) * h(i, j);
    if (off < 1e-30) break;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        if (h(i, j) == 0.0) continue;
        const double theta = 0.5 * std::atan2(2.0 * h(i, j), h(j, j) - h(i, i));
        const double c = std::cos(theta), s = std::sin(theta);
        for (Eigen::Index r = 0; r < m; ++r) {
          const double hi = h(r, i), hj = h(r, j);
          h(r, i) = c * hi - s * hj;
          h(r, j) = s * hi + c * hj;
        }
        for (Eigen::Index r = 0; r < m; ++r) {
          const double hi = h(i, r), hj = h(j, r);
          h(i, r) = c * hi - s * hj;
          h(j, r) = s * hi + c * hj;
        }
        for (Eigen::Index r = 0; r < m; ++r) {
          const double qi = rot(r, i), qj = rot(r, j);
          rot(r, i) = c * qi - s * qj;
          rot(r, j) = s * qi + c * qj;
        }
      }
    }
  }
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < m; ++i)
    if (maximize ? h(i, i) > h(best, best) : h(i, i) < h(best, best)) best = i;
  Vector x = v * rot.col(best);
  return x / x.norm();
}

// Locally optimal block refinement: Ritz step on span{x, residual, previous step}.
inline double refine(const Matrix& a, const Matrix& g, Vector x, bool maximize, int steps) {
  Vector prev = Vector::Zero(x.size());
  double best = quotient(a, g, x);
  for (int it = 0; it < steps; ++it) {
    const double r = quotient(a, g, x);
    Vector res = a * x - r * (g * x);
    if (res.norm() <= 1e-15 * (a.norm() + std::abs(r) * g.norm())) break;
    Matrix trial(x.size(), prev.squaredNorm() > 0.0 ? 3 : 2);
    trial.col(0) = x;
    trial.col(1) = res / res.norm();
    if (trial.cols() == 3) trial.col(2) = prev / prev.norm();
    const Vector next = ritz_vector(a, g, trial, maximize);
    const double q = quotient(a, g, next);
    if (maximize ? q < best : q > best) break;
    best = q;
    prev = next - next.dot(x) * x;
    x = next;
  }
  return best;
}

}  // namespace detail

/// Extremes of x^T A x / x^T G x, by a G^{-1/2} congruence and by sampling
/// the unit sphere followed by a local Ritz refinement.
inline RayleighExtrema rayleigh_extrema(const Matrix& a, const Matrix& g, std::uint64_t seed = 0,
                                        int samples = 10000) {
  if (a.rows() != a.cols() || g.rows() != g.cols() || a.rows() != g.rows())
    throw Error(ErrorCode::DimensionMismatch, "A and G must be square of equal size");
  const Matrix as = kreinframe::detail::symmetrize(a);
  const Matrix gs = kreinframe::detail::symmetrize(g);
  Eigen::SelfAdjointEigenSolver<Matrix> geig(gs);
  if (geig.eigenvalues()(0) <= 0.0)
    throw Error(ErrorCode::NotPositiveDefinite,
                "G has eigenvalue " + std::to_string(geig.eigenvalues()(0)));
  const Matrix root_inv = geig.operatorInverseSqrt();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(root_inv * as * root_inv, Eigen::EigenvaluesOnly);

  RayleighExtrema r;
  r.seed = seed;
  r.samples = samples;
  r.solver_min = eig.eigenvalues()(0);
  r.solver_max = eig.eigenvalues()(eig.eigenvalues().size() - 1);

  std::mt19937_64 rng(seed);
  const Eigen::Index d = a.rows();
  Vector best_lo = detail::unit_sample(rng, d), best_hi = best_lo;
  double lo = detail::quotient(as, gs, best_lo), hi = lo;
  for (int s = 1; s < samples; ++s) {
    const Vector x = detail::unit_sample(rng, d);
    const double q = detail::quotient(as, gs, x);
    if (q < lo) {
      lo = q;
      best_lo = x;
    }
    if (q > hi) {
      hi = q;
      best_hi = x;
    }
  }
  const int steps = 500;
  r.sampled_min = std::min(lo, detail::refine(as, gs, best_lo, false, steps));
  r.sampled_max = std::max(hi, detail::refine(as, gs, best_hi, true, steps));
  return r;
}

struct GammaBrute {
  double sampled = 0.0;
  /// sqrt of the smallest eigenvalue of T^T T on the row space.
  double algebraic = 0.0;
  bool zero = false;
};

/// Minimizes ||T x|| over unit x in the numerical row space of T.
inline GammaBrute gamma_brute(const Matrix& t, std::uint64_t seed = 0, int samples = 10000,
                              double rank_tol = Tolerances{}.rank) {
  GammaBrute out;
  if (t.size() == 0 || t.cwiseAbs().maxCoeff() == 0.0) {
    out.zero = true;
    return out;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(t.transpose());
  qr.setThreshold(rank_tol);
  const Eigen::Index r = qr.rank();
  const Matrix rows = qr.householderQ() * Matrix::Identity(t.cols(), r);
  const Matrix a = rows.transpose() * t.transpose() * t * rows;
  const Matrix id = Matrix::Identity(r, r);
  // T^T T compressed to the row space, so numerical zeros never enter.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  out.algebraic = std::sqrt(std::max(eig.eigenvalues()(0), 0.0));

  std::mt19937_64 rng(seed);
  Vector best = detail::unit_sample(rng, r);
  double lo = detail::quotient(a, id, best);
  for (int s = 1; s < samples; ++s) {
    const Vector y = detail::unit_sample(rng, r);
    const double q = detail::quotient(a, id, y);
    if (q < lo) {
      lo = q;
      best = y;
    }
  }
  lo = std::min(lo, detail::refine(a, id, best, false, 500));
  out.sampled = std::sqrt(std::max(lo, 0.0));
  return out;
}

}  // namespace kreinframe::oracle

#endif  // KREINFRAME_ORACLE_HPP
