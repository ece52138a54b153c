#ifndef KREINFRAME_JFRAME_HPP
#define KREINFRAME_JFRAME_HPP

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kreinframe/bounds.hpp"
#include "kreinframe/subspace.hpp"

namespace kreinframe {

/// A finite family of non-neutral vectors split by the sign of [f_i, f_i].
struct VectorFrame {
  KreinSpace space;
  Matrix vectors;  // n x m, one vector per column
  std::vector<int> signs;
  std::vector<std::size_t> plus_indices;
  std::vector<std::size_t> minus_indices;
  std::optional<Subspace> plus_span;
  std::optional<Subspace> minus_span;

  std::size_t size() const { return signs.size(); }

  Matrix columns(const std::vector<std::size_t>& idx) const {
    Matrix out(vectors.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j)
      out.col(static_cast<Eigen::Index>(j)) = vectors.col(static_cast<Eigen::Index>(idx[j]));
    return out;
  }
};

/// A failed condition, with an optional vector certifying it.
struct Witness {
  std::string description;
  std::optional<Vector> vector;
};

/// Rejects zero and neutral vectors; the rest are assigned to I+ or I-.
inline VectorFrame partition_by_sign(const Matrix& vectors, const KreinSpace& k,
                                     const Tolerances& tol = {}) {
  check_dim(k, vectors.rows(), "vectors");
  VectorFrame f{k, vectors, {}, {}, {}, std::nullopt, std::nullopt};
  for (Eigen::Index i = 0; i < vectors.cols(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const Vector v = vectors.col(i);
    const double norm2 = v.squaredNorm();
    if (norm2 <= tol.rank * tol.rank)
      throw Error(ErrorCode::ZeroVector, "vector " + std::to_string(i) + " vanishes", idx);
    const double self = v.dot(k.J() * v);
    if (std::abs(self) <= tol.def * norm2)
      throw Error(ErrorCode::NeutralVector, "vector " + std::to_string(i) + " is neutral", idx, v);
    if (self > 0.0) {
      f.signs.push_back(1);
      f.plus_indices.push_back(idx);
    } else {
      f.signs.push_back(-1);
      f.minus_indices.push_back(idx);
    }
  }
  if (!f.plus_indices.empty()) f.plus_span = span(f.columns(f.plus_indices), k, tol.rank);
  if (!f.minus_indices.empty()) f.minus_span = span(f.columns(f.minus_indices), k, tol.rank);
  return f;
}

/// S_I f = sum_{i in I} sigma_i [f, f_i] f_i over a subset of the family.
inline Matrix frame_operator(const VectorFrame& f, const std::vector<std::size_t>& subset) {
  const Eigen::Index n = f.space.dim();
  Matrix s = Matrix::Zero(n, n);
  for (std::size_t i : subset) {
    if (i >= f.size())
      throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(i), i);
    const Vector v = f.vectors.col(static_cast<Eigen::Index>(i));
    s += static_cast<double>(f.signs[i]) * v * (f.space.J() * v).transpose();
  }
  return s;
}

inline Matrix frame_operator(const VectorFrame& f) {
  std::vector<std::size_t> all(f.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return frame_operator(f, all);
}

struct JFrameReport {
  bool is_bessel = true;
  double bessel_constant = 0.0;
  bool is_j_frame = false;
  std::optional<Classification> plus_class;
  std::optional<Classification> minus_class;
  std::optional<JBounds> bounds;
  std::optional<JBounds> bound_estimates;
  std::vector<Witness> witnesses;
  double cond_s = 0.0;
};

namespace detail {

inline SynthesisPart vector_part(const VectorFrame& f, int sign) {
  const auto& idx = sign > 0 ? f.plus_indices : f.minus_indices;
  const auto m = static_cast<Eigen::Index>(idx.size());
  return {f.columns(idx), static_cast<double>(sign) * Matrix::Identity(m, m), sign};
}

// Shared by the vector and fusion verifiers: is the span of one sign part
// maximal uniformly definite of that sign?
inline bool check_part(const std::optional<Subspace>& part, int sign, const KreinSpace& k,
                       const Tolerances& tol, std::optional<Classification>& cls,
                       std::vector<Witness>& witnesses) {
  const Eigen::Index want = sign > 0 ? k.positive_dim() : k.negative_dim();
  const char* name = sign > 0 ? "positive" : "negative";
  if (!part) {
    if (want == 0) return true;
    witnesses.push_back({std::string(name) + " part dimension 0 < " + std::to_string(want),
                         std::nullopt});
    return false;
  }
  cls = classify(*part, tol);
  const SubspaceKind expected =
      sign > 0 ? SubspaceKind::UniformlyPositive : SubspaceKind::UniformlyNegative;
  bool ok = true;
  if (cls->kind != expected) {
    witnesses.push_back({std::string(name) + " span is " + to_string(cls->kind), cls->witness});
    ok = false;
  }
  if (part->dim() != want) {
    witnesses.push_back({std::string(name) + " part dimension " + std::to_string(part->dim()) +
                             " != " + std::to_string(want),
                         std::nullopt});
    ok = false;
  }
  return ok;
}

inline double condition_number(const Matrix& s) {
  Eigen::JacobiSVD<Matrix> svd(s);
  const Vector& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Optimal bounds per sign part. Requires a J-frame.
inline JBounds optimal_j_frame_bounds(const VectorFrame& f, const Tolerances& tol = {});

inline JFrameReport verify_j_frame(const VectorFrame& f, const Tolerances& tol = {}) {
  JFrameReport r;
  const Matrix& v = f.vectors;
  Eigen::SelfAdjointEigenSolver<Matrix> bessel(v * v.transpose(), Eigen::EigenvaluesOnly);
  r.bessel_constant = bessel.eigenvalues().maxCoeff();
  const bool plus_ok = detail::check_part(f.plus_span, 1, f.space, tol, r.plus_class, r.witnesses);
  const bool minus_ok =
      detail::check_part(f.minus_span, -1, f.space, tol, r.minus_class, r.witnesses);
  r.is_j_frame = plus_ok && minus_ok;
  r.cond_s = detail::condition_number(frame_operator(f));
  if (r.is_j_frame) {
    r.bounds = optimal_j_frame_bounds(f, tol);
    JBounds est;
    double gt = 0, nt = 0, gg = 0;
    if (!f.plus_indices.empty()) {
      auto [lo, hi] = detail::part_estimates(detail::vector_part(f, 1), f.space, tol.rank, gt, nt, gg);
      est.pos_lower = lo;
      est.pos_upper = hi;
    }
    if (!f.minus_indices.empty()) {
      auto [lo, hi] = detail::part_estimates(detail::vector_part(f, -1), f.space, tol.rank, gt, nt, gg);
      est.neg_lower = lo;
      est.neg_upper = hi;
    }
    r.bound_estimates = est;
  }
  return r;
}

inline JBounds optimal_j_frame_bounds(const VectorFrame& f, const Tolerances& tol) {
  JFrameReport check;
  const bool ok = detail::check_part(f.plus_span, 1, f.space, tol, check.plus_class, check.witnesses) &&
                  detail::check_part(f.minus_span, -1, f.space, tol, check.minus_class, check.witnesses);
  if (!ok) throw Error(ErrorCode::NotAJFrame, check.witnesses.front().description);
  JBounds b;
  if (!f.plus_indices.empty()) {
    auto [lo, hi] = detail::part_bounds(detail::vector_part(f, 1), f.space, tol.rank);
    b.pos_lower = lo;
    b.pos_upper = hi;
  }
  if (!f.minus_indices.empty()) {
    auto [lo, hi] = detail::part_bounds(detail::vector_part(f, -1), f.space, tol.rank);
    b.neg_lower = lo;
    b.neg_upper = hi;
  }
  return b;
}

/// Canonical dual {S^{-1} f_i}; the sign pattern is preserved.
inline VectorFrame canonical_dual(const VectorFrame& f, const Tolerances& tol = {}) {
  if (!verify_j_frame(f, tol).is_j_frame) throw Error(ErrorCode::NotAJFrame, "not a J-frame");
  const Matrix s = frame_operator(f);
  const Matrix dual = s.partialPivLu().solve(f.vectors);
  VectorFrame d = partition_by_sign(dual, f.space, tol);
  if (d.signs != f.signs)
    throw Error(ErrorCode::SingularFrameOperator, "dual changed the sign pattern");
  return d;
}

/// Optimal bounds of F and of its canonical dual, against the reciprocal rule.
struct DualBoundsCheck {
  JBounds primal;
  JBounds dual;
  JBounds predicted;  // primal.reciprocal()
  double relative_error = 0.0;
};

inline DualBoundsCheck dual_bounds_check(const VectorFrame& f, const Tolerances& tol = {}) {
  DualBoundsCheck c;
  c.primal = optimal_j_frame_bounds(f, tol);
  c.dual = optimal_j_frame_bounds(canonical_dual(f, tol), tol);
  c.predicted = c.primal.reciprocal();
  c.relative_error = c.dual.max_relative_difference(c.predicted);
  return c;
}

struct InterlacingResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

/// Both sides of
///   sum_{I1} s_i [f,f_i]^2 - sum_I s_i [S_{I1} f, S^{-1} f_i]^2
/// and the same expression over the complement of I1.
inline InterlacingResult interlacing_residual(const VectorFrame& f,
                                              const std::vector<std::size_t>& subset,
                                              const Vector& x, const Tolerances& tol = {}) {
  check_dim(f.space, x.size(), "f");
  std::vector<bool> in(f.size(), false);
  for (std::size_t i : subset) {
    if (i >= f.size()) throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(i), i);
    in[i] = true;
  }
  if (!verify_j_frame(f, tol).is_j_frame) throw Error(ErrorCode::NotAJFrame, "not a J-frame");
  std::vector<std::size_t> complement;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!in[i]) complement.push_back(i);

  const Matrix& jm = f.space.J();
  const Matrix dual = frame_operator(f).partialPivLu().solve(f.vectors);
  const auto side = [&](const std::vector<std::size_t>& idx) {
    double total = 0.0;
    for (std::size_t i : idx) {
      const double c = x.dot(jm * f.vectors.col(static_cast<Eigen::Index>(i)));
      total += f.signs[i] * c * c;
    }
    const Vector sx = frame_operator(f, idx) * x;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double c = sx.dot(jm * dual.col(static_cast<Eigen::Index>(i)));
      total -= f.signs[i] * c * c;
    }
    return total;
  };
  InterlacingResult r;
  r.lhs = side(subset);
  r.rhs = side(complement);
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

struct SequenceReport {
  bool is_sequence = false;
  std::optional<Classification> plus_class;
  std::optional<Classification> minus_class;
};

/// Both sign parts uniformly definite; maximality is not required.
inline SequenceReport is_j_frame_sequence(const Matrix& vectors, const KreinSpace& k,
                                          const Tolerances& tol = {}) {
  const VectorFrame f = partition_by_sign(vectors, k, tol);
  SequenceReport r;
  bool ok = true;
  if (f.plus_span) {
    r.plus_class = classify(*f.plus_span, tol);
    ok = ok && r.plus_class->kind == SubspaceKind::UniformlyPositive;
  }
  if (f.minus_span) {
    r.minus_class = classify(*f.minus_span, tol);
    ok = ok && r.minus_class->kind == SubspaceKind::UniformlyNegative;
  }
  r.is_sequence = ok;
  return r;
}

}  // namespace kreinframe

#endif  // KREINFRAME_JFRAME_HPP
