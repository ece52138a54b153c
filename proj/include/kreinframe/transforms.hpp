#ifndef KREINFRAME_TRANSFORMS_HPP
#define KREINFRAME_TRANSFORMS_HPP

#include <optional>
#include <string>
#include <vector>

#include "kreinframe/jfusion.hpp"

namespace kreinframe {

inline void check_operator(const Matrix& t, const KreinSpace& k) {
  if (t.rows() != k.dim() || t.cols() != k.dim())
    throw Error(ErrorCode::DimensionMismatch, "operator must be " + std::to_string(k.dim()) +
                                                  " x " + std::to_string(k.dim()));
}

/// {(T(W_i), v_i)}. Throws IndefiniteOrNeutralSubspace with a witness when an
/// image loses uniform definiteness.
inline WeightedSubspaceFamily apply_operator(const Matrix& t, const WeightedSubspaceFamily& f,
                                             const Tolerances& tol = {}) {
  check_operator(t, f.space);
  std::vector<Subspace> images;
  for (std::size_t i = 0; i < f.size(); ++i) {
    try {
      images.push_back(image(t, f.entries[i].subspace, tol.rank));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroSubspace) throw;
      throw Error(ErrorCode::IndefiniteOrNeutralSubspace,
                  "image of subspace " + std::to_string(i) + " is zero", i);
    }
  }
  return make_weighted_family(images, f.weights(), f.space, tol);
}

/// The three preservation predicates, evaluated on the family's own
/// subspaces and on M+ and M-.
struct PreservationReport {
  std::vector<bool> definiteness;  // per entry: T(W_i) uniformly definite, same sign
  bool plus_maximality = true;     // T(M+) maximal uniformly positive
  bool minus_maximality = true;
  std::vector<bool> regularity;  // per entry: T(W_i) regular
  bool plus_regular = true;
  bool minus_regular = true;
  bool sufficient = false;
  bool image_verdict = false;
  std::vector<Witness> witnesses;
};

inline bool is_surjective(const Matrix& t, double rank_tol) {
  Eigen::JacobiSVD<Matrix> svd(t);
  const Vector& sv = svd.singularValues();
  return sv.size() > 0 && sv(0) > 0.0 && sv(sv.size() - 1) > rank_tol * sv(0);
}

inline PreservationReport preservation_audit(const Matrix& t, const WeightedSubspaceFamily& f,
                                             const Tolerances& tol = {}) {
  check_operator(t, f.space);
  if (!is_surjective(t, tol.rank)) throw Error(ErrorCode::NotSurjective, "T is not surjective");
  PreservationReport r;
  bool all = true;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Classification c = classify(image(t, f.entries[i].subspace, tol.rank), tol);
    const bool keeps = c.sign() == f.entries[i].sign;
    r.definiteness.push_back(keeps);
    r.regularity.push_back(c.regular);
    if (!keeps)
      r.witnesses.push_back({"image of entry " + std::to_string(i) + " is " + to_string(c.kind),
                             c.witness});
    all = all && keeps && c.regular;
  }
  const auto audit_part = [&](const std::optional<Subspace>& m, int sign, bool& maximal,
                              bool& regular) {
    if (!m) return;
    const Classification c = classify(image(t, *m, tol.rank), tol);
    maximal = c.maximal_definite && c.sign() == sign;
    regular = c.regular;
    if (!maximal)
      r.witnesses.push_back({std::string("image of M") + (sign > 0 ? "+" : "-") + " is " +
                                 to_string(c.kind) + " of dimension " +
                                 std::to_string(image(t, *m, tol.rank).dim()),
                             c.witness});
  };
  audit_part(f.plus_span, 1, r.plus_maximality, r.plus_regular);
  audit_part(f.minus_span, -1, r.minus_maximality, r.minus_regular);
  r.sufficient = all && r.plus_maximality && r.minus_maximality && r.plus_regular && r.minus_regular;
  try {
    r.image_verdict = verify_j_fusion_frame(apply_operator(t, f, tol), tol).verdict;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::IndefiniteOrNeutralSubspace) throw;
    r.image_verdict = false;
  }
  return r;
}

struct ImageFusionCheck {
  bool sufficient = false;
  bool image_verdict = false;
  /// Evaluated only when the image verdict is true: K is the direct sum of
  /// the images of M+ and M-, maximal uniformly definite of opposite signs.
  std::optional<bool> decomposition;
  /// sufficient => image_verdict, and image_verdict => decomposition.
  bool consistent = true;
};

inline ImageFusionCheck image_fusion_check(const Matrix& t, const WeightedSubspaceFamily& f,
                                           const Tolerances& tol = {}) {
  detail::require_fusion_frame(f, tol);
  const PreservationReport audit = preservation_audit(t, f, tol);
  ImageFusionCheck out;
  out.sufficient = audit.sufficient;
  out.image_verdict = audit.image_verdict;
  if (out.image_verdict) {
    const WeightedSubspaceFamily img = apply_operator(t, f, tol);
    bool ok = img.plus_span.has_value() == f.plus_span.has_value() &&
              img.minus_span.has_value() == f.minus_span.has_value();
    Eigen::Index dims = 0;
    Matrix both(f.space.dim(), 0);
    int seen = 0;
    for (const auto* part : {&img.plus_span, &img.minus_span}) {
      if (!*part) continue;
      const Classification c = classify(**part, tol);
      ok = ok && c.maximal_definite;
      seen += c.sign();
      dims += (*part)->dim();
      both.conservativeResize(Eigen::NoChange, both.cols() + (*part)->dim());
      both.rightCols((*part)->dim()) = (*part)->basis();
    }
    // With both parts present the signs must differ; either order is accepted.
    if (img.plus_span && img.minus_span) ok = ok && seen == 0;
    ok = ok && dims == f.space.dim() && detail::numerical_rank(both, tol.rank) == f.space.dim();
    out.decomposition = ok;
  }
  out.consistent = (!out.sufficient || out.image_verdict) &&
                   (!out.image_verdict || out.decomposition.value_or(false));
  return out;
}

/// ||Q_V T# - Q_V T# Q_{T(V)}||. Index 0 of a NotRegular error means V, 1 means T(V).
inline double projection_commutation_residual(const Matrix& t, const Subspace& v,
                                              const Tolerances& tol = {}) {
  check_operator(t, v.space());
  if (!classify(v, tol).regular) throw Error(ErrorCode::NotRegular, "V is not regular", 0);
  const Subspace tv = image(t, v, tol.rank);
  const Classification ctv = classify(tv, tol);
  if (!ctv.regular)
    throw Error(ErrorCode::NotRegular, "T(V) is not regular", 1, ctv.witness.value_or(Vector()));
  const Matrix qv_ts = j_projection(v, tol) * j_adjoint(t, v.space());
  return detail::spectral_norm(qv_ts - qv_ts * j_projection(tv, tol));
}

}  // namespace kreinframe

#endif  // KREINFRAME_TRANSFORMS_HPP
