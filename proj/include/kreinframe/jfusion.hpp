#ifndef KREINFRAME_JFUSION_HPP
#define KREINFRAME_JFUSION_HPP

#include <optional>
#include <string>
#include <vector>

#include "kreinframe/bounds.hpp"
#include "kreinframe/jframe.hpp"
#include "kreinframe/oracle.hpp"
#include "kreinframe/subspace.hpp"

namespace kreinframe {

struct FusionEntry {
  Subspace subspace;
  double weight = 1.0;
  int sign = 1;
};

/// Weighted family of uniformly definite subspaces with its direct-sum layout.
struct WeightedSubspaceFamily {
  KreinSpace space;
  std::vector<FusionEntry> entries;
  /// offsets[i] is the first coordinate of block i; offsets.back() is the total.
  std::vector<Eigen::Index> offsets;
  std::vector<std::size_t> plus_indices;
  std::vector<std::size_t> minus_indices;
  std::optional<Subspace> plus_span;
  std::optional<Subspace> minus_span;

  std::size_t size() const { return entries.size(); }
  Eigen::Index total_dim() const { return offsets.back(); }

  std::vector<Subspace> subspaces() const {
    std::vector<Subspace> out;
    for (const auto& e : entries) out.push_back(e.subspace);
    return out;
  }
  std::vector<double> weights() const {
    std::vector<double> out;
    for (const auto& e : entries) out.push_back(e.weight);
    return out;
  }
};

inline WeightedSubspaceFamily make_weighted_family(const std::vector<Subspace>& subspaces,
                                                   const std::vector<double>& weights,
                                                   const KreinSpace& k, const Tolerances& tol = {}) {
  if (subspaces.size() != weights.size())
    throw Error(ErrorCode::DimensionMismatch, "one weight per subspace is required");
  WeightedSubspaceFamily f{k, {}, {0}, {}, {}, std::nullopt, std::nullopt};
  Matrix plus(k.dim(), 0), minus(k.dim(), 0);
  for (std::size_t i = 0; i < subspaces.size(); ++i) {
    const Subspace& w = subspaces[i];
    check_dim(k, w.ambient_dim(), "subspace");
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw Error(ErrorCode::NonPositiveWeight, "weight " + std::to_string(i) + " is not positive", i);
    const Classification c = classify(w, tol);
    if (!is_uniformly_definite(c.kind))
      throw Error(ErrorCode::IndefiniteOrNeutralSubspace,
                  "subspace " + std::to_string(i) + " is " + to_string(c.kind), i,
                  c.witness.value_or(Vector()));
    f.entries.push_back({w, weights[i], c.sign()});
    f.offsets.push_back(f.offsets.back() + w.dim());
    Matrix& part = c.sign() > 0 ? plus : minus;
    part.conservativeResize(Eigen::NoChange, part.cols() + w.dim());
    part.rightCols(w.dim()) = w.basis();
    (c.sign() > 0 ? f.plus_indices : f.minus_indices).push_back(i);
  }
  if (plus.cols() > 0) f.plus_span = span(plus, k, tol.rank);
  if (minus.cols() > 0) f.minus_span = span(minus, k, tol.rank);
  return f;
}

/// Coordinates of the direct sum: per-entry basis coordinates.
struct DirectSumSpace {
  Eigen::Index dim = 0;
  /// +I on positive blocks, -I on negative blocks.
  Matrix j2;
  /// Block-diagonal Gram matrices: the indefinite product sum [f_i, g_i] in coordinates.
  Matrix gram;
};

inline DirectSumSpace direct_sum_space(const WeightedSubspaceFamily& f) {
  DirectSumSpace d;
  d.dim = f.total_dim();
  d.j2 = Matrix::Zero(d.dim, d.dim);
  d.gram = Matrix::Zero(d.dim, d.dim);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Eigen::Index at = f.offsets[i];
    const Eigen::Index k = f.entries[i].subspace.dim();
    d.j2.block(at, at, k, k) = f.entries[i].sign * Matrix::Identity(k, k);
    d.gram.block(at, at, k, k) = gram_operator(f.entries[i].subspace).matrix;
  }
  return d;
}

struct FusionSynthesis {
  Matrix t;
  Matrix t_plus;
  Matrix t_minus;
};

namespace detail {

inline SynthesisPart fusion_part(const WeightedSubspaceFamily& f,
                                 const std::vector<std::size_t>& idx, int sign) {
  Eigen::Index cols = 0;
  for (std::size_t i : idx) cols += f.entries[i].subspace.dim();
  SynthesisPart part{Matrix(f.space.dim(), cols), Matrix::Zero(cols, cols), sign};
  Eigen::Index at = 0;
  for (std::size_t i : idx) {
    const auto& e = f.entries[i];
    const Eigen::Index k = e.subspace.dim();
    part.t.middleCols(at, k) = e.weight * e.subspace.basis();
    part.coef.block(at, at, k, k) = gram_operator(e.subspace).matrix;
    at += k;
  }
  return part;
}

inline SynthesisPart fusion_part(const WeightedSubspaceFamily& f, int sign) {
  return fusion_part(f, sign > 0 ? f.plus_indices : f.minus_indices, sign);
}

}  // namespace detail

/// T maps block coordinates c_i to sum v_i B_i c_i.
inline FusionSynthesis fusion_synthesis(const WeightedSubspaceFamily& f) {
  FusionSynthesis s{Matrix(f.space.dim(), f.total_dim()), detail::fusion_part(f, 1).t,
                    detail::fusion_part(f, -1).t};
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& e = f.entries[i];
    s.t.middleCols(f.offsets[i], e.subspace.dim()) = e.weight * e.subspace.basis();
  }
  return s;
}

enum class OperatorVariant { QProj, PaperLiteral };

inline const char* to_string(OperatorVariant v) {
  return v == OperatorVariant::QProj ? "qproj" : "paper";
}

/// Analysis operator, n -> sum k_i.
/// QProj: block i holds v_i times the coordinates of Q_{W_i} f; this is the
/// adjoint of T for the product sum [f_i, g_i].
/// PaperLiteral: block i holds sigma_i v_i times the W_i-coordinates of pi_{JW_i} f.
inline Matrix fusion_analysis(const WeightedSubspaceFamily& f, OperatorVariant variant,
                              const Tolerances& tol = {}) {
  const Matrix& jm = f.space.J();
  Matrix a(f.total_dim(), f.space.dim());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& e = f.entries[i];
    const Matrix& b = e.subspace.basis();
    const Eigen::Index k = e.subspace.dim();
    if (variant == OperatorVariant::QProj) {
      const Matrix g = gram_operator(e.subspace).matrix;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().cwiseAbs().minCoeff() <= tol.def)
        throw Error(ErrorCode::NotRegular, "entry " + std::to_string(i) + " is not regular", i);
      a.middleRows(f.offsets[i], k) = e.weight * g.partialPivLu().solve(b.transpose() * jm);
    } else {
      a.middleRows(f.offsets[i], k) =
          e.sign * e.weight * b.transpose() * jm * orthogonal_projection(e.subspace) * jm;
    }
  }
  return a;
}

/// S = S_plus - S_minus, both parts J-positive in the QProj variant.
struct FusionOperator {
  Matrix s;
  Matrix s_plus;
  Matrix s_minus;
};

/// QProj: sum v_i^2 Q_{W_i}. PaperLiteral: sum sigma_i v_i^2 pi_{J W_i}.
inline FusionOperator fusion_frame_operator(const WeightedSubspaceFamily& f,
                                            OperatorVariant variant = OperatorVariant::QProj,
                                            const Tolerances& tol = {}) {
  const Eigen::Index n = f.space.dim();
  FusionOperator op{Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n)};
  const Matrix& jm = f.space.J();
  for (const auto& e : f.entries) {
    const double w2 = e.weight * e.weight;
    Matrix term = variant == OperatorVariant::QProj
                      ? Matrix(j_projection(e.subspace, tol))
                      : Matrix(jm * orthogonal_projection(e.subspace) * jm);
    if (e.sign > 0) {
      op.s_plus += w2 * term;
    } else if (variant == OperatorVariant::QProj) {
      op.s_minus -= w2 * term;
    } else {
      op.s_minus += w2 * term;
    }
  }
  op.s = op.s_plus - op.s_minus;
  return op;
}

/// lambda_max(sum v_i^2 pi_{W_i}).
inline double bessel_bound(const WeightedSubspaceFamily& f) {
  return oracle::hilbert_fusion_bounds(f.subspaces(), f.weights()).second;
}

struct GammaData {
  double gamma_t_plus = 0.0;
  double gamma_t_minus = 0.0;
  double gamma_g_plus = 0.0;
  double gamma_g_minus = 0.0;
  double norm_t_plus = 0.0;
  double norm_t_minus = 0.0;
};

struct RpsResidual {
  std::size_t index = 0;
  /// ||pi_{JW_i} pi_{M+} - pi_{W_i}||
  double r = 0.0;
  /// ||(Q_{W_i} - pi_{W_i}) pi_{M+}||
  double r_prime = 0.0;
};

struct FusionReport {
  bool verdict = false;
  double bessel_c = 0.0;
  /// Lower Hilbert fusion bound and the verdict it implies.
  double hilbert_lower = 0.0;
  bool hilbert_verdict = false;
  std::optional<Classification> plus_class;
  std::optional<Classification> minus_class;
  std::optional<JBounds> bounds_optimal;
  std::optional<JBounds> bounds_estimate;
  /// Same extremization with sum v_i^2 [pi_i f, pi_i f] and with sum v_i^2 [pi_i f, f].
  std::optional<JBounds> bounds_pi_squared;
  std::optional<JBounds> bounds_literal;
  GammaData gamma_data;
  std::vector<Witness> witnesses;
  std::vector<RpsResidual> rps_residuals;
  double cond_s = 0.0;
};

namespace detail {

inline bool fusion_parts_ok(const WeightedSubspaceFamily& f, const Tolerances& tol,
                            std::optional<Classification>& plus_class,
                            std::optional<Classification>& minus_class,
                            std::vector<Witness>& witnesses) {
  const bool p = check_part(f.plus_span, 1, f.space, tol, plus_class, witnesses);
  const bool m = check_part(f.minus_span, -1, f.space, tol, minus_class, witnesses);
  return p && m;
}

inline void require_fusion_frame(const WeightedSubspaceFamily& f, const Tolerances& tol) {
  std::optional<Classification> pc, mc;
  std::vector<Witness> w;
  if (!fusion_parts_ok(f, tol, pc, mc, w))
    throw Error(ErrorCode::NotAJFusionFrame, w.front().description);
}

// Extremes of s x^T X x / s [x, x] on the span of one sign part.
inline std::pair<double, double> form_bounds(const Subspace& m, const Matrix& x, int sign) {
  const Matrix& b = m.basis();
  const double s = static_cast<double>(sign);
  const Matrix gram = s * (b.transpose() * m.space().J() * b);
  const Matrix form = s * symmetrize(b.transpose() * x * b);
  const auto [lo, hi] = generalized_extremes(form, gram);
  if (sign > 0) return {lo, hi};
  return {-hi, -lo};
}

inline JBounds comparator_bounds(const WeightedSubspaceFamily& f, bool squared) {
  const Matrix& jm = f.space.J();
  JBounds out;
  for (int sign : {1, -1}) {
    const auto& idx = sign > 0 ? f.plus_indices : f.minus_indices;
    const auto& m = sign > 0 ? f.plus_span : f.minus_span;
    if (!m) continue;
    Matrix x = Matrix::Zero(f.space.dim(), f.space.dim());
    for (std::size_t i : idx) {
      const Matrix pi = orthogonal_projection(f.entries[i].subspace);
      const double w2 = f.entries[i].weight * f.entries[i].weight;
      x += squared ? Matrix(w2 * pi * jm * pi) : Matrix(w2 * pi * jm);
    }
    const auto [lo, hi] = form_bounds(*m, x, sign);
    if (sign > 0) {
      out.pos_lower = lo;
      out.pos_upper = hi;
    } else {
      out.neg_lower = lo;
      out.neg_upper = hi;
    }
  }
  return out;
}

inline std::vector<RpsResidual> rps_residuals(const WeightedSubspaceFamily& f,
                                              const Tolerances& tol) {
  std::vector<RpsResidual> out;
  if (!f.plus_span) return out;
  const Matrix& jm = f.space.J();
  const Matrix pm = orthogonal_projection(*f.plus_span);
  for (std::size_t i : f.plus_indices) {
    const Subspace& w = f.entries[i].subspace;
    const Matrix pi = orthogonal_projection(w);
    const Matrix pi_jw = jm * pi * jm;
    out.push_back({i, spectral_norm(pi_jw * pm - pi),
                   spectral_norm((j_projection(w, tol) - pi) * pm)});
  }
  return out;
}

}  // namespace detail

/// Closed-form bounds from gamma(T+-), gamma(G_{M+-}) and ||T+-||.
inline JBounds fusion_bound_estimates(const WeightedSubspaceFamily& f, const Tolerances& tol = {},
                                      GammaData* gamma = nullptr) {
  detail::require_fusion_frame(f, tol);
  GammaData g;
  JBounds b;
  if (!f.plus_indices.empty()) {
    auto [lo, hi] = detail::part_estimates(detail::fusion_part(f, 1), f.space, tol.rank,
                                           g.gamma_t_plus, g.norm_t_plus, g.gamma_g_plus);
    b.pos_lower = lo;
    b.pos_upper = hi;
  }
  if (!f.minus_indices.empty()) {
    auto [lo, hi] = detail::part_estimates(detail::fusion_part(f, -1), f.space, tol.rank,
                                           g.gamma_t_minus, g.norm_t_minus, g.gamma_g_minus);
    b.neg_lower = lo;
    b.neg_upper = hi;
  }
  if (gamma) *gamma = g;
  return b;
}

/// Extremes of [S_+- f, f] / [f, f] on M+-, with S the QProj operator.
inline JBounds optimal_fusion_bounds(const WeightedSubspaceFamily& f, const Tolerances& tol = {}) {
  detail::require_fusion_frame(f, tol);
  JBounds b;
  if (!f.plus_indices.empty()) {
    auto [lo, hi] = detail::part_bounds(detail::fusion_part(f, 1), f.space, tol.rank);
    b.pos_lower = lo;
    b.pos_upper = hi;
  }
  if (!f.minus_indices.empty()) {
    auto [lo, hi] = detail::part_bounds(detail::fusion_part(f, -1), f.space, tol.rank);
    b.neg_lower = lo;
    b.neg_upper = hi;
  }
  return b;
}

inline FusionReport verify_j_fusion_frame(const WeightedSubspaceFamily& f,
                                          const Tolerances& tol = {}) {
  FusionReport r;
  const auto [lower, upper] = oracle::hilbert_fusion_bounds(f.subspaces(), f.weights());
  r.bessel_c = upper;
  r.hilbert_lower = lower;
  r.hilbert_verdict = lower > tol.def;
  r.verdict = detail::fusion_parts_ok(f, tol, r.plus_class, r.minus_class, r.witnesses);
  if (!f.entries.empty())
    r.cond_s = detail::condition_number(fusion_frame_operator(f, OperatorVariant::QProj, tol).s);
  if (r.verdict) {
    r.bounds_optimal = optimal_fusion_bounds(f, tol);
    r.bounds_estimate = fusion_bound_estimates(f, tol, &r.gamma_data);
    r.bounds_pi_squared = detail::comparator_bounds(f, true);
    r.bounds_literal = detail::comparator_bounds(f, false);
    r.rps_residuals = detail::rps_residuals(f, tol);
  }
  return r;
}

/// Per positive entry: r_i (reported) and r'_i.
inline std::vector<RpsResidual> check_rps_corollary(const WeightedSubspaceFamily& f,
                                                    const Tolerances& tol = {}) {
  detail::require_fusion_frame(f, tol);
  return detail::rps_residuals(f, tol);
}

namespace detail {

// {x : [x, m] = 0 for all m in M}
inline Matrix j_orthogonal_complement(const Subspace& m, double rank_tol) {
  const Eigen::Index n = m.ambient_dim();
  const Matrix jb = orthonormal_basis(m.space().J() * m.basis(), rank_tol);
  const Matrix rest = Matrix::Identity(n, n) - jb * jb.transpose();
  return orthonormal_basis(rest, rank_tol);
}

}  // namespace detail

struct DualFusion {
  WeightedSubspaceFamily family;
  Matrix s_inverse;
  /// S^{-1} T, the synthesis operator of the dual.
  Matrix synthesis;
  /// Frame operator of the dual synthesis; equals S^{-1}.
  Matrix s_dual;
  /// ||sum v_i^2 Q_{S^{-1} W_i} - S^{-1}|| / ||S^{-1}||, from the subspaces alone.
  double subspace_operator_residual = 0.0;
  /// max over +- of the distance between S^{-1} M+- and the J-complement of M-+.
  double image_identity_residual = 0.0;
  bool dual_verdict = false;
  JBounds primal_bounds;
  JBounds dual_bounds;
  double reciprocal_error = 0.0;
};

inline DualFusion canonical_dual_fusion(const WeightedSubspaceFamily& f,
                                        const Tolerances& tol = {}) {
  detail::require_fusion_frame(f, tol);
  const Matrix s = fusion_frame_operator(f, OperatorVariant::QProj, tol).s;
  Eigen::JacobiSVD<Matrix> svd(s);
  const Vector& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= tol.rank * sv(0))
    throw Error(ErrorCode::SingularFrameOperator, "frame operator is singular");
  const Eigen::Index n = f.space.dim();
  const Matrix s_inv = s.partialPivLu().solve(Matrix::Identity(n, n));

  std::vector<Subspace> images;
  for (const auto& e : f.entries) images.push_back(image(s_inv, e.subspace, tol.rank));
  DualFusion d{make_weighted_family(images, f.weights(), f.space, tol),
               s_inv,
               s_inv * fusion_synthesis(f).t,
               Matrix(),
               0.0,
               0.0,
               false,
               {},
               {},
               0.0};

  const detail::SynthesisPart full{d.synthesis, direct_sum_space(f).gram, 1};
  d.s_dual = detail::part_frame_operator(full, f.space);
  const double inv_norm = detail::spectral_norm(s_inv);
  d.subspace_operator_residual =
      detail::spectral_norm(fusion_frame_operator(d.family, OperatorVariant::QProj, tol).s - s_inv) /
      inv_norm;

  for (int sign : {1, -1}) {
    const auto& here = sign > 0 ? f.plus_span : f.minus_span;
    const auto& there = sign > 0 ? f.minus_span : f.plus_span;
    if (!here) continue;
    const Subspace mapped = image(s_inv, *here, tol.rank);
    const Matrix comp = there ? detail::j_orthogonal_complement(*there, tol.rank)
                              : Matrix(Matrix::Identity(n, n));
    const Subspace target = Subspace::from_orthonormal(f.space, comp);
    const double res = mapped.dim() == target.dim()
                           ? std::max(containment_residual(mapped, target),
                                      containment_residual(target, mapped))
                           : std::numeric_limits<double>::infinity();
    d.image_identity_residual = std::max(d.image_identity_residual, res);
  }

  d.dual_verdict = verify_j_fusion_frame(d.family, tol).verdict;
  d.primal_bounds = optimal_fusion_bounds(f, tol);
  for (int sign : {1, -1}) {
    const auto& idx = sign > 0 ? f.plus_indices : f.minus_indices;
    if (idx.empty()) continue;
    detail::SynthesisPart part = detail::fusion_part(f, idx, sign);
    part.t = s_inv * part.t;
    const auto [lo, hi] = detail::part_bounds(part, f.space, tol.rank);
    if (sign > 0) {
      d.dual_bounds.pos_lower = lo;
      d.dual_bounds.pos_upper = hi;
    } else {
      d.dual_bounds.neg_lower = lo;
      d.dual_bounds.neg_upper = hi;
    }
  }
  d.reciprocal_error = d.dual_bounds.max_relative_difference(d.primal_bounds.reciprocal());
  return d;
}

struct JImage {
  WeightedSubspaceFamily family;
  bool verdict = false;
  /// Distance between J(M+-) and the span of the positive (negative) images.
  double plus_identity_residual = 0.0;
  double minus_identity_residual = 0.0;
};

inline JImage j_image_family(const WeightedSubspaceFamily& f, const Tolerances& tol = {}) {
  detail::require_fusion_frame(f, tol);
  std::vector<Subspace> images;
  for (const auto& e : f.entries) images.push_back(image(f.space.J(), e.subspace, tol.rank));
  JImage out{make_weighted_family(images, f.weights(), f.space, tol), false, 0.0, 0.0};
  out.verdict = verify_j_fusion_frame(out.family, tol).verdict;
  const auto residual = [&](const std::optional<Subspace>& m, const std::optional<Subspace>& im) {
    if (!m || !im) return (m.has_value() == im.has_value()) ? 0.0 : 1.0;
    const Subspace jm = image(f.space.J(), *m, tol.rank);
    if (jm.dim() != im->dim()) return 1.0;
    return std::max(containment_residual(jm, *im), containment_residual(*im, jm));
  };
  out.plus_identity_residual = residual(f.plus_span, out.family.plus_span);
  out.minus_identity_residual = residual(f.minus_span, out.family.minus_span);
  return out;
}

/// Both sides of the frame-sequence / fusion-frame equivalence.
struct EquivalenceReport {
  bool frame_verdict = false;   // {v_i f_ij} is a J-frame
  bool fusion_verdict = false;  // {(W_i, v_i)} is a J-fusion frame
  bool agree = false;
  /// inf_i A_i and sup_i B_i over the per-sequence bounds on W_i (magnitudes).
  double inf_lower = 0.0;
  double sup_upper = 0.0;
};

inline EquivalenceReport fusion_from_frame_sequences(const std::vector<Matrix>& sequences,
                                                     const std::vector<double>& weights,
                                                     const KreinSpace& k,
                                                     const Tolerances& tol = {}) {
  if (sequences.size() != weights.size())
    throw Error(ErrorCode::DimensionMismatch, "one weight per sequence is required");
  std::vector<Subspace> spans;
  Eigen::Index total = 0;
  EquivalenceReport r;
  r.inf_lower = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const Matrix& seq = sequences[i];
    check_dim(k, seq.rows(), "sequence");
    Subspace w = span(seq, k, tol.rank);
    const Classification c = classify(w, tol);
    if (!is_uniformly_definite(c.kind))
      throw Error(ErrorCode::IndefiniteSpan, "sequence " + std::to_string(i) + " spans a " +
                                                 to_string(c.kind) + " subspace",
                  i, c.witness.value_or(Vector()));
    const int sign = c.sign();
    const detail::SynthesisPart part{seq, sign * Matrix::Identity(seq.cols(), seq.cols()), sign};
    auto [lo, hi] = detail::part_bounds(part, k, tol.rank);
    if (sign < 0) std::swap(lo, hi);
    r.inf_lower = std::min(r.inf_lower, std::abs(lo));
    r.sup_upper = std::max(r.sup_upper, std::abs(hi));
    spans.push_back(std::move(w));
    total += seq.cols();
  }

  Matrix flat(k.dim(), total);
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    flat.middleCols(at, sequences[i].cols()) = weights[i] * sequences[i];
    at += sequences[i].cols();
  }
  r.frame_verdict = verify_j_frame(partition_by_sign(flat, k, tol), tol).is_j_frame;
  r.fusion_verdict = verify_j_fusion_frame(make_weighted_family(spans, weights, k, tol), tol).verdict;
  r.agree = r.frame_verdict == r.fusion_verdict;
  return r;
}

}  // namespace kreinframe

#endif  // KREINFRAME_JFUSION_HPP
