#ifndef KREINFRAME_CROSSCHECK_HPP
#define KREINFRAME_CROSSCHECK_HPP

// Fast-path quantities against the brute-force oracles.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "kreinframe/jframe.hpp"
#include "kreinframe/jfusion.hpp"
#include "kreinframe/oracle.hpp"

namespace kreinframe::crosscheck {

inline constexpr double kSamplingTol = 1e-4;
inline constexpr double kAlgebraicTol = 1e-10;

struct Comparison {
  std::string quantity;
  std::string method;  // "algebraic" or "sampling"
  double claimed = 0.0;
  double oracle = 0.0;
  double tolerance = 0.0;
  bool ok = false;
};

inline Comparison compare(std::string quantity, std::string method, double claimed, double oracle,
                          double tol) {
  const double scale = std::max(1.0, std::abs(oracle));
  const bool ok = std::isfinite(claimed) && std::abs(claimed - oracle) <= tol * scale;
  return {std::move(quantity), std::move(method), claimed, oracle, tol, ok};
}

inline bool all_ok(const std::vector<Comparison>& cs) {
  for (const auto& c : cs)
    if (!c.ok) return false;
  return true;
}

namespace detail {

// Signed part operator S_s, so that s [S_s f, f] / s [f, f] is the bound quotient on M_s.
inline void part_quotients(const Subspace& m, const Matrix& part_op, int sign, std::uint64_t seed,
                           double& lo_solver, double& hi_solver, double& lo_sampled,
                           double& hi_sampled) {
  const Matrix& b = m.basis();
  const Matrix& jm = m.space().J();
  const double s = static_cast<double>(sign);
  const Matrix a = s * (b.transpose() * part_op.transpose() * jm * b);
  const Matrix g = s * (b.transpose() * jm * b);
  const oracle::RayleighExtrema r = oracle::rayleigh_extrema(a, g, seed);
  if (sign > 0) {
    lo_solver = r.solver_min;
    hi_solver = r.solver_max;
    lo_sampled = r.sampled_min;
    hi_sampled = r.sampled_max;
  } else {
    lo_solver = -r.solver_max;
    hi_solver = -r.solver_min;
    lo_sampled = -r.sampled_max;
    hi_sampled = -r.sampled_min;
  }
}

inline void bound_comparisons(std::vector<Comparison>& out, const std::optional<Subspace>& m,
                              const Matrix& part_op, int sign, const JBounds& claimed,
                              std::uint64_t seed) {
  if (!m) return;
  double lo_a = 0, hi_a = 0, lo_s = 0, hi_s = 0;
  part_quotients(*m, part_op, sign, seed, lo_a, hi_a, lo_s, hi_s);
  const double lo = sign > 0 ? claimed.pos_lower : claimed.neg_lower;
  const double hi = sign > 0 ? claimed.pos_upper : claimed.neg_upper;
  const std::string lo_name = sign > 0 ? "A_plus" : "B_minus";
  const std::string hi_name = sign > 0 ? "B_plus" : "A_minus";
  out.push_back(compare(lo_name, "algebraic", lo, lo_a, kAlgebraicTol));
  out.push_back(compare(hi_name, "algebraic", hi, hi_a, kAlgebraicTol));
  out.push_back(compare(lo_name, "sampling", lo, lo_s, kSamplingTol));
  out.push_back(compare(hi_name, "sampling", hi, hi_s, kSamplingTol));
}

}  // namespace detail

/// Optimal J-frame bounds against Rayleigh extrema of sum s_i [f, f_i]^2 / [f, f].
inline std::vector<Comparison> frame_bounds(const VectorFrame& f, const JBounds& claimed,
                                            std::uint64_t seed = 0) {
  std::vector<Comparison> out;
  detail::bound_comparisons(out, f.plus_span, frame_operator(f, f.plus_indices), 1, claimed, seed);
  detail::bound_comparisons(out, f.minus_span, frame_operator(f, f.minus_indices), -1, claimed,
                            seed + 1);
  return out;
}

/// Optimal fusion bounds against Rayleigh extrema of sum v_i^2 [Q_i f, f] / [f, f].
inline std::vector<Comparison> fusion_bounds(const WeightedSubspaceFamily& f, const JBounds& claimed,
                                             std::uint64_t seed = 0, const Tolerances& tol = {}) {
  const Eigen::Index n = f.space.dim();
  Matrix plus = Matrix::Zero(n, n), minus = Matrix::Zero(n, n);
  for (const auto& e : f.entries) {
    const Matrix q = e.weight * e.weight * j_projection(e.subspace, tol);
    (e.sign > 0 ? plus : minus) += q;
  }
  std::vector<Comparison> out;
  detail::bound_comparisons(out, f.plus_span, plus, 1, claimed, seed);
  detail::bound_comparisons(out, f.minus_span, minus, -1, claimed, seed + 1);
  return out;
}

/// gamma(T+-), gamma(G_{M+-}) and ||T+-|| against brute-force minimization
/// and singular values of T^T T.
inline std::vector<Comparison> fusion_gammas(const WeightedSubspaceFamily& f, const GammaData& g,
                                             std::uint64_t seed = 0) {
  std::vector<Comparison> out;
  const FusionSynthesis syn = fusion_synthesis(f);
  for (int sign : {1, -1}) {
    const auto& m = sign > 0 ? f.plus_span : f.minus_span;
    if (!m) continue;
    const std::string tag = sign > 0 ? "plus" : "minus";
    const Matrix& t = sign > 0 ? syn.t_plus : syn.t_minus;
    const oracle::GammaBrute gt = oracle::gamma_brute(t, seed);
    const Matrix gram = m->basis().transpose() * f.space.J() * m->basis();
    const oracle::GammaBrute gg = oracle::gamma_brute(gram, seed + 1);
    const double claimed_t = sign > 0 ? g.gamma_t_plus : g.gamma_t_minus;
    const double claimed_g = sign > 0 ? g.gamma_g_plus : g.gamma_g_minus;
    const double claimed_n = sign > 0 ? g.norm_t_plus : g.norm_t_minus;
    out.push_back(compare("gamma_T_" + tag, "algebraic", claimed_t, gt.algebraic, kAlgebraicTol));
    out.push_back(compare("gamma_T_" + tag, "sampling", claimed_t, gt.sampled, kSamplingTol));
    out.push_back(compare("gamma_G_" + tag, "algebraic", claimed_g, gg.algebraic, kAlgebraicTol));
    out.push_back(compare("gamma_G_" + tag, "sampling", claimed_g, gg.sampled, kSamplingTol));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(t.transpose() * t, Eigen::EigenvaluesOnly);
    out.push_back(compare("norm_T_" + tag, "algebraic", claimed_n,
                          std::sqrt(eig.eigenvalues().maxCoeff()), kAlgebraicTol));
  }
  return out;
}

/// Definiteness margin against Rayleigh extrema of the Gram matrix.
inline std::vector<Comparison> margin(const Subspace& w, const Classification& c,
                                      std::uint64_t seed = 0) {
  std::vector<Comparison> out;
  if (!is_uniformly_definite(c.kind)) return out;
  const Matrix g = gram_operator(w).matrix;
  const Matrix id = Matrix::Identity(g.rows(), g.cols());
  const oracle::RayleighExtrema r = oracle::rayleigh_extrema(g, id, seed);
  const bool pos = c.sign() > 0;
  out.push_back(compare("margin", "algebraic", c.margin, pos ? r.solver_min : -r.solver_max,
                        kAlgebraicTol));
  out.push_back(compare("margin", "sampling", c.margin, pos ? r.sampled_min : -r.sampled_max,
                        kSamplingTol));
  return out;
}

}  // namespace kreinframe::crosscheck

#endif  // KREINFRAME_CROSSCHECK_HPP
