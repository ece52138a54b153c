#ifndef KREINFRAME_GENERATOR_HPP
#define KREINFRAME_GENERATOR_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kreinframe/io.hpp"

namespace kreinframe {

enum class Coupling {
  Independent,  // M- is the graph of its own contraction over K-
  Orthogonal,   // M- is the J-orthogonal complement of M+
};

struct GeneratorConfig {
  std::uint64_t seed = 0;
  Eigen::Index n = 4;
  Eigen::Index p = 2;
  /// Entries (families) or vectors (frames) on each side.
  int plus_entries = 2;
  int minus_entries = 1;
  /// Optional explicit entry dimensions; must sum to at most p (resp. q).
  std::optional<std::vector<int>> plus_dims;
  std::optional<std::vector<int>> minus_dims;
  /// Upper bound on the angular operator norms, in [0, 1).
  double rho = 0.5;
  /// Noise added to the planted neutral direction in negative mode.
  double epsilon = 0.0;
  bool negative = false;
  Coupling coupling = Coupling::Independent;
  /// Rotate J by a random orthogonal matrix instead of keeping it diagonal.
  bool dense_j = false;
};

namespace detail {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  Matrix gaussian(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal_(rng_);
    return m;
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Matrix orthogonal(Eigen::Index d) {
    if (d == 0) return Matrix(0, 0);
    Eigen::HouseholderQR<Matrix> qr(gaussian(d, d));
    Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < d; ++i)
      if (r(i, i) < 0.0) q.col(i) *= -1.0;
    return q;
  }

  /// Contraction of the given shape with norm rho * u, u uniform in (0, 1].
  Matrix contraction(Eigen::Index rows, Eigen::Index cols, double rho) {
    if (rows == 0 || cols == 0) return Matrix::Zero(rows, cols);
    Matrix k = gaussian(rows, cols);
    const double norm = spectral_norm(k);
    const double target = rho * uniform(0.0, 1.0);
    return norm > 0.0 ? Matrix(k * (target / norm)) : k;
  }

  /// Composition of `total` into `parts` positive integers.
  std::vector<int> composition(int total, int parts) {
    std::vector<int> cuts(static_cast<std::size_t>(total - 1));
    std::iota(cuts.begin(), cuts.end(), 1);
    std::shuffle(cuts.begin(), cuts.end(), rng_);
    cuts.resize(static_cast<std::size_t>(parts - 1));
    std::sort(cuts.begin(), cuts.end());
    std::vector<int> out;
    int prev = 0;
    for (int c : cuts) {
      out.push_back(c - prev);
      prev = c;
    }
    out.push_back(total - prev);
    return out;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

struct GeneratedSpace {
  Matrix j;
  Matrix plus_part;   // n x p basis of M+, columns x + K x
  Matrix minus_part;  // n x q basis of M-
  Matrix k_plus;      // canonical basis of K+ (n x p)
  Matrix k_minus;
};

inline void check_config(const GeneratorConfig& cfg) {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::InfeasibleConfig, what); };
  if (cfg.n <= 0) fail("n must be positive");
  if (cfg.p < 0 || cfg.p > cfg.n) fail("p must lie in [0, n]");
  if (!(cfg.rho >= 0.0 && cfg.rho < 1.0)) fail("rho must lie in [0, 1)");
  if (!(cfg.epsilon >= 0.0)) fail("epsilon must be non-negative");
  const Eigen::Index q = cfg.n - cfg.p;
  if (cfg.plus_entries < 0 || cfg.minus_entries < 0) fail("entry counts must be non-negative");
  if ((cfg.p > 0) != (cfg.plus_entries > 0) && !cfg.plus_dims)
    fail("positive entries are required exactly when p > 0");
  if ((q > 0) != (cfg.minus_entries > 0) && !cfg.minus_dims)
    fail("negative entries are required exactly when q > 0");
  const auto check_dims = [&](const std::optional<std::vector<int>>& dims, int count,
                              Eigen::Index cap, const char* side) {
    if (!dims) return;
    if (static_cast<int>(dims->size()) != count)
      fail(std::string(side) + " dims must list one dimension per entry");
    int total = 0;
    for (int d : *dims) {
      if (d <= 0) fail(std::string(side) + " dims must be positive");
      total += d;
    }
    if (total > cap) fail(std::string(side) + " dims exceed the available dimension");
  };
  check_dims(cfg.plus_dims, cfg.plus_entries, cfg.p, "plus");
  check_dims(cfg.minus_dims, cfg.minus_entries, q, "minus");
  if (cfg.negative && cfg.plus_entries == 0 && cfg.minus_entries == 0)
    fail("negative mode needs an entry to perturb");
  if (cfg.negative && (cfg.p == 0 || q == 0))
    fail("negative mode needs both signs to plant a neutral direction");
}

inline GeneratedSpace make_space(const GeneratorConfig& cfg, Sampler& s) {
  const Eigen::Index n = cfg.n, p = cfg.p, q = n - p;
  GeneratedSpace g;
  const Matrix u = cfg.dense_j ? s.orthogonal(n) : Matrix(Matrix::Identity(n, n));
  g.k_plus = u.leftCols(p);
  g.k_minus = u.rightCols(q);
  Vector signs(n);
  signs.head(p).setOnes();
  signs.tail(q).setConstant(-1.0);
  g.j = symmetrize(u * signs.asDiagonal() * u.transpose());
  if (!cfg.dense_j) g.j = signs.asDiagonal().toDenseMatrix();

  const Matrix kp = s.contraction(q, p, cfg.rho);  // K+ -> K-
  g.plus_part = g.k_plus + g.k_minus * kp;
  const Matrix km = cfg.coupling == Coupling::Orthogonal ? Matrix(kp.transpose())
                                                         : s.contraction(p, q, cfg.rho);
  g.minus_part = g.k_minus + g.k_plus * km;
  return g;
}

// Split a basis of M (n x d) into entries covering `dims`, after a random rotation.
inline std::vector<Matrix> split(const Matrix& m, const std::vector<int>& dims, Sampler& s) {
  const Matrix rotated = m * s.orthogonal(m.cols());
  std::vector<Matrix> out;
  Eigen::Index at = 0;
  for (int d : dims) {
    out.push_back(rotated.middleCols(at, d) * s.orthogonal(d));
    at += d;
  }
  return out;
}

// Unit positive w in `entry` plus c z with z in K-, scaled so [n, n] = 0.
inline Vector neutral_direction(const Matrix& entry, const GeneratedSpace& g, Sampler& s) {
  Vector w = entry * s.gaussian(entry.cols(), 1);
  w /= std::sqrt(w.dot(g.j * w));
  Vector z = g.k_minus * s.gaussian(g.k_minus.cols(), 1);
  z /= z.norm();
  const double t = w.dot(g.j * z);
  const double c = t + std::sqrt(t * t + 1.0);
  return w + c * z;
}

inline io::ProblemFile base_problem(const GeneratorConfig& cfg, const GeneratedSpace& g) {
  io::ProblemFile pf;
  pf.dimension = cfg.n;
  if (cfg.dense_j) {
    pf.j_matrix = g.j;
  } else {
    std::vector<int> signs(static_cast<std::size_t>(cfg.n), -1);
    std::fill(signs.begin(), signs.begin() + cfg.p, 1);
    pf.j_signs = signs;
  }
  return pf;
}

}  // namespace detail

/// Random J-fusion frame: M+ is the graph of a contraction of norm at most
/// rho over K+, split into entries; M- likewise over K-.
inline io::ProblemFile gen_family(const GeneratorConfig& cfg) {
  detail::check_config(cfg);
  detail::Sampler s(cfg.seed);
  const detail::GeneratedSpace g = detail::make_space(cfg, s);
  io::ProblemFile pf = detail::base_problem(cfg, g);
  const Eigen::Index q = cfg.n - cfg.p;

  std::vector<io::ProblemEntry> entries;
  std::vector<int> signs;
  for (int sign : {1, -1}) {
    const int count = sign > 0 ? cfg.plus_entries : cfg.minus_entries;
    if (count == 0) continue;
    const Eigen::Index cap = sign > 0 ? cfg.p : q;
    if (count > cap) throw Error(ErrorCode::InfeasibleConfig, "more entries than dimensions");
    const auto& given = sign > 0 ? cfg.plus_dims : cfg.minus_dims;
    const std::vector<int> dims = given ? *given : s.composition(static_cast<int>(cap), count);
    const Matrix& m = sign > 0 ? g.plus_part : g.minus_part;
    for (const Matrix& b : detail::split(m, dims, s)) {
      entries.push_back({b.transpose(), s.uniform(0.5, 2.0)});
      signs.push_back(sign);
    }
  }
  if (cfg.negative) {
    std::size_t pick = 0;
    while (signs[pick] < 0) ++pick;
    io::ProblemEntry& e = entries[pick];
    Vector v = detail::neutral_direction(e.rows.transpose(), g, s);
    if (cfg.epsilon > 0.0) v += cfg.epsilon * s.gaussian(cfg.n, 1);
    e.rows.conservativeResize(e.rows.rows() + 1, Eigen::NoChange);
    e.rows.bottomRows(1) = v.transpose();
  }
  pf.family = std::move(entries);
  return pf;
}

/// Random J-frame: plus_entries vectors in M+ and minus_entries in M-.
inline io::ProblemFile gen_frame(const GeneratorConfig& cfg) {
  detail::check_config(cfg);
  detail::Sampler s(cfg.seed);
  const detail::GeneratedSpace g = detail::make_space(cfg, s);
  io::ProblemFile pf = detail::base_problem(cfg, g);
  const Eigen::Index q = cfg.n - cfg.p;
  Matrix vectors(cfg.n, cfg.plus_entries + cfg.minus_entries);
  if (cfg.plus_entries > 0)
    vectors.leftCols(cfg.plus_entries) = g.plus_part * s.gaussian(cfg.p, cfg.plus_entries);
  if (cfg.minus_entries > 0)
    vectors.rightCols(cfg.minus_entries) = g.minus_part * s.gaussian(q, cfg.minus_entries);
  if (cfg.negative) {
    Vector v = detail::neutral_direction(g.plus_part, g, s);
    if (cfg.epsilon > 0.0) v += cfg.epsilon * s.gaussian(cfg.n, 1);
    vectors.conservativeResize(Eigen::NoChange, vectors.cols() + 1);
    vectors.rightCols(1) = v;
  }
  pf.vectors = vectors.transpose();
  return pf;
}

}  // namespace kreinframe

#endif  // KREINFRAME_GENERATOR_HPP
