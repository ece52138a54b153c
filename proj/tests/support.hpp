#ifndef KREINFRAME_TESTS_SUPPORT_HPP
#define KREINFRAME_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "kreinframe/crosscheck.hpp"
#include "kreinframe/generator.hpp"
#include "kreinframe/io.hpp"
#include "kreinframe/kreinframe.hpp"

namespace support {

using kreinframe::Matrix;
using kreinframe::Vector;

inline std::string fixture(const std::string& name) {
  return std::string(KREINFRAME_FIXTURES) + "/" + name;
}

inline kreinframe::KreinSpace diag(std::initializer_list<double> signs) {
  Vector s(static_cast<Eigen::Index>(signs.size()));
  Eigen::Index i = 0;
  for (double x : signs) s(i++) = x;
  return kreinframe::make_diagonal_krein_space(s);
}

inline Matrix cols(std::initializer_list<std::initializer_list<double>> vs) {
  const auto n = static_cast<Eigen::Index>(vs.begin()->size());
  Matrix m(n, static_cast<Eigen::Index>(vs.size()));
  Eigen::Index c = 0;
  for (const auto& v : vs) {
    Eigen::Index r = 0;
    for (double x : v) m(r++, c) = x;
    ++c;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> v) { return cols({v}).col(0); }

/// Sizes drawn from a seed: n in [2, max_n], 1 <= p < n, entries covering both parts.
inline kreinframe::GeneratorConfig random_config(std::uint64_t seed, int max_n = 8,
                                                 bool frame = false) {
  kreinframe::detail::Sampler s(seed ^ 0x9e3779b97f4a7c15ULL);
  kreinframe::GeneratorConfig c;
  c.seed = seed;
  c.n = s.integer(2, max_n);
  c.p = s.integer(1, static_cast<int>(c.n) - 1);
  const int q = static_cast<int>(c.n - c.p);
  if (frame) {
    c.plus_entries = static_cast<int>(c.p) + s.integer(0, 2);
    c.minus_entries = q + s.integer(0, 2);
  } else {
    c.plus_entries = s.integer(1, static_cast<int>(c.p));
    c.minus_entries = s.integer(1, q);
  }
  c.rho = 0.9;
  return c;
}

struct Instance {
  kreinframe::KreinSpace space;
  kreinframe::WeightedSubspaceFamily family;
};

inline Instance family_instance(const kreinframe::GeneratorConfig& cfg,
                                const kreinframe::Tolerances& tol = {}) {
  const auto p = kreinframe::gen_family(cfg);
  const auto k = kreinframe::io::krein_space(p, tol);
  return {k, kreinframe::io::to_family(p, k, tol)};
}

inline kreinframe::VectorFrame frame_instance(const kreinframe::GeneratorConfig& cfg,
                                              const kreinframe::Tolerances& tol = {}) {
  const auto p = kreinframe::gen_frame(cfg);
  const auto k = kreinframe::io::krein_space(p, tol);
  return kreinframe::partition_by_sign(kreinframe::io::frame_vectors(p), k, tol);
}

/// Random J-isometry for diagonal J = diag(I_p, -I_q): rotations inside each
/// part composed with a hyperbolic boost mixing the first axes of both parts.
inline Matrix j_isometry(Eigen::Index p, Eigen::Index q, std::uint64_t seed) {
  kreinframe::detail::Sampler s(seed);
  const Eigen::Index n = p + q;
  Matrix rot = Matrix::Zero(n, n);
  rot.topLeftCorner(p, p) = s.orthogonal(p);
  rot.bottomRightCorner(q, q) = s.orthogonal(q);
  Matrix boost = Matrix::Identity(n, n);
  const double t = s.uniform(-1.0, 1.0);
  boost(0, 0) = boost(p, p) = std::cosh(t);
  boost(0, p) = boost(p, 0) = std::sinh(t);
  return rot * boost;
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

/// Runs the CLI with stderr discarded.
inline CommandResult run_cli(const std::string& args) {
  const std::string cmd = std::string(KREINFRAME_CLI) + " " + args + " 2>/dev/null";
  CommandResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace support

#endif  // KREINFRAME_TESTS_SUPPORT_HPP
