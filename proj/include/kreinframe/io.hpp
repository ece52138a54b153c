#ifndef KREINFRAME_IO_HPP
#define KREINFRAME_IO_HPP

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kreinframe/jframe.hpp"
#include "kreinframe/jfusion.hpp"
#include "kreinframe/transforms.hpp"

namespace kreinframe::io {

using Json = nlohmann::ordered_json;

struct ProblemEntry {
  Matrix rows;  // spanning vectors, one per row
  double weight = 1.0;
};

/// On-disk problem: a space, and optionally a family, a vector list and an operator.
struct ProblemFile {
  Eigen::Index dimension = 0;
  std::optional<std::vector<int>> j_signs;
  std::optional<Matrix> j_matrix;
  std::optional<std::vector<ProblemEntry>> family;
  std::optional<Matrix> vectors;  // one vector per row
  std::optional<Matrix> op;
};

namespace detail {

[[noreturn]] inline void schema(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::SchemaError, where + ": " + what);
}

inline void only_keys(const Json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) schema(where, "expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) schema(where, "unknown field \"" + key + "\"");
}

inline const Json& require(const Json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key)) schema(where, "missing field \"" + key + "\"");
  return j.at(key);
}

inline double number(const Json& j, const std::string& where) {
  if (!j.is_number()) schema(where, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw Error(ErrorCode::ParseError, where + ": non-finite number");
  return x;
}

inline Matrix rows_of(const Json& j, const std::string& where, Eigen::Index width,
                      bool allow_empty = false) {
  if (!j.is_array()) schema(where, "expected an array of rows");
  if (j.empty() && !allow_empty) schema(where, "expected at least one row");
  Matrix m(static_cast<Eigen::Index>(j.size()), width);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string at = where + "[" + std::to_string(r) + "]";
    const Json& row = j[r];
    if (!row.is_array()) schema(at, "expected an array");
    if (static_cast<Eigen::Index>(row.size()) != width)
      schema(at, "expected " + std::to_string(width) + " entries, got " + std::to_string(row.size()));
    for (std::size_t c = 0; c < row.size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number(row[c], at + "[" + std::to_string(c) + "]");
  }
  return m;
}

}  // namespace detail

/// Finite doubles as numbers, everything else as null.
inline Json to_json(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

inline Json rows_to_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vector(m.row(r).transpose())));
  return a;
}

inline Vector vector_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) detail::schema(where, "expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = detail::number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

inline ProblemFile problem_from_json(const Json& j) {
  detail::only_keys(j, "problem", {"dimension", "J", "family", "vectors", "operator"});
  ProblemFile p;
  const Json& dim = detail::require(j, "problem", "dimension");
  if (!dim.is_number_integer() || dim.get<long long>() <= 0)
    detail::schema("dimension", "expected a positive integer");
  p.dimension = static_cast<Eigen::Index>(dim.get<long long>());
  const Eigen::Index n = p.dimension;

  const Json& js = detail::require(j, "problem", "J");
  const Json& type = detail::require(js, "J", "type");
  if (type == "diagonal") {
    detail::only_keys(js, "J", {"type", "signs"});
    const Json& signs = detail::require(js, "J", "signs");
    if (!signs.is_array() || static_cast<Eigen::Index>(signs.size()) != n)
      detail::schema("J.signs", "expected " + std::to_string(n) + " signs");
    std::vector<int> s;
    for (std::size_t i = 0; i < signs.size(); ++i) {
      const Json& x = signs[i];
      if (!x.is_number_integer() || (x.get<int>() != 1 && x.get<int>() != -1))
        detail::schema("J.signs[" + std::to_string(i) + "]", "expected 1 or -1");
      s.push_back(x.get<int>());
    }
    p.j_signs = s;
  } else if (type == "matrix") {
    detail::only_keys(js, "J", {"type", "rows"});
    Matrix m = detail::rows_of(detail::require(js, "J", "rows"), "J.rows", n);
    if (m.rows() != n) detail::schema("J.rows", "expected " + std::to_string(n) + " rows");
    p.j_matrix = m;
  } else {
    detail::schema("J.type", "expected \"diagonal\" or \"matrix\"");
  }

  if (j.contains("family")) {
    const Json& fam = j.at("family");
    if (!fam.is_array()) detail::schema("family", "expected an array");
    std::vector<ProblemEntry> entries;
    for (std::size_t i = 0; i < fam.size(); ++i) {
      const std::string at = "family[" + std::to_string(i) + "]";
      detail::only_keys(fam[i], at, {"basis", "weight"});
      ProblemEntry e;
      e.rows = detail::rows_of(detail::require(fam[i], at, "basis"), at + ".basis", n);
      e.weight = detail::number(detail::require(fam[i], at, "weight"), at + ".weight");
      entries.push_back(std::move(e));
    }
    p.family = std::move(entries);
  }
  if (j.contains("vectors")) p.vectors = detail::rows_of(j.at("vectors"), "vectors", n);
  if (j.contains("operator")) {
    const Json& op = j.at("operator");
    detail::only_keys(op, "operator", {"matrix"});
    Matrix m = detail::rows_of(detail::require(op, "operator", "matrix"), "operator.matrix", n);
    if (m.rows() != n) detail::schema("operator.matrix", "expected " + std::to_string(n) + " rows");
    p.op = m;
  }
  return p;
}

inline Json to_json(const ProblemFile& p) {
  Json j;
  j["dimension"] = static_cast<long long>(p.dimension);
  Json js;
  if (p.j_signs) {
    js["type"] = "diagonal";
    js["signs"] = *p.j_signs;
  } else if (p.j_matrix) {
    js["type"] = "matrix";
    js["rows"] = rows_to_json(*p.j_matrix);
  }
  j["J"] = js;
  if (p.family) {
    Json fam = Json::array();
    for (const auto& e : *p.family) {
      Json entry;
      entry["basis"] = rows_to_json(e.rows);
      entry["weight"] = e.weight;
      fam.push_back(entry);
    }
    j["family"] = fam;
  }
  if (p.vectors) j["vectors"] = rows_to_json(*p.vectors);
  if (p.op) j["operator"]["matrix"] = rows_to_json(*p.op);
  return j;
}

/// Canonical text form: two-space indent, trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  } catch (const Json::out_of_range& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
  out << text;
}

inline ProblemFile parse_problem(const std::string& text) {
  return problem_from_json(parse_json(text));
}

inline ProblemFile load_problem(const std::string& path) { return parse_problem(read_file(path)); }

inline void save_problem(const ProblemFile& p, const std::string& path) {
  write_file(path, dump(to_json(p)));
}

inline KreinSpace krein_space(const ProblemFile& p, const Tolerances& tol = {}) {
  if (p.j_signs) {
    Vector s(p.dimension);
    for (Eigen::Index i = 0; i < p.dimension; ++i) s(i) = (*p.j_signs)[static_cast<std::size_t>(i)];
    return make_krein_space(s.asDiagonal().toDenseMatrix(), tol.sym);
  }
  return make_krein_space(*p.j_matrix, tol.sym);
}

inline WeightedSubspaceFamily to_family(const ProblemFile& p, const KreinSpace& k,
                                        const Tolerances& tol = {}) {
  if (!p.family) throw Error(ErrorCode::SchemaError, "problem has no \"family\"");
  std::vector<Subspace> subspaces;
  std::vector<double> weights;
  for (const auto& e : *p.family) {
    subspaces.push_back(span(Matrix(e.rows.transpose()), k, tol.rank));
    weights.push_back(e.weight);
  }
  return make_weighted_family(subspaces, weights, k, tol);
}

/// Vectors as columns.
inline Matrix frame_vectors(const ProblemFile& p) {
  if (!p.vectors) throw Error(ErrorCode::SchemaError, "problem has no \"vectors\"");
  return p.vectors->transpose();
}

inline ProblemFile problem_from_family(const WeightedSubspaceFamily& f,
                                       const std::optional<std::vector<int>>& signs = std::nullopt) {
  ProblemFile p;
  p.dimension = f.space.dim();
  if (signs)
    p.j_signs = signs;
  else
    p.j_matrix = f.space.J();
  std::vector<ProblemEntry> entries;
  for (const auto& e : f.entries) entries.push_back({e.subspace.basis().transpose(), e.weight});
  p.family = std::move(entries);
  return p;
}

/// Parses "key=value,key=value" over sym, num, def, rank.
inline Tolerances parse_tolerances(const std::string& spec, Tolerances base = {}) {
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError, "tolerance item \"" + item + "\" lacks '='");
    const std::string key = item.substr(0, eq);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad tolerance value in \"" + item + "\"");
    }
    if (!(value > 0.0) || !std::isfinite(value))
      throw Error(ErrorCode::ParseError, "tolerance must be positive: \"" + item + "\"");
    if (key == "sym")
      base.sym = value;
    else if (key == "num")
      base.num = value;
    else if (key == "def")
      base.def = value;
    else if (key == "rank")
      base.rank = value;
    else
      throw Error(ErrorCode::ParseError, "unknown tolerance \"" + key + "\"");
  }
  return base;
}

inline Tolerances tolerances_from_env(Tolerances base = {}) {
  const char* env = std::getenv("KREINFRAME_TOLERANCE");
  return env ? parse_tolerances(env, base) : base;
}

inline Json to_json(const Tolerances& t) {
  Json j;
  j["sym"] = t.sym;
  j["num"] = t.num;
  j["def"] = t.def;
  j["rank"] = t.rank;
  return j;
}

inline Tolerances tolerances_from_json(const Json& j) {
  detail::only_keys(j, "tolerances", {"sym", "num", "def", "rank"});
  Tolerances t;
  t.sym = detail::number(detail::require(j, "tolerances", "sym"), "tolerances.sym");
  t.num = detail::number(detail::require(j, "tolerances", "num"), "tolerances.num");
  t.def = detail::number(detail::require(j, "tolerances", "def"), "tolerances.def");
  t.rank = detail::number(detail::require(j, "tolerances", "rank"), "tolerances.rank");
  return t;
}

inline Json to_json(const JBounds& b) {
  Json j;
  j["B_minus"] = to_json(b.neg_lower);
  j["A_minus"] = to_json(b.neg_upper);
  j["A_plus"] = to_json(b.pos_lower);
  j["B_plus"] = to_json(b.pos_upper);
  return j;
}

inline JBounds bounds_from_json(const Json& j, const std::string& where) {
  detail::only_keys(j, where, {"B_minus", "A_minus", "A_plus", "B_plus"});
  JBounds b;
  b.neg_lower = detail::number(detail::require(j, where, "B_minus"), where + ".B_minus");
  b.neg_upper = detail::number(detail::require(j, where, "A_minus"), where + ".A_minus");
  b.pos_lower = detail::number(detail::require(j, where, "A_plus"), where + ".A_plus");
  b.pos_upper = detail::number(detail::require(j, where, "B_plus"), where + ".B_plus");
  return b;
}

inline Json to_json(const Classification& c) {
  Json j;
  j["kind"] = to_string(c.kind);
  j["margin"] = to_json(c.margin);
  j["regular"] = c.regular;
  j["gamma"] = to_json(c.gamma);
  j["maximal_definite"] = c.maximal_definite;
  j["eigenvalues"] = to_json(c.eigenvalues);
  j["witness"] = c.witness ? to_json(*c.witness) : Json(nullptr);
  return j;
}

inline Json to_json(const std::vector<Witness>& ws) {
  Json a = Json::array();
  for (const auto& w : ws) {
    Json j;
    j["description"] = w.description;
    j["vector"] = w.vector ? to_json(*w.vector) : Json(nullptr);
    a.push_back(j);
  }
  return a;
}

inline Json to_json(const JFrameReport& r) {
  Json j;
  j["is_j_frame"] = r.is_j_frame;
  j["is_bessel"] = r.is_bessel;
  j["bessel_constant"] = to_json(r.bessel_constant);
  j["plus_class"] = r.plus_class ? to_json(*r.plus_class) : Json(nullptr);
  j["minus_class"] = r.minus_class ? to_json(*r.minus_class) : Json(nullptr);
  j["bounds"] = r.bounds ? to_json(*r.bounds) : Json(nullptr);
  j["bound_estimates"] = r.bound_estimates ? to_json(*r.bound_estimates) : Json(nullptr);
  j["witnesses"] = to_json(r.witnesses);
  j["cond_S"] = to_json(r.cond_s);
  return j;
}

inline Json to_json(const GammaData& g) {
  Json j;
  j["gamma_T_plus"] = to_json(g.gamma_t_plus);
  j["gamma_T_minus"] = to_json(g.gamma_t_minus);
  j["gamma_G_plus"] = to_json(g.gamma_g_plus);
  j["gamma_G_minus"] = to_json(g.gamma_g_minus);
  j["norm_T_plus"] = to_json(g.norm_t_plus);
  j["norm_T_minus"] = to_json(g.norm_t_minus);
  return j;
}

inline Json to_json(const FusionReport& r) {
  Json j;
  j["verdict"] = r.verdict;
  j["bessel_C"] = to_json(r.bessel_c);
  j["hilbert_lower"] = to_json(r.hilbert_lower);
  j["hilbert_verdict"] = r.hilbert_verdict;
  j["plus_class"] = r.plus_class ? to_json(*r.plus_class) : Json(nullptr);
  j["minus_class"] = r.minus_class ? to_json(*r.minus_class) : Json(nullptr);
  j["bounds_optimal"] = r.bounds_optimal ? to_json(*r.bounds_optimal) : Json(nullptr);
  j["bounds_estimate"] = r.bounds_estimate ? to_json(*r.bounds_estimate) : Json(nullptr);
  j["bounds_pi_squared"] = r.bounds_pi_squared ? to_json(*r.bounds_pi_squared) : Json(nullptr);
  j["bounds_literal"] = r.bounds_literal ? to_json(*r.bounds_literal) : Json(nullptr);
  j["gamma_data"] = r.verdict ? to_json(r.gamma_data) : Json(nullptr);
  j["witnesses"] = to_json(r.witnesses);
  Json rps = Json::array();
  for (const auto& e : r.rps_residuals) {
    Json x;
    x["index"] = e.index;
    x["r"] = to_json(e.r);
    x["r_prime"] = to_json(e.r_prime);
    rps.push_back(x);
  }
  j["rps_residuals"] = rps;
  j["cond_S"] = to_json(r.cond_s);
  return j;
}

inline Json to_json(const PreservationReport& r) {
  Json j;
  j["definiteness"] = r.definiteness;
  j["plus_maximality"] = r.plus_maximality;
  j["minus_maximality"] = r.minus_maximality;
  j["regularity"] = r.regularity;
  j["plus_regular"] = r.plus_regular;
  j["minus_regular"] = r.minus_regular;
  j["sufficient"] = r.sufficient;
  j["image_verdict"] = r.image_verdict;
  j["witnesses"] = to_json(r.witnesses);
  return j;
}

inline Json error_json(const Error& e) {
  Json j;
  j["code"] = to_string(e.code());
  j["message"] = e.what();
  j["index"] = e.index() ? Json(*e.index()) : Json(nullptr);
  j["witness"] = e.witness() && e.witness()->size() > 0 ? to_json(*e.witness()) : Json(nullptr);
  return j;
}

}  // namespace kreinframe::io

#endif  // KREINFRAME_IO_HPP
