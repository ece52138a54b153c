// kreinframe: certify J-frames and J-fusion frames from JSON problem files.
//
// Exit codes: 0 verdict true / success, 1 verdict false, 2 input error,
// 3 fast path disagrees with an oracle.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kreinframe/crosscheck.hpp"
#include "kreinframe/generator.hpp"
#include "kreinframe/io.hpp"
#include "kreinframe/kreinframe.hpp"

namespace kf = kreinframe;
using kf::io::Json;

namespace {

constexpr int kTrue = 0;
constexpr int kFalse = 1;
constexpr int kInputError = 2;
constexpr int kMismatch = 3;

struct Options {
  std::optional<double> tol_def, tol_num, tol_rank;
  std::uint64_t seed = 0;
  std::string variant = "qproj";
  std::string output;
};

kf::Tolerances tolerances(const Options& o) {
  kf::Tolerances t = kf::io::tolerances_from_env();
  if (o.tol_def) t.def = *o.tol_def;
  if (o.tol_num) t.num = *o.tol_num;
  if (o.tol_rank) t.rank = *o.tol_rank;
  return t;
}

kf::OperatorVariant variant(const Options& o) {
  return o.variant == "paper" ? kf::OperatorVariant::PaperLiteral : kf::OperatorVariant::QProj;
}

void emit(const Options& o, const Json& j) {
  const std::string text = kf::io::dump(j);
  if (o.output.empty())
    std::cout << text;
  else
    kf::io::write_file(o.output, text);
}

Json envelope(const std::string& command, const Options& o, const kf::Tolerances& t,
              const kf::io::ProblemFile& p) {
  Json j;
  j["command"] = command;
  j["variant"] = o.variant;
  j["seed"] = o.seed;
  j["tolerances"] = kf::io::to_json(t);
  j["problem"] = kf::io::to_json(p);
  return j;
}

double relative_asymmetry(const kf::Matrix& s, const kf::KreinSpace& k) {
  const double norm = kf::detail::spectral_norm(s);
  return norm > 0.0 ? kf::detail::spectral_norm(s - kf::j_adjoint(s, k)) / norm : 0.0;
}

Json operator_summary(const kf::WeightedSubspaceFamily& f, const Options& o,
                      const kf::Tolerances& t) {
  const kf::FusionOperator op = kf::fusion_frame_operator(f, variant(o), t);
  Json j;
  j["variant"] = o.variant;
  j["matrix"] = kf::io::rows_to_json(op.s);
  j["j_selfadjoint_residual"] = kf::io::to_json(relative_asymmetry(op.s, f.space));
  return j;
}

int cmd_classify(const Options& o, const std::string& path) {
  const kf::Tolerances t = tolerances(o);
  const auto p = kf::io::load_problem(path);
  const auto k = kf::io::krein_space(p, t);
  Json j = envelope("classify", o, t, p);
  Json entries = Json::array();
  if (p.family)
    for (const auto& e : *p.family)
      entries.push_back(kf::io::to_json(kf::classify(kf::span(kf::Matrix(e.rows.transpose()), k, t.rank), t)));
  Json vectors = Json::array();
  if (p.vectors)
    for (Eigen::Index r = 0; r < p.vectors->rows(); ++r)
      vectors.push_back(kf::io::to_json(
          kf::classify(kf::span(kf::Matrix(p.vectors->row(r).transpose()), k, t.rank), t)));
  j["result"]["entries"] = entries;
  j["result"]["vectors"] = vectors;
  emit(o, j);
  std::cerr << "classified " << entries.size() << " entries, " << vectors.size() << " vectors\n";
  return kTrue;
}

int cmd_verify(const Options& o, const std::string& path) {
  const kf::Tolerances t = tolerances(o);
  const auto p = kf::io::load_problem(path);
  const auto k = kf::io::krein_space(p, t);
  const auto f = kf::io::to_family(p, k, t);
  const kf::FusionReport r = kf::verify_j_fusion_frame(f, t);
  Json j = envelope("verify", o, t, p);
  j["result"] = kf::io::to_json(r);
  j["result"]["operator"] = operator_summary(f, o, t);
  emit(o, j);
  std::cerr << "J-fusion frame: " << (r.verdict ? "yes" : "no")
            << " (Hilbert fusion frame: " << (r.hilbert_verdict ? "yes" : "no") << ")\n";
  for (const auto& w : r.witnesses) std::cerr << "  " << w.description << "\n";
  return r.verdict ? kTrue : kFalse;
}

int cmd_verify_frame(const Options& o, const std::string& path) {
  const kf::Tolerances t = tolerances(o);
  const auto p = kf::io::load_problem(path);
  const auto k = kf::io::krein_space(p, t);
  const auto f = kf::partition_by_sign(kf::io::frame_vectors(p), k, t);
  const kf::JFrameReport r = kf::verify_j_frame(f, t);
  Json j = envelope("verify-frame", o, t, p);
  j["result"] = kf::io::to_json(r);
  emit(o, j);
  std::cerr << "J-frame: " << (r.is_j_frame ? "yes" : "no") << "\n";
  for (const auto& w : r.witnesses) std::cerr << "  " << w.description << "\n";
  return r.is_j_frame ? kTrue : kFalse;
}

int cmd_bounds(const Options& o, const std::string& path) {
  const kf::Tolerances t = tolerances(o);
  const auto p = kf::io::load_problem(path);
  const auto k = kf::io::krein_space(p, t);
  Json j = envelope("bounds", o, t, p);
  Json res;
  bool verdict = false;
  if (p.family) {
    const auto r = kf::verify_j_fusion_frame(kf::io::to_family(p, k, t), t);
    verdict = r.verdict;
    const Json full = kf::io::to_json(r);
    for (const char* key : {"verdict", "bounds_optimal", "bounds_estimate", "bounds_pi_squared",
                            "bounds_literal", "gamma_data"})
      res[key] = full[key];
  } else {
    const auto r = kf::verify_j_frame(kf::partition_by_sign(kf::io::frame_vectors(p), k, t), t);
    verdict = r.is_j_frame;
    res["verdict"] = verdict;
    res["bounds_optimal"] = r.bounds ? kf::io::to_json(*r.bounds) : Json(nullptr);
    res["bounds_estimate"] = r.bound_estimates ? kf::io::to_json(*r.bound_estimates) : Json(nullptr);
  }
  if (verdict && !res["bounds_estimate"].is_null()) {
    const kf::JBounds opt = kf::io::bounds_from_json(res["bounds_optimal"], "bounds_optimal");
    const kf::JBounds est = kf::io::bounds_from_json(res["bounds_estimate"], "bounds_estimate");
    res["estimates_optimal"] = est.max_relative_difference(opt) <= t.num;
  }
  j["result"] = res;
  emit(o, j);
  std::cerr << "bounds " << (verdict ? "computed" : "undefined: not a frame") << "\n";
  return verdict ? kTrue : kFalse;
}

int cmd_dual(const Options& o, const std::string& path) {
  const kf::Tolerances t = tolerances(o);
  const auto p = kf::io::load_problem(path);
  const auto k = kf::io::krein_space(p, t);
  Json j = envelope("dual", o, t, p);
  Json res;
  if (p.family) {
    const auto f = kf::io::to_family(p, k, t);
    if (!kf::verify_j_fusion_frame(f, t).verdict) {
      res["verdict"] = false;
      j["result"] = res;
      emit(o, j);
      std::cerr << "not a J-fusion frame: no canonical dual\n";
      return kFalse;
    }
    const kf::DualFusion d = kf::canonical_dual_fusion(f, t);
    res["verdict"] = true;
    res["dual_problem"] = kf::io::to_json(kf::io::problem_from_family(d.family, p.j_signs));
    res["dual_verdict"] = d.dual_verdict;
    res["S_inverse"] = kf::io::rows_to_json(d.s_inverse);
    res["primal_bounds"] = kf::io::to_json(d.primal_bounds);
    res["dual_bounds"] = kf::io::to_json(d.dual_bounds);
    res["reciprocal_bounds"] = kf::io::to_json(d.primal_bounds.reciprocal());
    res["reciprocal_error"] = kf::io::to_json(d.reciprocal_error);
    res["image_identity_residual"] = kf::io::to_json(d.image_identity_residual);
    res["subspace_operator_residual"] = kf::io::to_json(d.subspace_operator_residual);
    std::cerr << "dual computed; reciprocal relative error " << d.reciprocal_error << "\n";
  } else {
    const auto f = kf::partition_by_sign(kf::io::frame_vectors(p), k, t);
    if (!kf::verify_j_frame(f, t).is_j_frame) {
      res["verdict"] = false;
      j["result"] = res;
      emit(o, j);
      std::cerr << "not a J-frame: no canonical dual\n";
      return kFalse;
    }
    const kf::VectorFrame d = kf::canonical_dual(f, t);
    const kf::DualBoundsCheck c = kf::dual_bounds_check(f, t);
    res["verdict"] = true;
    res["dual_vectors"] = kf::io::rows_to_json(d.vectors.transpose());
    res["primal_bounds"] = kf::io::to_json(c.primal);
    res["dual_bounds"] = kf::io::to_json(c.dual);
    res["reciprocal_bounds"] = kf::io::to_json(c.predicted);
    res["reciprocal_error"] = kf::io::to_json(c.relative_error);
    std::cerr << "dual computed; reciprocal relative error " << c.relative_error << "\n";
  }
  j["result"] = res;
  emit(o, j);
  return kTrue;
}

int cmd_transform(const Options& o, const std::string& path, const std::string& op_path) {
  const kf::Tolerances t = tolerances(o);
  auto p = kf::io::load_problem(path);
  if (!op_path.empty()) {
    const Json op = kf::io::parse_json(kf::io::read_file(op_path));
    kf::io::detail::only_keys(op, "operator file", {"matrix"});
    p.op = kf::io::detail::rows_of(kf::io::detail::require(op, "operator file", "matrix"),
                                   "matrix", p.dimension);
  }
  if (!p.op) throw kf::Error(kf::ErrorCode::SchemaError, "no operator given");
  if (p.op->rows() != p.dimension)
    throw kf::Error(kf::ErrorCode::SchemaError, "operator must be square");
  const auto k = kf::io::krein_space(p, t);
  const auto f = kf::io::to_family(p, k, t);
  Json j = envelope("transform", o, t, p);
  Json res;
  const kf::PreservationReport audit = kf::preservation_audit(*p.op, f, t);
  res["audit"] = kf::io::to_json(audit);
  try {
    const auto img = kf::apply_operator(*p.op, f, t);
    res["image_problem"] = kf::io::to_json(kf::io::problem_from_family(img, p.j_signs));
    res["image_error"] = nullptr;
  } catch (const kf::Error& e) {
    if (e.code() != kf::ErrorCode::IndefiniteOrNeutralSubspace) throw;
    res["image_problem"] = nullptr;
    res["image_error"] = kf::io::error_json(e);
    std::cerr << e.what() << "\n";
  }
  if (kf::verify_j_fusion_frame(f, t).verdict) {
    const kf::ImageFusionCheck c = kf::image_fusion_check(*p.op, f, t);
    res["decomposition"] = c.decomposition ? Json(*c.decomposition) : Json(nullptr);
    res["consistent"] = c.consistent;
  }
  j["result"] = res;
  emit(o, j);
  std::cerr << "image is " << (audit.image_verdict ? "" : "not ") << "a J-fusion frame\n";
  return audit.image_verdict ? kTrue : kFalse;
}

// Re-derives every checked number of a report from its embedded problem.
int cmd_oracle(const Options& o, const std::string& path) {
  const Json report = kf::io::parse_json(kf::io::read_file(path));
  kf::io::detail::only_keys(report, "report",
                            {"command", "variant", "seed", "tolerances", "problem", "result"});
  const std::string command = kf::io::detail::require(report, "report", "command").get<std::string>();
  const kf::Tolerances t = kf::io::tolerances_from_json(kf::io::detail::require(report, "report", "tolerances"));
  const auto p = kf::io::problem_from_json(kf::io::detail::require(report, "report", "problem"));
  const Json& res = kf::io::detail::require(report, "report", "result");
  const std::uint64_t seed = report.value("seed", std::uint64_t{0});
  const auto k = kf::io::krein_space(p, t);

  std::vector<kf::crosscheck::Comparison> cs;
  std::vector<std::string> notes;
  const auto flag = [&](const std::string& what, bool ok) {
    cs.push_back({what, "brute-force", ok ? 1.0 : 0.0, 1.0, 0.0, ok});
  };
  const auto claimed_bounds = [&](const char* key) -> std::optional<kf::JBounds> {
    if (!res.contains(key) || res.at(key).is_null()) return std::nullopt;
    return kf::io::bounds_from_json(res.at(key), key);
  };

  if (command == "verify" || command == "bounds") {
    const auto f = kf::io::to_family(p, k, t);
    // Verdict from classifications alone.
    bool brute = true;
    for (int sign : {1, -1}) {
      const auto& m = sign > 0 ? f.plus_span : f.minus_span;
      const Eigen::Index want = sign > 0 ? k.positive_dim() : k.negative_dim();
      if (!m) {
        brute = brute && want == 0;
        continue;
      }
      const auto c = kf::classify(*m, t);
      brute = brute && c.sign() == sign && m->dim() == want;
      const char* key = sign > 0 ? "plus_class" : "minus_class";
      if (res.contains(key) && !res.at(key).is_null() && kf::is_uniformly_definite(c.kind)) {
        kf::Classification claimed = c;
        claimed.margin = res.at(key).at("margin").get<double>();
        for (auto& x : kf::crosscheck::margin(*m, claimed, seed)) cs.push_back(x);
      }
    }
    flag("verdict", res.at("verdict").get<bool>() == brute);
    if (brute) {
      if (const auto b = claimed_bounds("bounds_optimal"))
        for (auto& x : kf::crosscheck::fusion_bounds(f, *b, seed, t)) cs.push_back(x);
      if (res.contains("gamma_data") && !res.at("gamma_data").is_null()) {
        const Json& g = res.at("gamma_data");
        kf::GammaData gd;
        gd.gamma_t_plus = g.at("gamma_T_plus").get<double>();
        gd.gamma_t_minus = g.at("gamma_T_minus").get<double>();
        gd.gamma_g_plus = g.at("gamma_G_plus").get<double>();
        gd.gamma_g_minus = g.at("gamma_G_minus").get<double>();
        gd.norm_t_plus = g.at("norm_T_plus").get<double>();
        gd.norm_t_minus = g.at("norm_T_minus").get<double>();
        for (auto& x : kf::crosscheck::fusion_gammas(f, gd, seed)) cs.push_back(x);
        if (const auto e = claimed_bounds("bounds_estimate")) {
          cs.push_back(kf::crosscheck::compare("B_plus estimate", "algebraic", e->pos_upper,
                                               gd.norm_t_plus * gd.norm_t_plus / gd.gamma_g_plus,
                                               kf::crosscheck::kAlgebraicTol));
          cs.push_back(kf::crosscheck::compare(
              "A_plus estimate", "algebraic", e->pos_lower,
              std::pow(gd.gamma_t_plus * gd.gamma_g_plus, 2), kf::crosscheck::kAlgebraicTol));
          cs.push_back(kf::crosscheck::compare("B_minus estimate", "algebraic", e->neg_lower,
                                               -gd.norm_t_minus * gd.norm_t_minus / gd.gamma_g_minus,
                                               kf::crosscheck::kAlgebraicTol));
          cs.push_back(kf::crosscheck::compare(
              "A_minus estimate", "algebraic", e->neg_upper,
              -std::pow(gd.gamma_t_minus * gd.gamma_g_minus, 2), kf::crosscheck::kAlgebraicTol));
        }
      }
    }
    if (res.contains("hilbert_lower")) {
      const auto hb = kf::oracle::hilbert_fusion_bounds(f.subspaces(), f.weights());
      cs.push_back(kf::crosscheck::compare("hilbert_lower", "algebraic",
                                           res.at("hilbert_lower").get<double>(), hb.first,
                                           kf::crosscheck::kAlgebraicTol));
    }
  } else if (command == "verify-frame") {
    const auto f = kf::partition_by_sign(kf::io::frame_vectors(p), k, t);
    bool brute = true;
    for (int sign : {1, -1}) {
      const auto& m = sign > 0 ? f.plus_span : f.minus_span;
      const Eigen::Index want = sign > 0 ? k.positive_dim() : k.negative_dim();
      if (!m) {
        brute = brute && want == 0;
        continue;
      }
      const auto c = kf::classify(*m, t);
      brute = brute && c.sign() == sign && m->dim() == want;
    }
    flag("verdict", res.at("is_j_frame").get<bool>() == brute);
    if (brute)
      if (const auto b = claimed_bounds("bounds"))
        for (auto& x : kf::crosscheck::frame_bounds(f, *b, seed)) cs.push_back(x);
  } else if (command == "classify") {
    if (p.family) {
      const Json& entries = res.at("entries");
      for (std::size_t i = 0; i < p.family->size(); ++i) {
        const auto w = kf::span(kf::Matrix((*p.family)[i].rows.transpose()), k, t.rank);
        kf::Classification c = kf::classify(w, t);
        flag("kind[" + std::to_string(i) + "]",
             entries.at(i).at("kind").get<std::string>() == kf::to_string(c.kind));
        c.margin = entries.at(i).at("margin").get<double>();
        for (auto& x : kf::crosscheck::margin(w, c, seed)) cs.push_back(x);
      }
    }
  } else if (command == "dual" || command == "transform") {
    notes.push_back("re-running the command and comparing verdict fields only");
    if (command == "dual") {
      const bool claimed = res.at("verdict").get<bool>();
      const bool actual = p.family ? kf::verify_j_fusion_frame(kf::io::to_family(p, k, t), t).verdict
                                   : kf::verify_j_frame(kf::partition_by_sign(kf::io::frame_vectors(p), k, t), t).is_j_frame;
      flag("verdict", claimed == actual);
      if (actual && !p.family) {
        const auto d = kf::canonical_dual(kf::partition_by_sign(kf::io::frame_vectors(p), k, t), t);
        for (auto& x : kf::crosscheck::frame_bounds(d, *claimed_bounds("dual_bounds"), seed))
          cs.push_back(x);
      }
    } else {
      const auto f = kf::io::to_family(p, k, t);
      bool image_ok = true;
      try {
        const auto img = kf::apply_operator(*p.op, f, t);
        for (int sign : {1, -1}) {
          const auto& m = sign > 0 ? img.plus_span : img.minus_span;
          const Eigen::Index want = sign > 0 ? k.positive_dim() : k.negative_dim();
          if (!m) {
            image_ok = image_ok && want == 0;
            continue;
          }
          const auto c = kf::classify(*m, t);
          image_ok = image_ok && c.sign() == sign && m->dim() == want;
        }
      } catch (const kf::Error&) {
        image_ok = false;
      }
      flag("image_verdict", res.at("audit").at("image_verdict").get<bool>() == image_ok);
    }
  } else {
    throw kf::Error(kf::ErrorCode::SchemaError, "unknown report command \"" + command + "\"");
  }

  Json out;
  out["command"] = "oracle";
  out["report_command"] = command;
  out["seed"] = seed;
  Json list = Json::array();
  Json mismatches = Json::array();
  for (const auto& c : cs) {
    Json x;
    x["quantity"] = c.quantity;
    x["method"] = c.method;
    x["claimed"] = kf::io::to_json(c.claimed);
    x["oracle"] = kf::io::to_json(c.oracle);
    x["tolerance"] = c.tolerance;
    x["ok"] = c.ok;
    list.push_back(x);
    if (!c.ok) mismatches.push_back(x);
  }
  out["comparisons"] = list;
  out["mismatches"] = mismatches;
  out["notes"] = notes;
  emit(o, out);
  std::cerr << cs.size() << " comparisons, " << mismatches.size() << " mismatches\n";
  return mismatches.empty() ? kTrue : kMismatch;
}

struct GenOptions {
  int n = 4;
  int p = 2;
  int plus = 2;
  int minus = 1;
  double rho = 0.5;
  double epsilon = 0.0;
  bool negative = false;
  bool dense_j = false;
  bool frame = false;
  std::string coupling = "independent";
};

int cmd_gen(const Options& o, const GenOptions& g) {
  kf::GeneratorConfig cfg;
  cfg.seed = o.seed;
  cfg.n = g.n;
  cfg.p = g.p;
  cfg.plus_entries = g.plus;
  cfg.minus_entries = g.minus;
  cfg.rho = g.rho;
  cfg.epsilon = g.epsilon;
  cfg.negative = g.negative;
  cfg.dense_j = g.dense_j;
  cfg.coupling = g.coupling == "orthogonal" ? kf::Coupling::Orthogonal : kf::Coupling::Independent;
  const kf::io::ProblemFile p = g.frame ? kf::gen_frame(cfg) : kf::gen_family(cfg);
  emit(o, kf::io::to_json(p));
  return kTrue;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certify J-frames and J-fusion frames in finite-dimensional Krein spaces"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--tol-def", o.tol_def, "definiteness margin threshold");
  app.add_option("--tol-num", o.tol_num, "identity residual threshold");
  app.add_option("--tol-rank", o.tol_rank, "relative rank threshold");
  app.add_option("--seed", o.seed, "seed for the generator and sampling oracles");
  app.add_option("--variant", o.variant, "frame operator variant")
      ->check(CLI::IsMember({"qproj", "paper"}));
  app.add_option("-o,--output", o.output, "write JSON here instead of stdout");

  std::string problem, op_path;
  auto* classify = app.add_subcommand("classify", "classify every entry and vector span");
  classify->add_option("problem", problem)->required();
  auto* verify = app.add_subcommand("verify", "certify a weighted subspace family");
  verify->add_option("problem", problem)->required();
  auto* verify_frame = app.add_subcommand("verify-frame", "certify a vector family");
  verify_frame->add_option("problem", problem)->required();
  auto* bounds = app.add_subcommand("bounds", "optimal and estimated frame bounds");
  bounds->add_option("problem", problem)->required();
  auto* dual = app.add_subcommand("dual", "canonical dual and the reciprocal bound check");
  dual->add_option("problem", problem)->required();
  auto* transform = app.add_subcommand("transform", "audit the image of a family under an operator");
  transform->add_option("problem", problem)->required();
  transform->add_option("operator", op_path, "operator file (defaults to the problem's operator)");
  auto* oracle = app.add_subcommand("oracle", "re-verify a report against brute-force oracles");
  oracle->add_option("report", problem)->required();

  GenOptions g;
  auto* gen = app.add_subcommand("gen", "generate a seeded problem");
  gen->add_option("--n", g.n, "ambient dimension");
  gen->add_option("--p", g.p, "positive index");
  gen->add_option("--plus", g.plus, "positive entries (vectors with --frame)");
  gen->add_option("--minus", g.minus, "negative entries (vectors with --frame)");
  gen->add_option("--rho", g.rho, "angular operator norm bound in [0, 1)");
  gen->add_option("--epsilon", g.epsilon, "noise on the planted neutral direction");
  gen->add_flag("--negative", g.negative, "plant a neutral direction");
  gen->add_flag("--dense-j", g.dense_j, "rotate J away from diagonal form");
  gen->add_flag("--frame", g.frame, "emit vectors instead of a family");
  gen->add_option("--coupling", g.coupling, "independent or orthogonal")
      ->check(CLI::IsMember({"independent", "orthogonal"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kTrue : kInputError;
  }

  try {
    if (*classify) return cmd_classify(o, problem);
    if (*verify) return cmd_verify(o, problem);
    if (*verify_frame) return cmd_verify_frame(o, problem);
    if (*bounds) return cmd_bounds(o, problem);
    if (*dual) return cmd_dual(o, problem);
    if (*transform) return cmd_transform(o, problem, op_path);
    if (*oracle) return cmd_oracle(o, problem);
    if (*gen) return cmd_gen(o, g);
  } catch (const kf::Error& e) {
    std::cerr << e.what() << "\n";
    Json j;
    j["error"] = kf::io::error_json(e);
    std::cout << kf::io::dump(j);
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "SchemaError: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
