#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace kreinframe;
using support::cols;
using support::diag;
using support::vec;

namespace {

const double kRootHalf = std::sqrt(0.5);

WeightedSubspaceFamily load_family(const std::string& name) {
  const auto p = io::load_problem(support::fixture(name));
  return io::to_family(p, io::krein_space(p));
}

WeightedSubspaceFamily eigen_family(double weight = 1.0) {
  const auto k = diag({1, 1, -1});
  return make_weighted_family({span(cols({{1, 0, 0}, {0, 1, 0}}), k), span(cols({{0, 0, 1}}), k)},
                              {weight, weight}, k);
}

void expect_bounds(const JBounds& b, double bm, double am, double ap, double bp, double tol) {
  EXPECT_NEAR(b.neg_lower, bm, tol);
  EXPECT_NEAR(b.neg_upper, am, tol);
  EXPECT_NEAR(b.pos_lower, ap, tol);
  EXPECT_NEAR(b.pos_upper, bp, tol);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ParseError;
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> normal;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

}  // namespace

TEST(WeightedFamily, ThreeDimensionalExample) {
  const auto f = load_family("r3_example.json");
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f.entries[0].sign, 1);
  EXPECT_EQ(f.entries[1].sign, 1);
  EXPECT_EQ(f.entries[2].sign, -1);
  EXPECT_EQ(f.offsets, (std::vector<Eigen::Index>{0, 1, 2, 3}));
}

TEST(WeightedFamily, Rejections) {
  const auto k = diag({1, -1});
  EXPECT_EQ(code_of([&] { make_weighted_family({span(cols({{1, 0}}), k)}, {0.0}, k); }),
            ErrorCode::NonPositiveWeight);
  try {
    make_weighted_family({span(cols({{1, 0}}), k), span(cols({{1, 1}}), k)}, {1, 1}, k);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndefiniteOrNeutralSubspace);
    EXPECT_EQ(e.index().value_or(99), 1u);
    ASSERT_TRUE(e.witness().has_value());
    EXPECT_NEAR(indefinite_product(*e.witness(), *e.witness(), k), 0, 1e-15);
  }
}

TEST(BesselBound, Examples) {
  const auto k = diag({1, -1});
  EXPECT_NEAR(bessel_bound(make_weighted_family({span(cols({{1, 0}}), k)}, {1}, k)), 1, 1e-15);
  const auto f = load_family("r3_example.json");
  Matrix sum = Matrix::Zero(3, 3);
  for (const auto& v : {vec({1, 0, kRootHalf}), vec({0, 1, kRootHalf}), vec({0, 0, 1})})
    sum += v * v.transpose() / v.squaredNorm();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sum);
  EXPECT_NEAR(bessel_bound(f), eig.eigenvalues().maxCoeff(), 1e-13);
  const auto scaled = make_weighted_family(f.subspaces(), {3, 3, 3}, f.space);
  EXPECT_NEAR(bessel_bound(scaled), 9 * bessel_bound(f), 1e-12);
}

TEST(FusionSynthesis, SingleEntry) {
  const auto k = diag({1, -1});
  const auto f = make_weighted_family({span(cols({{1, 0}}), k)}, {1}, k);
  EXPECT_LE((fusion_synthesis(f).t - cols({{1, 0}})).norm(), 1e-15);
}

TEST(FusionSynthesis, ThreeDimensionalExample) {
  const auto f = load_family("r3_example.json");
  const auto s = fusion_synthesis(f);
  EXPECT_EQ(s.t.rows(), 3);
  EXPECT_EQ(s.t.cols(), 3);
  EXPECT_EQ(s.t_plus.cols(), 2);
  EXPECT_EQ(Eigen::ColPivHouseholderQR<Matrix>(s.t_plus).rank(), 2);
  // Reconstruction of a member: block coordinates B_i^T w give v_i w.
  const Vector w = vec({0, 0, 2.5});
  Vector c = Vector::Zero(3);
  c.segment(f.offsets[2], 1) = f.entries[2].subspace.basis().transpose() * w;
  EXPECT_LE((s.t * c - f.entries[2].weight * w).norm(), 1e-15);
}

TEST(DirectSum, SignOperator) {
  const auto f = load_family("r3_example.json");
  const auto d = direct_sum_space(f);
  EXPECT_EQ(d.dim, 3);
  EXPECT_LE((d.j2 * d.j2 - Matrix::Identity(3, 3)).norm(), 1e-15);
  EXPECT_EQ(d.j2(2, 2), -1.0);
}

TEST(FusionAnalysis, VariantsCoincideOnCanonicalPart) {
  const auto k = diag({1, -1});
  const auto f = make_weighted_family({span(cols({{1, 0}}), k)}, {1}, k);
  const Matrix q = fusion_analysis(f, OperatorVariant::QProj);
  const Matrix p = fusion_analysis(f, OperatorVariant::PaperLiteral);
  EXPECT_LE((q - p).norm(), 1e-15);
  EXPECT_LE((f.entries[0].subspace.basis() * q - k.plus_projector()).norm(), 1e-15);
}

TEST(FusionAnalysis, VariantsDifferOffCanonicalPart) {
  const auto k = diag({1, -1});
  const Subspace w = span(cols({{1, 0.5}}), k);
  const auto f = make_weighted_family({w}, {1}, k);
  const Matrix b = w.basis();
  const Matrix q = b * fusion_analysis(f, OperatorVariant::QProj);
  const Matrix p = b * fusion_analysis(f, OperatorVariant::PaperLiteral);
  EXPECT_LE((q - j_projection(w)).norm(), 1e-14);
  EXPECT_LE((q * vec({1, 0.5}) - vec({1, 0.5})).norm(), 1e-14);
  EXPECT_LE((p - b * b.transpose() * k.J() * orthogonal_projection(w) * k.J()).norm(), 1e-14);
  EXPECT_GT((q - p).norm(), 0.1);
}

TEST(FusionAnalysis, QProjIsTheIndefiniteAdjoint) {
  std::mt19937_64 rng(5);
  const auto inst = support::family_instance(support::random_config(12));
  const auto& f = inst.family;
  const Matrix t = fusion_synthesis(f).t;
  const Matrix ts = fusion_analysis(f, OperatorVariant::QProj);
  const Matrix gram = direct_sum_space(f).gram;
  for (int i = 0; i < 50; ++i) {
    const Vector c = random_matrix(rng, f.total_dim(), 1);
    const Vector x = random_matrix(rng, inst.space.dim(), 1);
    const double lhs = indefinite_product(t * c, x, inst.space);
    const double rhs = c.dot(gram * (ts * x));
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * (1 + std::abs(lhs)));
  }
}

TEST(FusionOperator, HilbertCaseBothVariants) {
  const auto k = make_krein_space(Matrix::Identity(3, 3));
  const std::vector<Subspace> ws{span(cols({{1, 1, 0}}), k), span(cols({{0, 1, 0}, {0, 0, 1}}), k)};
  const auto f = make_weighted_family(ws, {1.5, 0.7}, k);
  const Matrix hilbert =
      2.25 * orthogonal_projection(ws[0]) + 0.49 * orthogonal_projection(ws[1]);
  EXPECT_LE((fusion_frame_operator(f, OperatorVariant::QProj).s - hilbert).norm(), 1e-14);
  EXPECT_LE((fusion_frame_operator(f, OperatorVariant::PaperLiteral).s - hilbert).norm(), 1e-14);
}

TEST(FusionOperator, TwoDimensionalSelfadjointness) {
  const auto k = diag({1, -1});
  const Subspace w = span(cols({{1, 0.5}}), k);
  const auto f = make_weighted_family({w}, {1}, k);
  const Matrix q = fusion_frame_operator(f, OperatorVariant::QProj).s;
  EXPECT_LE((q - j_projection(w)).norm(), 1e-14);
  EXPECT_LE((q - j_adjoint(q, k)).norm(), 1e-12);
  const Matrix p = fusion_frame_operator(f, OperatorVariant::PaperLiteral).s;
  EXPECT_GT((p - j_adjoint(p, k)).norm(), 0.1);
}

TEST(FusionOperator, Eigenbasis) {
  const auto f = eigen_family();
  EXPECT_LE((fusion_frame_operator(f, OperatorVariant::QProj).s - Matrix::Identity(3, 3)).norm(),
            1e-15);
  // The verbatim sigma-weighted sum gives J on this family.
  EXPECT_LE((fusion_frame_operator(f, OperatorVariant::PaperLiteral).s - f.space.J()).norm(), 1e-15);
}

TEST(FusionOperator, TheoremPropertiesOnGeneratedFamilies) {
  std::mt19937_64 rng(13);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = support::family_instance(support::random_config(seed));
    const auto& f = inst.family;
    const auto op = fusion_frame_operator(f, OperatorVariant::QProj);
    const double norm = detail::spectral_norm(op.s);
    EXPECT_LE(detail::spectral_norm(op.s - j_adjoint(op.s, inst.space)) / norm, 1e-12);
    EXPECT_LE(detail::spectral_norm(op.s - op.s_plus + op.s_minus) / norm, 1e-12);
    const Matrix tts = fusion_synthesis(f).t * fusion_analysis(f, OperatorVariant::QProj);
    EXPECT_LE(detail::spectral_norm(op.s - tts) / norm, 1e-12);
    Eigen::JacobiSVD<Matrix> svd(op.s);
    EXPECT_GT(svd.singularValues().minCoeff(), 1e-9);
    for (int t = 0; t < 10; ++t) {
      const Vector x = random_matrix(rng, inst.space.dim(), 1);
      EXPECT_GE(indefinite_product(op.s_plus * x, x, inst.space), -1e-9 * x.squaredNorm());
      EXPECT_GE(indefinite_product(op.s_minus * x, x, inst.space), -1e-9 * x.squaredNorm());
    }
  }
}

TEST(VerifyFusion, ThreeDimensionalExample) {
  const auto f = load_family("r3_example.json");
  const auto r = verify_j_fusion_frame(f);
  EXPECT_FALSE(r.verdict);
  EXPECT_TRUE(r.hilbert_verdict);
  EXPECT_NEAR(r.hilbert_lower, 1.0 / 3.0, 1e-12);
  ASSERT_FALSE(r.witnesses.empty());
  ASSERT_TRUE(r.witnesses[0].vector.has_value());
  const Vector w = r.witnesses[0].vector->normalized();
  EXPECT_NEAR(std::abs(w.dot(vec({1, 1, std::sqrt(2.0)}).normalized())), 1, 1e-12);
}

TEST(VerifyFusion, EigenbasisAndGenerated) {
  EXPECT_TRUE(verify_j_fusion_frame(eigen_family()).verdict);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = support::family_instance(support::random_config(seed));
    const auto r = verify_j_fusion_frame(inst.family);
    EXPECT_TRUE(r.verdict) << "seed " << seed;
    ASSERT_TRUE(r.bounds_optimal.has_value());
    EXPECT_TRUE(r.bounds_optimal->well_ordered());
  }
}

TEST(VerifyFusion, VerdictFromClassificationAlone) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto cfg = support::random_config(seed);
    cfg.rho = 0.3;
    const auto inst = support::family_instance(cfg);
    const auto& f = inst.family;
    bool expected = true;
    for (int sign : {1, -1}) {
      const auto& m = sign > 0 ? f.plus_span : f.minus_span;
      const Eigen::Index want = sign > 0 ? inst.space.positive_dim() : inst.space.negative_dim();
      if (!m) {
        expected = expected && want == 0;
        continue;
      }
      const auto c = classify(*m);
      expected = expected && c.sign() == sign && c.maximal_definite;
    }
    EXPECT_EQ(verify_j_fusion_frame(f).verdict, expected);
  }
}

TEST(VerifyFusion, HilbertReduction) {
  const auto k = make_krein_space(Matrix::Identity(3, 3));
  const auto complete = make_weighted_family(
      {span(cols({{1, 1, 0}}), k), span(cols({{0, 1, 0}, {0, 0, 1}}), k)}, {1, 1}, k);
  EXPECT_TRUE(verify_j_fusion_frame(complete).verdict);
  const auto partial = make_weighted_family({span(cols({{1, 1, 0}}), k)}, {1}, k);
  EXPECT_FALSE(verify_j_fusion_frame(partial).verdict);
  EXPECT_EQ(oracle::hilbert_fusion_bounds(partial.subspaces(), {1}).first, 0.0);
}

TEST(FusionBounds, EigenbasisEstimatesAndOptimal) {
  const auto f = eigen_family();
  GammaData g;
  expect_bounds(fusion_bound_estimates(f, {}, &g), -1, -1, 1, 1, 1e-14);
  EXPECT_NEAR(g.gamma_t_plus, 1, 1e-14);
  EXPECT_NEAR(g.gamma_g_minus, 1, 1e-14);
  EXPECT_NEAR(g.norm_t_plus, 1, 1e-14);
  expect_bounds(optimal_fusion_bounds(f), -1, -1, 1, 1, 1e-14);
}

TEST(FusionBounds, TwoOrthogonalPositiveEntries) {
  const auto f = load_family("two_positive_entries.json");
  const JBounds est = fusion_bound_estimates(f);
  EXPECT_NEAR(est.pos_upper, 4, 1e-14);
  EXPECT_NEAR(est.pos_lower, 1, 1e-14);
}

TEST(FusionBounds, SingleEntryOnCoupledPart) {
  const JBounds b = optimal_fusion_bounds(load_family("rps_2d.json"));
  EXPECT_NEAR(b.pos_lower, 1, 1e-14);
  EXPECT_NEAR(b.pos_upper, 1, 1e-14);
}

TEST(FusionBounds, NotAFusionFrame) {
  EXPECT_EQ(code_of([] { optimal_fusion_bounds(load_family("r3_example.json")); }),
            ErrorCode::NotAJFusionFrame);
  EXPECT_EQ(code_of([] { fusion_bound_estimates(load_family("r3_example.json")); }),
            ErrorCode::NotAJFusionFrame);
}

TEST(FusionBounds, SandwichAndOracle) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto cfg = support::random_config(seed, 6);
    const auto inst = support::family_instance(cfg);
    const JBounds opt = optimal_fusion_bounds(inst.family);
    const JBounds est = fusion_bound_estimates(inst.family);
    EXPECT_LE(est.pos_lower, opt.pos_lower + 1e-9);
    EXPECT_LE(opt.pos_upper, est.pos_upper + 1e-9);
    EXPECT_LE(est.neg_lower, opt.neg_lower + 1e-9);
    EXPECT_LE(opt.neg_upper, est.neg_upper + 1e-9);
    for (const auto& c : crosscheck::fusion_bounds(inst.family, opt, seed)) {
      if (c.method == "sampling") {
        EXPECT_NEAR(c.claimed, c.oracle, 1e-6) << c.quantity;
      }
    }
  }
}

TEST(FusionBounds, GeneratedFixtureEstimatesAreNotOptimal) {
  const auto f = load_family("generated_n5.json");
  const JBounds opt = optimal_fusion_bounds(f);
  const JBounds est = fusion_bound_estimates(f);
  EXPECT_LT(est.pos_lower, opt.pos_lower - 0.1);
  EXPECT_GT(est.pos_upper, opt.pos_upper + 0.1);
}

TEST(DualFusion, Eigenbasis) {
  const auto f = eigen_family();
  const auto d = canonical_dual_fusion(f);
  EXPECT_LE((d.s_inverse - Matrix::Identity(3, 3)).norm(), 1e-15);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_TRUE(same_span(d.family.entries[i].subspace, f.entries[i].subspace, 1e-14));
  EXPECT_TRUE(d.dual_verdict);
}

TEST(DualFusion, ScalarFrameOperator) {
  const auto f = eigen_family(std::sqrt(2.0));
  const auto d = canonical_dual_fusion(f);
  EXPECT_LE((fusion_frame_operator(f).s - 2 * Matrix::Identity(3, 3)).norm(), 1e-14);
  expect_bounds(d.primal_bounds, -2, -2, 2, 2, 1e-14);
  expect_bounds(d.dual_bounds, -0.5, -0.5, 0.5, 0.5, 1e-14);
  EXPECT_LE(d.reciprocal_error, 1e-14);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_TRUE(same_span(d.family.entries[i].subspace, f.entries[i].subspace, 1e-14));
}

TEST(DualFusion, OrthogonalCouplingIsReciprocal) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto cfg = support::random_config(seed);
    cfg.coupling = Coupling::Orthogonal;
    const auto d = canonical_dual_fusion(support::family_instance(cfg).family);
    EXPECT_TRUE(d.dual_verdict);
    EXPECT_LE(d.reciprocal_error, 1e-8) << "seed " << seed;
    EXPECT_LE(d.image_identity_residual, 1e-9);
    EXPECT_LE(detail::spectral_norm(d.s_dual - d.s_inverse) / detail::spectral_norm(d.s_inverse),
              1e-8);
  }
}

// W1 = span{(1, 1/2)}, W2 = span{e2} in diag(1, -1). S = [[4/3, -2/3], [2/3, 2/3]],
// S^{-1} = [[1/2, 1/2], [-1/2, 1]], S^{-1} W1 = span{e1}, S^{-1} e2 = (1/2, 1).
// Both dual parts have bounds of magnitude 3/4 against the predicted 1.
TEST(DualFusion, CoupledPartsBreakReciprocity) {
  const auto d = canonical_dual_fusion(load_family("rps_2d.json"));
  expect_bounds(d.primal_bounds, -1, -1, 1, 1, 1e-14);
  expect_bounds(d.dual_bounds, -0.75, -0.75, 0.75, 0.75, 1e-14);
  EXPECT_NEAR(d.reciprocal_error, 0.25, 1e-14);
  EXPECT_LE((d.s_dual - d.s_inverse).norm(), 1e-14);
  EXPECT_NEAR(d.subspace_operator_residual, 1.0 / 3.0, 1e-14);
  EXPECT_TRUE(d.dual_verdict);
  EXPECT_LE(d.image_identity_residual, 1e-14);
}

TEST(JImage, CoordinateSubspacesAreFixed) {
  const auto f = eigen_family();
  const auto img = j_image_family(f);
  EXPECT_TRUE(img.verdict);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_TRUE(same_span(img.family.entries[i].subspace, f.entries[i].subspace, 1e-15));
}

TEST(JImage, CoupledEntry) {
  const auto k = diag({1, -1, 1, -1});
  const auto f = make_weighted_family(
      {span(cols({{1, 0.5, 0, 0}}), k), span(cols({{0, 0, 1, 0}}), k),
       span(cols({{0, 1, 0, 0}}), k), span(cols({{0, 0, 0, 1}}), k)},
      {1, 1, 1, 1}, k);
  const auto img = j_image_family(f);
  EXPECT_TRUE(img.verdict);
  EXPECT_TRUE(same_span(img.family.entries[0].subspace, span(cols({{1, -0.5, 0, 0}}), k), 1e-14));
  EXPECT_LE(img.plus_identity_residual, 1e-14);
  EXPECT_LE(img.minus_identity_residual, 1e-14);
  const auto twice = j_image_family(img.family);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_TRUE(same_span(twice.family.entries[i].subspace, f.entries[i].subspace, 1e-14));
}

TEST(Equivalence, Examples) {
  const auto k = diag({1, 1, -1});
  const auto eig = fusion_from_frame_sequences(
      {cols({{1, 0, 0}}), cols({{0, 1, 0}}), cols({{0, 0, 1}})}, {1, 1, 1}, k);
  EXPECT_TRUE(eig.frame_verdict);
  EXPECT_TRUE(eig.fusion_verdict);
  const auto r3 = fusion_from_frame_sequences(
      {cols({{1, 0, kRootHalf}}), cols({{0, 1, kRootHalf}}), cols({{0, 0, 1}})}, {1, 1, 1}, k);
  EXPECT_FALSE(r3.frame_verdict);
  EXPECT_FALSE(r3.fusion_verdict);
  EXPECT_TRUE(r3.agree);
  try {
    fusion_from_frame_sequences({cols({{1, 0, 0}, {0, 0, 1}})}, {1}, k);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndefiniteSpan);
    EXPECT_EQ(e.index().value_or(99), 0u);
  }
}

TEST(Equivalence, GeneratedChunks) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = support::family_instance(support::random_config(seed));
    std::vector<Matrix> seqs;
    for (const auto& e : inst.family.entries) seqs.push_back(e.subspace.basis());
    const auto r = fusion_from_frame_sequences(seqs, inst.family.weights(), inst.space);
    EXPECT_TRUE(r.frame_verdict);
    EXPECT_TRUE(r.fusion_verdict);
    EXPECT_GT(r.inf_lower, 0);
  }
}

TEST(RpsCorollary, HilbertCase) {
  const auto k = make_krein_space(Matrix::Identity(3, 3));
  const auto f = make_weighted_family(
      {span(cols({{1, 1, 0}}), k), span(cols({{0, 1, 0}, {0, 0, 1}}), k)}, {1, 1}, k);
  for (const auto& r : check_rps_corollary(f)) {
    EXPECT_LE(r.r, 1e-14);
    EXPECT_LE(r.r_prime, 1e-14);
  }
}

// W = M+ = span{u}, u = (1, 1/2): J pi_W J pi_W - pi_W has norm 0.8.
TEST(RpsCorollary, LiteralFormulaFailsOnCoupledPart) {
  const auto rs = check_rps_corollary(load_family("rps_2d.json"));
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_NEAR(rs[0].r, 0.8, 1e-14);
  EXPECT_LE(rs[0].r_prime, 1e-12);
}

TEST(RpsCorollary, CoordinateSubspaces) {
  for (const auto& r : check_rps_corollary(load_family("two_positive_entries.json")))
    EXPECT_LE(r.r, 1e-12);
}

TEST(Transforms, IdentityAndJ) {
  const auto inst = support::family_instance(support::random_config(4));
  const auto& f = inst.family;
  const auto same = apply_operator(Matrix::Identity(f.space.dim(), f.space.dim()), f);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_TRUE(same_span(same.entries[i].subspace, f.entries[i].subspace, 1e-12));
  const auto viaj = apply_operator(f.space.J(), f);
  const auto img = j_image_family(f);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_TRUE(same_span(viaj.entries[i].subspace, img.family.entries[i].subspace, 1e-12));
  const auto check = image_fusion_check(Matrix::Identity(f.space.dim(), f.space.dim()), f);
  EXPECT_TRUE(check.sufficient);
  EXPECT_TRUE(check.consistent);
}

TEST(Transforms, NeutralImageOfTruncation) {
  const auto p = io::load_problem(support::fixture("l2_truncation.json"));
  const auto k = io::krein_space(p);
  const auto f = io::to_family(p, k);
  ASSERT_TRUE(p.op.has_value());
  try {
    apply_operator(*p.op, f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndefiniteOrNeutralSubspace);
    EXPECT_EQ(e.index().value_or(99), 0u);
    ASSERT_TRUE(e.witness().has_value());
    const Vector w = *e.witness();
    EXPECT_NEAR(indefinite_product(w, w, k), 0, 1e-12);
    EXPECT_NEAR(std::abs(w.normalized().dot(vec({1, 1, 0, 0}).normalized())), 1, 1e-12);
  }
  const auto audit = preservation_audit(*p.op, f);
  EXPECT_FALSE(audit.definiteness[0]);
  EXPECT_FALSE(audit.sufficient);
  EXPECT_FALSE(audit.image_verdict);
  try {
    projection_commutation_residual(*p.op, f.entries[0].subspace);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotRegular);
    EXPECT_EQ(e.index().value_or(99), 1u);
  }
}

TEST(Transforms, SingularOperator) {
  const auto f = eigen_family();
  Matrix t = Matrix::Identity(3, 3);
  t(2, 2) = 0;
  EXPECT_EQ(code_of([&] { preservation_audit(t, f); }), ErrorCode::NotSurjective);
}

TEST(Transforms, ScaledJIsometries) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto cfg = support::random_config(seed);
    const auto inst = support::family_instance(cfg);
    const Eigen::Index p = cfg.p, q = cfg.n - cfg.p;
    const Matrix u = support::j_isometry(p, q, seed);
    EXPECT_LE((u.transpose() * inst.space.J() * u - inst.space.J()).norm(), 1e-10);
    const double c = seed % 2 ? 2.5 : -0.4;
    const auto audit = preservation_audit(c * u, inst.family);
    EXPECT_TRUE(audit.sufficient) << "seed " << seed;
    EXPECT_TRUE(audit.image_verdict);
    const auto check = image_fusion_check(c * u, inst.family);
    EXPECT_TRUE(check.consistent);
    ASSERT_TRUE(check.decomposition.has_value());
    EXPECT_TRUE(*check.decomposition);
  }
}

TEST(Transforms, RandomInvertibleOperatorsAreConsistent) {
  std::mt19937_64 rng(19);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = support::family_instance(support::random_config(seed, 6));
    const Eigen::Index n = inst.space.dim();
    const Matrix t = Matrix::Identity(n, n) + 0.3 * random_matrix(rng, n, n);
    if (!is_surjective(t, 1e-6)) continue;
    const auto check = image_fusion_check(t, inst.family);
    EXPECT_TRUE(check.consistent) << "seed " << seed;
  }
}

TEST(Transforms, ProjectionCommutation) {
  std::mt19937_64 rng(23);
  const auto k = diag({1, 1, 1, -1, -1, -1});
  const Subspace v0 = span(random_matrix(rng, 6, 2), k);
  if (classify(v0).regular) {
    EXPECT_LE(projection_commutation_residual(Matrix::Identity(6, 6), v0), 1e-12);
  }
  int tested = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix t = random_matrix(rng, 6, 6);
    const Subspace v = span(random_matrix(rng, 6, 1 + trial % 5), k);
    if (!classify(v).regular || !classify(image(t, v)).regular) continue;
    EXPECT_LE(projection_commutation_residual(t, v), 1e-10 * (1 + detail::spectral_norm(t)));
    ++tested;
  }
  EXPECT_GT(tested, 80);
  EXPECT_EQ(code_of([&] {
              projection_commutation_residual(Matrix::Identity(2, 2),
                                              span(cols({{1, 1}}), diag({1, -1})));
            }),
            ErrorCode::NotRegular);
}

TEST(Transforms, CompositionOfImages) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto cfg = support::random_config(seed);
    const auto inst = support::family_instance(cfg);
    const Eigen::Index p = cfg.p, q = cfg.n - cfg.p;
    const Matrix t1 = support::j_isometry(p, q, seed);
    const Matrix t2 = 1.5 * support::j_isometry(p, q, seed + 1000);
    const auto two_steps = apply_operator(t2, apply_operator(t1, inst.family));
    const auto one_step = apply_operator(t2 * t1, inst.family);
    for (std::size_t i = 0; i < inst.family.size(); ++i)
      EXPECT_TRUE(same_span(two_steps.entries[i].subspace, one_step.entries[i].subspace, 1e-9));
  }
}

TEST(Generator, Deterministic) {
  GeneratorConfig cfg;
  cfg.seed = 42;
  cfg.n = 6;
  cfg.p = 3;
  const std::string a = io::dump(io::to_json(gen_family(cfg)));
  const std::string b = io::dump(io::to_json(gen_family(cfg)));
  EXPECT_EQ(a, b);
  cfg.seed = 43;
  EXPECT_NE(a, io::dump(io::to_json(gen_family(cfg))));
}

TEST(Generator, ZeroRhoGivesEigenspaceSubspaces) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto cfg = support::random_config(seed);
    cfg.rho = 0;
    const auto inst = support::family_instance(cfg);
    EXPECT_TRUE(verify_j_fusion_frame(inst.family).verdict);
    for (const auto& e : inst.family.entries) {
      const Matrix& b = e.subspace.basis();
      EXPECT_LE((inst.space.J() * b - e.sign * b).norm(), 1e-12);
    }
  }
}

TEST(Generator, NegativeModeIsDetected) {
  int rejected = 0, false_verdict = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto cfg = support::random_config(seed);
    cfg.negative = true;
    const auto p = gen_family(cfg);
    const auto k = io::krein_space(p);
    try {
      if (!verify_j_fusion_frame(io::to_family(p, k)).verdict) ++false_verdict;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::IndefiniteOrNeutralSubspace);
      ++rejected;
    }
  }
  EXPECT_EQ(rejected + false_verdict, 100);
}

TEST(Generator, InfeasibleConfigs) {
  GeneratorConfig cfg;
  cfg.rho = 1.0;
  EXPECT_EQ(code_of([&] { gen_family(cfg); }), ErrorCode::InfeasibleConfig);
  cfg = GeneratorConfig{};
  cfg.plus_dims = std::vector<int>{2, 1};
  EXPECT_EQ(code_of([&] { gen_family(cfg); }), ErrorCode::InfeasibleConfig);
  cfg = GeneratorConfig{};
  cfg.plus_entries = 3;
  EXPECT_EQ(code_of([&] { gen_family(cfg); }), ErrorCode::InfeasibleConfig);
}
