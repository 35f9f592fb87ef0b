#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "finsler/finsler.hpp"
#include "oracles.hpp"

using namespace finsler;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dist(const AlgElement& x, const AlgElement& y) { return frobenius(x - y); }

// rho(x) = |x| = (x x*)^{1/2} on E = A.
class AbsoluteValueModule : public FreeHilbertModule {
 public:
  using FreeHilbertModule::FreeHilbertModule;
  AlgElement rho_squared(const ModuleVector& x) const override {
    const auto c = coordinate(x, 0);
    return c * adjoint(c);
  }
};

ModulePtr l1_bundle(std::size_t points, std::size_t dim) {
  return std::make_shared<BundleSectionModule>(std::vector<FiberNorm>(points, FiberNorm::lp(dim, 1.0)));
}

}  // namespace

// ---- Finsler axioms ----

TEST(Checks, FreeModulePassesEverything) {
  const FreeHilbertModule e(FdAlgebra({1, 2}), 2);
  for (const auto& r : {check_norm_axioms(e, 100, 1), check_finsler_axiom2(e, 100, 1), check_banach_module(e, 100, 1),
                        check_central_homogeneity(e, 100, 1), check_lipschitz_bound(e, 100, 1)}) {
    EXPECT_TRUE(r.passed()) << r.claim << " " << r.max_residual;
  }
}

TEST(Checks, FrobeniusCandidateFailsAxiom2WithRecheckableWitness) {
  const FrobeniusScalarCandidate e(FdAlgebra({2}), 1);
  // The worked instance: a = diag(1,0), x = I2.
  const AlgElement a(FdAlgebra({2}), {CMatrix{{1.0, 0.0}, {0.0, 0.0}}});
  const auto x = e.make({AlgElement::identity(FdAlgebra({2}))});
  EXPECT_LE(dist(e.rho_squared(e.act(a, x)), AlgElement::identity(FdAlgebra({2}))), 1e-14);
  EXPECT_LE(dist(a * e.rho_squared(x) * adjoint(a), a * 2.0), 1e-14);

  const auto r = check_finsler_axiom2(e, 50, 3);
  EXPECT_EQ(r.status, Status::Fail);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_NEAR(witness_residual(e, *r.witness), r.max_residual, 1e-12);
  EXPECT_GT(r.max_residual, kAxiomTol);
  // The Banach inequality alone does not see the defect.
  EXPECT_TRUE(check_banach_module(e, 50, 3).passed());
}

TEST(Checks, AbsoluteValueRhoIsFinsler) {
  const AbsoluteValueModule e(FdAlgebra({2}), 1);
  EXPECT_TRUE(check_finsler_axiom2(e, 100, 4).passed());
}

TEST(Checks, CentralHomogeneityExamples) {
  const BundleSectionModule e(std::vector<FiberNorm>{FiberNorm::lp(2, 1.0), FiberNorm::lp(3, 3.0)});
  Rng rng(5);
  const auto f = AlgElement::central(e.base(), {-2.0, cplx(0.0, 3.0)});
  const auto x = e.random_vector(rng);
  const auto r = e.rho(x), rf = e.rho(e.act(f, x));
  EXPECT_NEAR(rf.block(0)(0, 0).real(), 2.0 * r.block(0)(0, 0).real(), 1e-12);
  EXPECT_NEAR(rf.block(1)(0, 0).real(), 3.0 * r.block(1)(0, 0).real(), 1e-12);
  const FreeHilbertModule m(FdAlgebra({2, 3}), 1);
  const auto a = AlgElement::central(m.base(), {2.0, -1.0});
  const auto y = m.random_vector(rng);
  EXPECT_LE(central_residual(m, a, y), 1e-12);
}

TEST(Checks, CommutativeTriangleTightOnL1) {
  const BundleSectionModule e(std::vector<FiberNorm>{FiberNorm::lp(2, 1.0)});
  const auto x = e.section({{1.0, 0.0}}), y = e.section({{0.0, 1.0}});
  EXPECT_NEAR(e.rho(x + y).block(0)(0, 0).real(), 2.0, 1e-15);
  EXPECT_EQ(commutative_triangle_residual(e, x, y), 0.0);
  const BundleSectionModule linf(std::vector<FiberNorm>(3, FiberNorm::lp(3, kInf)));
  EXPECT_TRUE(check_commutative_triangle(linf, 200, 6).passed());
}

TEST(Checks, CommutativeChecksNeedCommutativeBase) {
  const FreeHilbertModule e(FdAlgebra({2}), 1);
  try {
    check_commutative_triangle(e, 5, 1);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NotCommutativeBase);
  }
}

TEST(Checks, LipschitzExamples) {
  const FreeHilbertModule e(FdAlgebra({2}), 1);
  Rng rng(7);
  const auto x = e.random_vector(rng);
  EXPECT_EQ(lipschitz_residual(e, x, x), 0.0);
  EXPECT_EQ(lipschitz_residual(e, x, x * 2.0), 0.0);
  EXPECT_TRUE(check_lipschitz_bound(*l1_bundle(3, 2), 200, 8).passed());
}

TEST(Checks, AConvexityAndLinfOnBundles) {
  Rng rng(9);
  for (int t = 0; t < 5; ++t) {
    std::vector<FiberNorm> fibers;
    const std::size_t points = 1 + rng.below(6);
    for (std::size_t i = 0; i < points; ++i) {
      FiberNorm f = FiberNorm::lp(1 + rng.below(3), std::vector<double>{1.0, 1.5, 2.0, 3.0, kInf}[rng.below(5)]);
      f.weights.assign(f.dim, 0.0);
      for (auto& w : f.weights) w = rng.uniform(0.5, 2.0);
      fibers.push_back(f);
    }
    const BundleSectionModule e(fibers);
    const auto ac = check_a_convex(e, 100, 10 + t);
    const auto li = check_linf_norm_property(e, 20, 10 + t);
    EXPECT_TRUE(ac.passed()) << ac.max_residual;
    EXPECT_TRUE(li.passed()) << li.max_residual;
    EXPECT_EQ(li.note, "all projections enumerated");
  }
  // f = 1, g = 0: ||x|| <= max(||x||, ||y||).
  const BundleSectionModule e(std::vector<FiberNorm>(2, FiberNorm::lp(2, 1.0)));
  const auto x = e.random_vector(rng), y = e.random_vector(rng);
  EXPECT_EQ(a_convex_residual(e, AlgElement::identity(e.base()), x, y), 0.0);
  EXPECT_EQ(linf_residual(e, AlgElement::zero(e.base()), x), 0.0);
}

// ---- Akemann gap ----

TEST(Akemann, DiagonalExample) {
  const FdAlgebra c2 = FdAlgebra::commutative(2);
  const auto b = AlgElement::central(c2, {1.0, 0.0}), c = AlgElement::central(c2, {0.0, 1.0});
  const auto w = akemann_gap_witness(b, c);
  EXPECT_NEAR(w.achieved_gap, 1.0, 1e-15);
  EXPECT_NEAR(w.target, norm(b - c), 1e-15);
  const auto s = akemann_gap_search(b, c, 1);
  EXPECT_NEAR(s.achieved_gap, 1.0, 1e-6);
}

TEST(Akemann, RankOneM2Example) {
  const FdAlgebra m2({2});
  const AlgElement b(m2, {CMatrix{{1.0, 0.0}, {0.0, 0.0}}});
  const AlgElement c(m2, {CMatrix{{0.5, 0.5}, {0.5, 0.5}}});
  EXPECT_NEAR(norm(b - c), 1.0 / std::numbers::sqrt2, 1e-14);
  const auto w = akemann_gap_witness(b, c);
  EXPECT_NEAR(w.achieved_gap, 1.0 / std::numbers::sqrt2, 1e-12);
  EXPECT_TRUE(is_positive(w.a).positive);
  EXPECT_LE(norm(w.a), 1.0 + 1e-14);
}

TEST(Akemann, EqualArgumentsGiveZero) {
  Rng rng(11);
  const FdAlgebra a({1, 3});
  const auto b = random_positive(a, rng);
  EXPECT_LE(akemann_gap_witness(b, b).achieved_gap, 1e-14);
  EXPECT_LE(akemann_gap_search(b, b, 2, {.iterations = 200}).achieved_gap, 1e-12);
}

TEST(Akemann, NonPositiveInputRejected) {
  const FdAlgebra m2({2});
  const AlgElement b(m2, {CMatrix{{1.0, 0.0}, {0.0, -1.0}}});
  try {
    akemann_gap_witness(b, AlgElement::identity(m2));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NotPositive);
  }
}

TEST(Akemann, SearchReachesWitnessOnRandom3x3) {
  Rng rng(12);
  const FdAlgebra m3({3});
  for (int t = 0; t < 5; ++t) {
    const auto b = random_positive(m3, rng), c = random_positive(m3, rng);
    const auto w = akemann_gap_witness(b, c);
    const auto s = akemann_gap_search(b, c, rng.next());
    EXPECT_GE(s.achieved_gap, w.achieved_gap - 1e-3);
    EXPECT_LE(s.achieved_gap, w.target + 1e-9);
    EXPECT_LE(norm(s.a), 1.0 + 1e-10);
    EXPECT_TRUE(is_positive(s.a).positive);
  }
}

TEST(Akemann, WitnessNeverBeatsTargetOnSamples) {
  // Sup over the positive unit ball equals ||b - c||: random feasible a stay below.
  Rng rng(13);
  const FdAlgebra a({1, 2});
  const auto b = random_positive(a, rng), c = random_positive(a, rng);
  const double target = norm(b - c);
  for (int t = 0; t < 200; ++t) {
    auto x = random_positive(a, rng);
    x *= 1.0 / norm(x);
    EXPECT_LE(gap(x, b, c), target + 1e-12);
  }
}

// ---- polarization and hilbertize ----

TEST(Polarization, DiagonalAndZero) {
  const FdAlgebra m2({2});
  const FreeHilbertModule e(m2, 1);
  const auto x = e.make({AlgElement::identity(m2)});
  EXPECT_LE(dist(polarize(e, x, x), AlgElement::identity(m2)), 1e-14);
  EXPECT_LE(norm(polarize(e, x, e.zero())), 1e-15);
}

TEST(Polarization, RecoversInnerProduct) {
  Rng rng(14);
  const FreeHilbertModule e(FdAlgebra({1, 3}), 2);
  for (int t = 0; t < 50; ++t) {
    const auto x = e.random_vector(rng), y = e.random_vector(rng);
    // Oracle: sum_i x_i y_i^* computed blockwise from coordinates.
    auto expect = AlgElement::zero(e.base());
    for (std::size_t i = 0; i < e.rank(); ++i) expect += e.coordinate(x, i) * adjoint(e.coordinate(y, i));
    EXPECT_LE(dist(polarize(e, x, y), expect), 1e-10 * (1.0 + e.norm(x) * e.norm(y)));
  }
  EXPECT_TRUE(check_polarization(e, 100, 15).passed());
}

TEST(Parallelogram, L1FiberDefectIsFour) {
  const BundleSectionModule e(std::vector<FiberNorm>{FiberNorm::lp(2, 1.0)});
  const auto x = e.section({{1.0, 0.0}}), y = e.section({{0.0, 1.0}});
  EXPECT_NEAR(parallelogram_defect(e, x, y), 4.0, 1e-14);
  EXPECT_NEAR(oracle::lp_basis_defect(2, 1.0), 4.0, 1e-14);
}

TEST(Parallelogram, AxiomWithScalarTwo) {
  Rng rng(16);
  const auto e = l1_bundle(2, 3);
  for (int t = 0; t < 20; ++t) {
    const auto x = e->random_vector(rng);
    EXPECT_LE(norm(e->rho_squared(x * 2.0) - e->rho_squared(x) * 4.0), 1e-9 * (1.0 + e->norm(x)));
  }
}

TEST(Parallelogram, DefectModIdealLivesOnCommutativeBlocks) {
  // l^1 bundle on the C block glued trivially to a free module over M2.
  const auto dec = decompose_ideals(FdAlgebra({1, 2}));
  auto left = std::make_shared<BundleSectionModule>(std::vector<FiberNorm>{FiberNorm::lp(2, 1.0)});
  auto right = std::make_shared<FreeHilbertModule>(dec.quotient, 1);
  const ModulePtr e = std::make_shared<TransportedModule>(pullback_module(left, right, zero_module(), dec.pullback),
                                                          dec.to_pullback);
  Rng rng(17);
  double worst_c = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto x = e->random_vector(rng), y = e->random_vector(rng);
    const auto p = parallelogram_element(*e, x, y);
    EXPECT_LE(p.block(1).max_abs(), 1e-10 * (1.0 + e->norm(x) + e->norm(y)));
    worst_c = std::max(worst_c, std::abs(p.block(0)(0, 0)));
  }
  EXPECT_GT(worst_c, 1e-3);
  EXPECT_TRUE(check_parallelogram_mod_ideal(*e, 100, 18).passed());
}

TEST(Hilbertize, FreeModuleAcceptedWithInnerProduct) {
  Rng rng(19);
  const auto e = std::make_shared<FreeHilbertModule>(FdAlgebra({2, 1}), 2);
  const auto h = hilbertize(e, 100, 20);
  ASSERT_TRUE(h.accepted());
  EXPECT_LE(h.certificate.max(), HilbertizeResult::kCertificateTol);
  const auto x = e->random_vector(rng), y = e->random_vector(rng);
  EXPECT_LE(dist(h.inner(x, y), e->inner(x, y)), 1e-9 * (1.0 + e->norm(x) * e->norm(y)));
}

TEST(Hilbertize, L2BundleAcceptedL1Refused) {
  const auto l2 = std::make_shared<BundleSectionModule>(std::vector<FiberNorm>(2, FiberNorm::lp(3, 2.0)));
  EXPECT_TRUE(hilbertize(l2, 100, 21).accepted());
  const auto l1 = l1_bundle(1, 2);
  const auto& b = static_cast<const BundleSectionModule&>(*l1);
  const auto h = hilbertize(l1, 100, 22, {{b.section({{1.0, 0.0}}), b.section({{0.0, 1.0}})}});
  EXPECT_TRUE(h.refused());
  EXPECT_GE(h.max_defect, 4.0 - 1e-12);
  const auto report = h.to_report();
  ASSERT_TRUE(report.witness.has_value());
  EXPECT_EQ((*report.witness)["kind"], "parallelogram");
}

TEST(Hilbertize, ZeroModuleAccepted) { EXPECT_TRUE(hilbertize(zero_module(), 10, 23).accepted()); }

TEST(Hilbertize, FrobeniusCandidateFailsCertificate) {
  // Its scalar norm is Euclidean, so the law holds; sesquilinearity does not.
  const auto e = std::make_shared<FrobeniusScalarCandidate>(FdAlgebra({2}), 1);
  const auto h = hilbertize(e, 100, 24);
  EXPECT_EQ(h.status, Status::Fail);
  EXPECT_GT(h.certificate.max(), HilbertizeResult::kCertificateTol);
}

// ---- orthogonal witness ----

TEST(OrthogonalWitness, BasisVectorInC2) {
  const std::vector<cplx> xi{1.0, 0.0};
  const auto w = orthogonal_witness(xi);
  EXPECT_LE((w.a - CMatrix{{1.0, 0.0}, {0.0, 0.0}}).max_abs(), 1e-15);
  EXPECT_LE((w.b - CMatrix{{0.0, 1.0}, {0.0, 0.0}}).max_abs(), 1e-15);
  EXPECT_LE(w.max_residual(), 1e-15);
}

TEST(OrthogonalWitness, RandomUnitVectors) {
  Rng rng(25);
  for (std::size_t n = 2; n <= 6; ++n) {
    for (int t = 0; t < 10; ++t) {
      std::vector<cplx> xi(n);
      double s = 0.0;
      for (auto& z : xi) {
        z = rng.complex_normal();
        s += std::norm(z);
      }
      for (auto& z : xi) z /= std::sqrt(s);
      const auto w = orthogonal_witness(xi);
      EXPECT_LE(w.max_residual(), 1e-12);
      EXPECT_LE(w.fixes_xi_residual(), 1e-12);
    }
  }
}

TEST(OrthogonalWitness, DimensionOneRejected) {
  const std::vector<cplx> xi{1.0};
  try {
    orthogonal_witness(xi);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::DimensionTooSmall);
  }
}

// ---- rho uniqueness ----

TEST(RhoUniqueness, IdenticalMapsIndistinguishable) {
  const FreeHilbertModule e(FdAlgebra({2}), 1);
  const auto r = distinguishing_witness(e, [&](const ModuleVector& x) { return e.rho_squared(x); }, 20, 26);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.note, "indistinguishable on samples");
}

TEST(RhoUniqueness, ScaledRhoDistinguished) {
  const FreeHilbertModule e(FdAlgebra({2}), 1);
  const auto r = distinguishing_witness(e, [&](const ModuleVector& x) { return e.rho_squared(x * 2.0); }, 20, 27);
  EXPECT_TRUE(r.passed());
  ASSERT_TRUE(r.witness.has_value());
  const auto x = vector_from_json((*r.witness)["x"]);
  EXPECT_NEAR(norm(e.rho_squared(x * 2.0)) / norm(e.rho_squared(x)), 4.0, 1e-12);
}

TEST(RhoUniqueness, L1VersusL2Fibers) {
  const BundleSectionModule l1(std::vector<FiberNorm>{FiberNorm::lp(2, 1.0)});
  const BundleSectionModule l2(std::vector<FiberNorm>{FiberNorm::lp(2, 2.0)});
  const auto x = l1.section({{1.0, 1.0}});
  EXPECT_NEAR(l1.rho_squared(x).block(0)(0, 0).real(), 4.0, 1e-14);
  EXPECT_NEAR(l2.rho_squared(x).block(0)(0, 0).real(), 2.0, 1e-14);
  const auto r = distinguishing_witness(l1, [&](const ModuleVector& v) { return l2.rho_squared(v); }, 20, 28);
  EXPECT_TRUE(r.passed());
  EXPECT_TRUE(r.witness.has_value());
}

// ---- quotient kernel and structure ----

TEST(QuotientKernel, CertifiedOnFreeAndBundle) {
  const ModulePtr free = std::make_shared<FreeHilbertModule>(FdAlgebra({1, 2, 3}), 2);
  EXPECT_TRUE(check_quotient_kernel(free, Ideal(free->base(), {0, 2}), 30, 29).passed());
  const ModulePtr bundle = l1_bundle(4, 2);
  EXPECT_TRUE(check_quotient_kernel(bundle, Ideal(bundle->base(), {1, 3}), 30, 30).passed());
}

TEST(IdealDecompositionCheck, PassesOnMixedAlgebras) {
  for (const auto& a : {FdAlgebra({1, 2, 1}), FdAlgebra({3}), FdAlgebra::commutative(3)}) {
    EXPECT_TRUE(check_ideal_decomposition(a, 30, 31).passed()) << a.to_string();
  }
}

TEST(Structure, MixedPullbackRecoversParts) {
  const auto dec = decompose_ideals(FdAlgebra({1, 2}));
  auto left = std::make_shared<BundleSectionModule>(std::vector<FiberNorm>{FiberNorm::lp(2, 1.0)});
  auto right = std::make_shared<FreeHilbertModule>(dec.quotient, 1);
  const ModulePtr e = std::make_shared<TransportedModule>(pullback_module(left, right, zero_module(), dec.pullback),
                                                          dec.to_pullback);
  const auto s = structure_decompose(e, 30, 32);
  EXPECT_FALSE(s.points_zero);
  EXPECT_FALSE(s.hilbert_zero);
  EXPECT_TRUE(s.glue_zero);
  EXPECT_TRUE(s.hilbert_inner.accepted());
  EXPECT_LE(s.max_residual(), 1e-8);
  Rng rng(33);
  for (int t = 0; t < 10; ++t) {
    // Vectors are laid out as (bundle part, free part).
    const auto x = e->random_vector(rng);
    const ModuleVector x1{{x.parts[0]}}, x2{{x.parts[1]}};
    EXPECT_NEAR(s.over_points->norm(x), left->norm(x1), 1e-10);
    EXPECT_NEAR(s.hilbert_part->norm(x), right->norm(x2), 1e-10);
  }
}

TEST(Structure, CommutativeBaseHasNoHilbertPart) {
  const auto s = structure_decompose(l1_bundle(3, 2), 20, 34);
  EXPECT_TRUE(s.hilbert_zero);
  EXPECT_FALSE(s.points_zero);
  EXPECT_TRUE(s.glue_zero);
  EXPECT_EQ(s.summary()["E2_zero"], true);
}

TEST(Structure, MatrixBaseHasNoCommutativePart) {
  const ModulePtr e = std::make_shared<FreeHilbertModule>(FdAlgebra({3}), 1);
  const auto s = structure_decompose(e, 20, 35);
  EXPECT_TRUE(s.points_zero);
  EXPECT_FALSE(s.hilbert_zero);
  EXPECT_TRUE(s.hilbert_inner.accepted());
  EXPECT_TRUE(check_structure_decomposition(e, 20, 35).passed());
}

TEST(Structure, NonHilbertRestRefused) {
  // A Frobenius candidate over M2 has a non-Hilbert part over B.
  const ModulePtr e = std::make_shared<FrobeniusScalarCandidate>(FdAlgebra({2}), 1);
  try {
    structure_decompose(e, 20, 36);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::HilbertizeRefused);
  }
}
