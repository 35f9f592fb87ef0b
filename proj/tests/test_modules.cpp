#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "finsler/finsler.hpp"
#include "oracles.hpp"

using namespace finsler;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dist(const AlgElement& x, const AlgElement& y) { return frobenius(x - y); }

AlgElement scalar(const FdAlgebra& a, cplx z) { return AlgElement::central(a, std::vector<cplx>(a.num_blocks(), z)); }

// Two-point l^2 bundle glued to a free rank-one module over C (+) M2 along
// point 1 of the bundle and the C block of the free module.
struct GluedExample {
  FdAlgebra b1 = FdAlgebra::commutative(2);
  FdAlgebra b2{{1, 2}};
  FdAlgebra d{{1}};
  PullbackAlgebra p{b1, b2, d, StarHom::routing(b1, {1}), StarHom::routing(b2, {0})};
  std::shared_ptr<BundleSectionModule> left =
      std::make_shared<BundleSectionModule>(std::vector<FiberNorm>(2, FiberNorm::lp(1, 2.0)));
  std::shared_ptr<FreeHilbertModule> right = std::make_shared<FreeHilbertModule>(b2, 1);
  std::shared_ptr<BundleSectionModule> glue =
      std::make_shared<BundleSectionModule>(std::vector<FiberNorm>{FiberNorm::lp(1, 2.0)});
  PullbackPtr e = pullback_module(left, right, glue, p);

  ModuleVector pair(cplx at0, cplx at1, cplx scalar_coord, const CMatrix& m) const {
    const auto x1 = left->section({{at0}, {at1}});
    const auto x2 = right->make({AlgElement(b2, {CMatrix{{scalar_coord}}, m})});
    return e->join(x1, x2);
  }
};

}  // namespace

TEST(FiberNorm, MatchesDirectOracle) {
  Rng rng(1);
  for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
    for (int t = 0; t < 20; ++t) {
      const std::size_t n = 1 + rng.below(4);
      FiberNorm f = FiberNorm::lp(n, p);
      if (t % 2) {
        f.weights.resize(n);
        for (auto& w : f.weights) w = rng.uniform(0.5, 2.0);
      }
      std::vector<cplx> v(n);
      for (auto& z : v) z = rng.complex_normal();
      const double expect = oracle::lp_norm(v, p, f.weights);
      EXPECT_NEAR(f(v), expect, 1e-12 * (1.0 + expect));
      EXPECT_NEAR(f.squared(v), expect * expect, 1e-12 * (1.0 + expect * expect));
    }
  }
}

TEST(FiberNorm, RejectsInvalidParameters) {
  EXPECT_THROW(FiberNorm::lp(2, 0.5).validate(), Error);
  EXPECT_THROW((FiberNorm{2, 2.0, {1.0}}).validate(), Error);
  FiberNorm f = FiberNorm::lp(2, 2.0);
  f.weights = {1.0, -1.0};
  EXPECT_THROW(f.validate(), Error);
}

TEST(FreeModule, ActionAndRho) {
  const FdAlgebra m2({2});
  const FreeHilbertModule e(m2, 1);
  const auto x = e.make({AlgElement::identity(m2)});
  EXPECT_LE(dist(e.rho(x), AlgElement::identity(m2)), 1e-14);
  EXPECT_EQ(e.act(AlgElement::identity(m2), x).parts, x.parts);
  const AlgElement a(m2, {CMatrix{{1.0, 0.0}, {0.0, 0.0}}});
  EXPECT_LE(dist(e.rho_squared(e.act(a, x)), a), 1e-14);
  EXPECT_LE(norm(e.rho(e.zero())), 0.0);
}

TEST(FreeModule, InnerProductExamples) {
  Rng rng(2);
  const FdAlgebra a({1, 2});
  const FreeHilbertModule e(a, 2);
  const auto u = random_element(a, rng), v = random_element(a, rng);
  const auto z = AlgElement::zero(a);
  EXPECT_LE(norm(e.inner(e.make({u, z}), e.make({z, v}))), 0.0);
  for (int t = 0; t < 10; ++t) {
    const auto x = e.random_vector(rng);
    const auto b = random_element(a, rng);
    const auto bx = e.act(b, x);
    EXPECT_LE(dist(e.inner(bx, bx), b * e.inner(x, x) * adjoint(b)), 1e-10 * (1.0 + norm(e.inner(bx, bx))));
    EXPECT_LE(dist(e.inner(x, x), e.rho_squared(x)), 0.0);
  }
  EXPECT_THROW(e.make({u}), Error);
}

TEST(FreeModule, WrongAlgebraRejected) {
  const FreeHilbertModule e(FdAlgebra({2}), 1);
  try {
    e.act(AlgElement::identity(FdAlgebra({3})), e.zero());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::AlgebraMismatch);
  }
}

TEST(BundleModule, PointwiseActionAndL1Rho) {
  const BundleSectionModule e(std::vector<FiberNorm>(2, FiberNorm::lp(2, 1.0)));
  const auto x = e.section({{1.0, 1.0}, {1.0, 1.0}});
  const auto r = e.rho(x);
  EXPECT_NEAR(r.block(0)(0, 0).real(), 2.0, 1e-15);
  EXPECT_NEAR(r.block(1)(0, 0).real(), 2.0, 1e-15);
  const auto f = AlgElement::central(e.base(), {0.0, 1.0});
  const auto fx = e.act(f, x);
  EXPECT_EQ(fx.parts[0].max_abs(), 0.0);
  EXPECT_EQ(fx.parts[1], x.parts[1]);
  EXPECT_EQ(norm(e.rho(e.zero())), 0.0);
}

TEST(QuotientModule, EmptyIdealKeepsModule) {
  Rng rng(3);
  auto e = std::make_shared<FreeHilbertModule>(FdAlgebra({1, 2}), 1);
  const QuotientModule q(e, Ideal(e->base(), {}));
  EXPECT_EQ(q.base(), e->base());
  const auto x = e->random_vector(rng);
  EXPECT_LE(dist(q.rho_squared(x), e->rho_squared(x)), 0.0);
}

TEST(QuotientModule, BundleDropsPoint) {
  Rng rng(4);
  auto e = std::make_shared<BundleSectionModule>(
      std::vector<FiberNorm>{FiberNorm::lp(2, 1.0), FiberNorm::lp(1, 2.0), FiberNorm::lp(3, kInf)});
  const auto res = quotient_module(e, Ideal(e->base(), {2}), 16, 5);
  EXPECT_EQ(res.module->base(), FdAlgebra::commutative(2));
  EXPECT_TRUE(res.certificate.passed());
  EXPECT_EQ(res.certificate.kernel_dimension, 3u);  // sections supported at point 2
  const auto x = e->random_vector(rng);
  const auto r = res.module->rho(x);
  EXPECT_NEAR(r.block(0)(0, 0).real(), e->fiber_norm(x, 0), 1e-14);
  EXPECT_NEAR(r.block(1)(0, 0).real(), e->fiber_norm(x, 1), 1e-14);
}

TEST(QuotientModule, FreeOverCPlusM2ModuloScalarBlock) {
  auto e = std::make_shared<FreeHilbertModule>(FdAlgebra({1, 2}), 2);
  const auto res = quotient_module(e, Ideal(e->base(), {0}), 16, 6);
  EXPECT_EQ(res.module->base(), FdAlgebra({2}));
  EXPECT_TRUE(res.certificate.passed()) << res.certificate.to_json().dump();
  // Agrees with the free module over M2 on the M2 coordinates.
  Rng rng(7);
  const FreeHilbertModule m2(FdAlgebra({2}), 2);
  for (int t = 0; t < 5; ++t) {
    const auto x = e->random_vector(rng);
    ModuleVector y;
    y.parts = {x.parts[1], x.parts[3]};
    EXPECT_LE(dist(res.module->rho_squared(x), m2.rho_squared(y)), 1e-12);
  }
}

TEST(PullbackModule, ZeroGlueIsDirectSum) {
  Rng rng(8);
  const auto dec = decompose_ideals(FdAlgebra({1, 2}));
  auto left = std::make_shared<BundleSectionModule>(std::vector<FiberNorm>{FiberNorm::lp(2, 1.0)});
  auto right = std::make_shared<FreeHilbertModule>(dec.quotient, 1);
  const auto e = pullback_module(left, right, zero_module(), dec.pullback);
  for (int t = 0; t < 5; ++t) {
    const auto x1 = left->random_vector(rng), x2 = right->random_vector(rng);
    EXPECT_TRUE(e->contains(e->join(x1, x2)));
    const auto r = e->rho_squared(e->join(x1, x2));
    EXPECT_NEAR(r.block(0)(0, 0).real(), left->rho_squared(x1).block(0)(0, 0).real(), 1e-14);
    EXPECT_LE((r.block(1) - right->rho_squared(x2).block(0)).max_abs(), 1e-14);
  }
}

TEST(PullbackModule, GlueMembershipBothWays) {
  const GluedExample g;
  const CMatrix m{{1.0, 2.0}, {0.0, 1.0}};
  EXPECT_TRUE(g.e->contains(g.pair(5.0, 2.0, 2.0, m)));
  EXPECT_FALSE(g.e->contains(g.pair(5.0, 2.0, 3.0, m)));
  EXPECT_NO_THROW(g.e->make(g.left->section({{5.0}, {2.0}}), g.right->make({AlgElement(g.b2, {CMatrix{{2.0}}, m})})));
  try {
    g.e->make(g.left->section({{5.0}, {2.0}}), g.right->make({AlgElement(g.b2, {CMatrix{{3.0}}, m})}));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::GlueMismatch);
  }
}

TEST(PullbackModule, RhoAgreesAtGlue) {
  Rng rng(9);
  const GluedExample g;
  for (int t = 0; t < 20; ++t) {
    const auto x = g.e->random_vector(rng);
    ASSERT_TRUE(g.e->contains(x));
    const auto [x1, x2] = g.e->split(x);
    const auto r1 = g.left->rho_squared(x1), r2 = g.right->rho_squared(x2);
    EXPECT_NEAR(std::abs(r1.block(1)(0, 0) - r2.block(0)(0, 0)), 0.0, 1e-10 * (1.0 + norm(r1)));
    EXPECT_TRUE(g.p.contains(r1, r2));
  }
}

TEST(PullbackModule, ActionStaysInside) {
  Rng rng(10);
  const GluedExample g;
  for (int t = 0; t < 10; ++t) {
    const auto x = g.e->random_vector(rng);
    const auto a = random_element(g.e->base(), rng);
    EXPECT_TRUE(g.e->contains(g.e->act(a, x)));
  }
}

TEST(PullbackModule, IncompatibleGlueMapsRejected) {
  const GluedExample g;
  // A left map that scales the glued fiber by 2 is not isometric.
  const auto bad = LinearMap::from_function(g.left->shape(), g.glue->shape(), [&](const ModuleVector& x) {
    ModuleVector y;
    y.parts = {x.parts[1] * 2.0};
    return y;
  });
  const auto good = restriction_map(*g.right, g.p.psi(), *g.glue);
  try {
    PullbackModule(g.left, g.right, g.glue, g.p, bad, good);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NotCompatible);
  }
}

TEST(CanonicalDecomposition, ReproducesConstructionData) {
  Rng rng(11);
  const GluedExample g;
  const auto d = canonical_decompose(g.e, 32, 12);
  EXPECT_TRUE(d.certified());
  EXPECT_EQ(d.left->base(), g.b1);
  EXPECT_EQ(d.right->base(), g.b2);
  EXPECT_EQ(d.glue->base(), g.d);
  for (int t = 0; t < 20; ++t) {
    const auto x = g.e->random_vector(rng);
    const auto [x1, x2] = g.e->split(x);
    EXPECT_LE(dist(d.left->rho_squared(x), g.left->rho_squared(x1)), 1e-10);
    EXPECT_LE(dist(d.right->rho_squared(x), g.right->rho_squared(x2)), 1e-10);
    // The glue component is the shared C-fiber.
    EXPECT_LE(dist(d.glue->rho_squared(x), g.glue->rho_squared(g.e->psi_left()(x1))), 1e-10);
    EXPECT_NEAR(d.reglued->norm(d.map(x)), g.e->norm(x), 1e-10);
  }
}

TEST(CanonicalDecomposition, DirectSumHasZeroGlue) {
  const auto dec = decompose_ideals(FdAlgebra({1, 3}));
  auto left = std::make_shared<BundleSectionModule>(std::vector<FiberNorm>{FiberNorm::lp(2, 3.0)});
  auto right = std::make_shared<FreeHilbertModule>(dec.quotient, 2);
  const auto e = pullback_module(left, right, zero_module(), dec.pullback);
  const auto d = canonical_decompose(e, 16, 13);
  EXPECT_TRUE(d.certified());
  EXPECT_TRUE(d.glue->base().is_zero());
  EXPECT_EQ(d.left->base(), FdAlgebra::commutative(1));
  EXPECT_EQ(d.right->base(), FdAlgebra({3}));
}

TEST(CanonicalDecomposition, WrongBaseRejected) {
  const GluedExample g;
  auto other = std::make_shared<FreeHilbertModule>(FdAlgebra({2}), 1);
  try {
    canonical_decompose(other, g.p, 4, 1);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NotPullbackBase);
  }
}

TEST(TransportedModule, CarriesAxiomsThroughIsomorphism) {
  Rng rng(14);
  const FdAlgebra a({2, 1});
  auto inner = std::make_shared<FreeHilbertModule>(FdAlgebra({1, 2}), 1);
  const StarHom iso(a, inner->base(), {{1, {}}, {0, random_unitary(2, rng)}});
  const TransportedModule e(inner, iso);
  EXPECT_TRUE(check_finsler_axiom2(e, 50, 15).passed());
  const auto x = e.random_vector(rng);
  EXPECT_NEAR(e.norm(x), inner->norm(x), 1e-12);
  EXPECT_LE(dist(e.rho_squared(e.act(scalar(a, 2.0), x)), e.rho_squared(x) * 4.0), 1e-10 * (1.0 + e.norm(x)));
}
