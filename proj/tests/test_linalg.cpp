#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "finsler/linalg.hpp"
#include "finsler/rng.hpp"

using namespace finsler;

namespace {

Eigen::MatrixXcd to_eigen(const CMatrix& m) {
  Eigen::MatrixXcd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

CMatrix random_hermitian(std::size_t n, Rng& rng) {
  const auto g = random_gaussian(n, n, rng);
  return (g + g.adjoint()) * 0.5;
}

CMatrix diag_of(const std::vector<double>& v) { return CMatrix::diagonal(v); }

}  // namespace

TEST(Linalg, EigenvaluesMatchEigenOracle) {
  Rng rng(11);
  for (std::size_t n = 1; n <= 8; ++n) {
    for (int t = 0; t < 10; ++t) {
      const auto h = random_hermitian(n, rng);
      const auto mine = herm_eig(h);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(to_eigen(h));
      const auto& vals = ref.eigenvalues();  // ascending
      ASSERT_EQ(mine.values.size(), n);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(mine.values[i], vals(static_cast<Eigen::Index>(n - 1 - i)), 1e-10);
    }
  }
}

TEST(Linalg, EigenReconstructionAndUnitarity) {
  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng.below(8);
    const auto h = random_hermitian(n, rng);
    const auto e = herm_eig(h);
    const auto back = e.vectors * diag_of(e.values) * e.vectors.adjoint();
    EXPECT_LE((back - h).max_abs(), 1e-10 * (1.0 + op_norm(h)));
    EXPECT_TRUE(is_unitary(e.vectors));
    EXPECT_TRUE(std::is_sorted(e.values.rbegin(), e.values.rend()));
  }
}

TEST(Linalg, OperatorNormMatchesSingularValueOracle) {
  Rng rng(13);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 1 + rng.below(6);
    const auto g = random_gaussian(n, n, rng);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(g));
    EXPECT_NEAR(op_norm(g), svd.singularValues()(0), 1e-10);
  }
}

TEST(Linalg, PsdSqrtSquaresBack) {
  Rng rng(14);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng.below(8);
    const auto g = random_gaussian(n, n, rng);
    const auto p = g * g.adjoint();
    const auto r = psd_sqrt(p);
    EXPECT_LE((r * r - p).max_abs(), 1e-10 * (1.0 + op_norm(p)));
    EXPECT_LE(hermitian_defect(r), 1e-12);
    EXPECT_GE(herm_eig(r).values.back(), -1e-12);
  }
}

TEST(Linalg, PsdSqrtRejectsIndefinite) {
  const CMatrix m{{1.0, 0.0}, {0.0, -1.0}};
  EXPECT_THROW(psd_sqrt(m), Error);
}

TEST(Linalg, PsdSqrtOfRankOneProjection) {
  const CMatrix p{{0.5, 0.5}, {0.5, 0.5}};
  EXPECT_LE((psd_sqrt(p) - p).max_abs(), 1e-12);
}

TEST(Linalg, AbsoluteValueOfNilpotent) {
  // |b| = (b b*)^{1/2}; for b = e12 that is diag(1, 0).
  const CMatrix b{{0.0, 1.0}, {0.0, 0.0}};
  const CMatrix expect{{1.0, 0.0}, {0.0, 0.0}};
  EXPECT_LE((abs_matrix(b) - expect).max_abs(), 1e-12);
}

TEST(Linalg, NonSquareAndNonHermitianInputsThrow) {
  const CMatrix rect(2, 3);
  EXPECT_THROW(herm_eig(rect), Error);
  const CMatrix skew{{0.0, 1.0}, {0.0, 0.0}};
  try {
    herm_eig(skew);
    FAIL() << "expected NotHermitian";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotHermitian);
  }
}

TEST(Linalg, PseudoInverseIsRightInverseOfSurjection) {
  Rng rng(15);
  const auto m = random_gaussian(2, 4, rng);
  EXPECT_LE((m * pinv(m) - CMatrix::identity(2)).max_abs(), 1e-10);
}

TEST(Rng, DeterministicAndSplittable) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_EQ(Rng(5).split(3).next(), Rng(5).split(3).next());
  EXPECT_NE(Rng(5).split(3).next(), Rng(5).split(4).next());
}

TEST(Rng, ComplexNormalHasUnitSecondMoment) {
  Rng rng(99);
  double s = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) s += std::norm(rng.complex_normal());
  EXPECT_NEAR(s / n, 1.0, 0.02);
}
