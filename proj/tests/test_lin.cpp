#include <gtest/gtest.h>

#include <cmath>

#include "srbeam/lin.hpp"
#include "test_util.hpp"

using namespace srbeam;
using srbeam::tu::max_abs;
using srbeam::tu::random_cmat;
using srbeam::tu::random_hpd;

TEST(Kron, IdentityBlocks) {
  EXPECT_EQ(max_abs(lin::kron(CMat::Identity(2, 2), CMat::Identity(2, 2)) - CMat::Identity(4, 4)), 0.0);
  CMat swap(2, 2);
  swap << 0, 1, 1, 0;
  const CMat k = lin::kron(swap, CMat::Identity(2, 2));
  CMat expected = CMat::Zero(4, 4);
  expected.block(0, 2, 2, 2).setIdentity();
  expected.block(2, 0, 2, 2).setIdentity();
  EXPECT_EQ(max_abs(k - expected), 0.0);
}

TEST(Kron, MixedProductOnVectors) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const CMat a = random_cmat(rng, 2, 2), b = random_cmat(rng, 2, 2);
    const CMat x = random_cmat(rng, 2, 1), y = random_cmat(rng, 2, 1);
    EXPECT_LE(max_abs(lin::kron(a, b) * lin::kron(x, y) - lin::kron(a * x, b * y)), 1e-12);
  }
}

TEST(Kron, BilinearAndAssociative) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const CMat a = random_cmat(rng, 2, 3), b = random_cmat(rng, 3, 2), c = random_cmat(rng, 2, 2);
    const CMat a2 = random_cmat(rng, 2, 3);
    const cplx s(0.3, -1.2);
    EXPECT_LE(max_abs(lin::kron(lin::kron(a, b), c) - lin::kron(a, lin::kron(b, c))), 1e-12);
    EXPECT_LE(max_abs(lin::kron(s * a + a2, b) - (s * lin::kron(a, b) + lin::kron(a2, b))), 1e-12);
  }
}

TEST(Vec, ColumnStacking) {
  CMat v = lin::vec(CMat::Identity(2, 2));
  ASSERT_EQ(v.rows(), 4);
  EXPECT_EQ(v(0).real(), 1.0);
  EXPECT_EQ(v(1).real(), 0.0);
  EXPECT_EQ(v(2).real(), 0.0);
  EXPECT_EQ(v(3).real(), 1.0);
  CMat one(1, 1);
  one(0, 0) = cplx(2.0, -3.0);
  EXPECT_EQ(lin::vec(one)(0, 0), cplx(2.0, -3.0));
}

TEST(Vec, UnvecInvertsVec) {
  std::mt19937_64 rng(3);
  const CMat a = random_cmat(rng, 3, 2);
  EXPECT_EQ(max_abs(lin::unvec(lin::vec(a), 3, 2) - a), 0.0);
  EXPECT_THROW(lin::unvec(lin::vec(a), 2, 2), Error);
}

// vec(A1 A2 A3) = (A3^T kron A1) vec(A2) for column stacking.  The adjoint
// form A3^H coincides with it whenever A3 is real, which is the case the
// lifting derivation needs (A3 = 1 1^H).
TEST(Vec, ProductIdentity) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const CMat a1 = random_cmat(rng, 2, 3), a2 = random_cmat(rng, 3, 2), a3 = random_cmat(rng, 2, 2);
    EXPECT_LE(max_abs(lin::vec(a1 * a2 * a3) - lin::kron(a3.transpose(), a1) * lin::vec(a2)), 1e-12);
    CMat r3(2, 2);
    for (int i = 0; i < 4; ++i) r3(i % 2, i / 2) = n(rng);
    EXPECT_LE(max_abs(lin::vec(a1 * a2 * r3) - lin::kron(r3.adjoint(), a1) * lin::vec(a2)), 1e-12);
  }
}

TEST(Vec, AdjointFormFailsForComplexRightFactor) {
  std::mt19937_64 rng(44);
  const CMat a1 = random_cmat(rng, 2, 2), a2 = random_cmat(rng, 2, 2), a3 = random_cmat(rng, 2, 2);
  EXPECT_GT(max_abs(lin::vec(a1 * a2 * a3) - lin::kron(a3.adjoint(), a1) * lin::vec(a2)), 1e-3);
}

TEST(LogdetPsd, KnownValues) {
  EXPECT_NEAR(lin::logdet_psd(lin::HermView(CMat::Identity(3, 3))), 0.0, 1e-15);
  EXPECT_NEAR(lin::logdet_psd(lin::HermView(2.0 * CMat::Identity(2, 2))), 2.0 * std::log(2.0), 1e-15);
}

TEST(LogdetPsd, MatchesEigenvalueSum) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const lin::HermView a(random_hpd(rng, 4));
    const RVec ev = lin::hermitian_eigenvalues(a);
    EXPECT_NEAR(lin::logdet_psd(a), ev.array().log().sum(), 1e-10);
  }
}

TEST(LogdetPsd, BlockDiagonalAdds) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const CMat a = random_hpd(rng, 2), b = random_hpd(rng, 3);
    CMat blk = CMat::Zero(5, 5);
    blk.block(0, 0, 2, 2) = a;
    blk.block(2, 2, 3, 3) = b;
    EXPECT_NEAR(lin::logdet_psd(lin::HermView(a)) + lin::logdet_psd(lin::HermView(b)),
                lin::logdet_psd(lin::HermView(blk)), 1e-10);
  }
}

TEST(LogdetPsd, RejectsIndefinite) {
  CMat a = CMat::Identity(2, 2);
  a(1, 1) = -1.0;
  try {
    lin::logdet_psd(lin::HermView(a));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
  }
}

TEST(HermView, RejectsAsymmetricAndNonFinite) {
  CMat a = CMat::Identity(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(lin::HermView{a}, Error);
  EXPECT_NO_THROW(lin::HermView(a, 2.0));
  a(0, 1) = std::nan("");
  EXPECT_THROW(lin::HermView{a}, Error);
  EXPECT_THROW(lin::HermView(CMat::Zero(2, 3)), Error);
}

TEST(Svd, DiagonalCases) {
  const lin::Svd s = lin::svd(CMat::Identity(2, 2));
  EXPECT_NEAR(s.sigma(0), 1.0, 1e-15);
  EXPECT_NEAR(s.sigma(1), 1.0, 1e-15);
  CMat d = CMat::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  const lin::Svd t = lin::svd(d);
  EXPECT_NEAR(t.sigma(0), 3.0, 1e-14);
  EXPECT_NEAR(t.sigma(1), 1.0, 1e-14);
  // Phase convention makes both factors the identity here.
  EXPECT_LE(max_abs(t.U - CMat::Identity(2, 2)), 1e-14);
  EXPECT_LE(max_abs(t.V - CMat::Identity(2, 2)), 1e-14);
}

TEST(Svd, ReconstructionAndPhaseConvention) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const CMat a = random_cmat(rng, 2, 3);
    const lin::Svd s = lin::svd(a);
    const Eigen::Index k = s.sigma.size();
    const CMat rec = s.U.leftCols(k) * s.sigma.cast<cplx>().asDiagonal() * s.V.leftCols(k).adjoint();
    EXPECT_LE(max_abs(rec - a), 1e-10);
    EXPECT_LE(max_abs(s.U.adjoint() * s.U - CMat::Identity(2, 2)), 1e-10);
    EXPECT_LE(max_abs(s.V.adjoint() * s.V - CMat::Identity(3, 3)), 1e-10);
    EXPECT_GE(s.sigma(0), s.sigma(1));
    for (Eigen::Index c = 0; c < s.U.cols(); ++c) {
      EXPECT_NEAR(s.U(0, c).imag(), 0.0, 1e-12);
      EXPECT_GE(s.U(0, c).real(), 0.0);
    }
  }
}

TEST(SelectionMatrix, Blocks) {
  CMat e1 = lin::selection_matrix(1, 2, 2), e2 = lin::selection_matrix(2, 2, 2);
  CMat x1 = CMat::Zero(2, 4), x2 = CMat::Zero(2, 4);
  x1.block(0, 0, 2, 2).setIdentity();
  x2.block(0, 2, 2, 2).setIdentity();
  EXPECT_EQ(max_abs(e1 - x1), 0.0);
  EXPECT_EQ(max_abs(e2 - x2), 0.0);
  EXPECT_EQ(max_abs(lin::selection_matrix(1, 1, 1) - CMat::Identity(1, 1)), 0.0);
  try {
    lin::selection_matrix(3, 2, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndexOutOfRange);
  }
  EXPECT_THROW(lin::selection_matrix(0, 2, 2), Error);
}

TEST(RealEmbed, IdentityAndDeterminant) {
  EXPECT_EQ((lin::real_embed(lin::HermView(CMat::Identity(2, 2))) - RMat::Identity(4, 4)).cwiseAbs().maxCoeff(),
            0.0);
  CMat a(2, 2);
  a << cplx(2, 0), cplx(0, 1), cplx(0, -1), cplx(2, 0);
  EXPECT_NEAR(lin::real_embed(lin::HermView(a)).determinant(), 9.0, 1e-12);
}

TEST(RealEmbed, EigenvaluesDoubledAndLogdetDoubled) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const lin::HermView a(random_hpd(rng, 3));
    const RVec ev = lin::hermitian_eigenvalues(a);
    Eigen::SelfAdjointEigenSolver<RMat> es(lin::real_embed(a));
    const RVec er = es.eigenvalues();
    for (Eigen::Index i = 0; i < 3; ++i) {
      EXPECT_NEAR(er(2 * i), ev(i), 1e-10);
      EXPECT_NEAR(er(2 * i + 1), ev(i), 1e-10);
    }
    EXPECT_GT(er(0), 0.0);
    EXPECT_NEAR(std::log(lin::real_embed(a).determinant()), 2.0 * lin::logdet_psd(a), 1e-10);
  }
}
