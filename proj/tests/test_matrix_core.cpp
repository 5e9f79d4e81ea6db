#include "guas/builtin_examples.hpp"
#include "guas/error.hpp"
#include "guas/matrix_core.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace guas;
using namespace guas::testing;

namespace {

const double kSqrt2 = std::sqrt(2.0);

Matrix lyapunov_form(const Matrix& b, double q, double r) {
  Matrix p(2, 2);
  p << 1.0, q, q, r;
  return b.transpose() * p + p * b;
}

}  // namespace

TEST(MakePair, RejectsBadShapes) {
  EXPECT_THROW(make_pair(Matrix::Zero(2, 3), Matrix::Zero(2, 3)), Error);
  EXPECT_THROW(make_pair(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), Error);
  Matrix p = Matrix::Identity(2, 2);
  p(1, 1) = -1.0;
  try {
    make_pair(-Matrix::Identity(2, 2), -Matrix::Identity(2, 2), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
  }
}

TEST(Hurwitz, Oracles) {
  Matrix rot(2, 2);
  rot << 0.0, 1.0, -1.0, 0.0;
  EXPECT_FALSE(is_hurwitz(rot).hurwitz);
  EXPECT_TRUE(is_hurwitz(rot).marginal);
  EXPECT_TRUE(is_hurwitz(rot - 0.1 * Matrix::Identity(2, 2)).hurwitz);
  EXPECT_NEAR(is_hurwitz(rot - 0.1 * Matrix::Identity(2, 2)).abscissa, -0.1, 1e-14);
  Matrix jordan(2, 2);
  jordan << -1.0, 100.0, 0.0, -1.0;
  EXPECT_TRUE(is_hurwitz(jordan).hurwitz);
  EXPECT_FALSE(is_hurwitz(Matrix::Identity(3, 3)).hurwitz);
}

TEST(WeakLyapunov, MasonDeterminantsVanish) {
  const BuiltinExample ex = mason_example();
  const auto [v0, v1] = check_weak_lyapunov(ex.pair, *ex.pair.p);
  EXPECT_TRUE(v0.holds);
  EXPECT_TRUE(v1.holds);
  for (const Matrix& b : {ex.pair.b0, ex.pair.b1}) {
    const Matrix m = b.transpose() * *ex.pair.p + *ex.pair.p * b;
    EXPECT_LT(std::abs(m.determinant()), 1e-9);
  }
}

TEST(WeakLyapunov, IdentityFailsForMasonB1) {
  const BuiltinExample ex = mason_example();
  const auto [v0, v1] = check_weak_lyapunov(ex.pair, Matrix::Identity(2, 2));
  EXPECT_TRUE(v0.holds);
  EXPECT_FALSE(v1.holds);
  ASSERT_TRUE(v1.witness.has_value());
  const Matrix s = ex.pair.b1.transpose() + ex.pair.b1;
  EXPECT_GT(v1.witness->dot(s * *v1.witness), 0.0);
  EXPECT_THROW(normalize(ex.pair, Matrix::Identity(2, 2)), Error);
}

TEST(Normalize, SimilarityPreservesSpectrumAndSymmetricParts) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const PlantedPair planted = planted_pair(rng, 2, 2);
    const Matrix g = random_matrix(rng, 4, 4) + 3.0 * Matrix::Identity(4, 4);
    const Matrix gi = g.inverse();
    // X = g Y changes the Lyapunov matrix from I to g^T g
    const MatrixPair moved = make_pair(gi * planted.pair.b0 * g, gi * planted.pair.b1 * g,
                                       Matrix(g.transpose() * g));
    const NormalizedPair np = normalize(moved);
    for (int i = 0; i < 2; ++i) {
      const Matrix& orig = i == 0 ? planted.pair.b0 : planted.pair.b1;
      Eigen::VectorXcd e1 = Eigen::EigenSolver<Matrix>(orig).eigenvalues();
      Eigen::VectorXcd e2 = Eigen::EigenSolver<Matrix>(np.b(i)).eigenvalues();
      auto key = [](const std::complex<double>& a, const std::complex<double>& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
      };
      std::sort(e1.data(), e1.data() + e1.size(), key);
      std::sort(e2.data(), e2.data() + e2.size(), key);
      EXPECT_LT((e1 - e2).norm(), 1e-7 * (1.0 + orig.norm()));
      EXPECT_LE(max_symmetric_eigen(np.s(i)).value, 1e-8 * (1.0 + np.s(i).norm()));
    }
  }
}

TEST(ConvexCombination, RangeChecked) {
  EXPECT_THROW(convex_combination(Matrix::Zero(2, 2), Matrix::Zero(2, 2), 1.5), Error);
  EXPECT_THROW(convex_combination(Matrix::Zero(2, 2), Matrix::Zero(2, 2), -0.1), Error);
  EXPECT_EQ(convex_combination(Matrix::Identity(2, 2), 3.0 * Matrix::Identity(2, 2), 0.5),
            Matrix(2.0 * Matrix::Identity(2, 2)));
}

TEST(DetConic, MasonVertices) {
  const BuiltinExample ex = mason_example();
  const ConicReport c0 = det_conic(ex.pair.b0);
  const ConicReport c1 = det_conic(ex.pair.b1);
  ASSERT_TRUE(c0.is_ellipse);
  ASSERT_TRUE(c1.is_ellipse);
  EXPECT_NEAR(c0.vertices[0](1), 3.0 - 2.0 * kSqrt2, 1e-8 * (3.0 - 2.0 * kSqrt2));
  EXPECT_NEAR(c0.vertices[1](1), 3.0 + 2.0 * kSqrt2, 1e-8 * (3.0 + 2.0 * kSqrt2));
  EXPECT_NEAR(c1.vertices[0](1), 3.0 + 2.0 * kSqrt2, 1e-8 * (3.0 + 2.0 * kSqrt2));
  EXPECT_NEAR(c1.vertices[1](1), 99.0 + 70.0 * kSqrt2, 1e-8 * (99.0 + 70.0 * kSqrt2));
  for (const ConicReport* c : {&c0, &c1}) {
    EXPECT_NEAR(c->vertices[0](0), 0.0, 1e-9);
    EXPECT_NEAR(c->vertices[1](0), 0.0, 1e-9);
  }
}

TEST(DetConic, CoefficientsMatchDirectDeterminant) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix b = random_matrix(rng, 2, 2);
    const ConicReport c = det_conic(b);
    const auto& k = c.coefficients;
    for (int s = 0; s < 10; ++s) {
      const double q = random_matrix(rng, 1, 1)(0, 0);
      const double r = 2.0 * random_matrix(rng, 1, 1)(0, 0);
      const double poly = k[0] * q * q + k[1] * q * r + k[2] * r * r + k[3] * q + k[4] * r + k[5];
      const double direct = lyapunov_form(b, q, r).determinant();
      EXPECT_NEAR(poly, direct, 1e-10 * (1.0 + std::abs(direct)));
    }
    for (const auto& pt : c.samples) {
      EXPECT_NEAR(lyapunov_form(b, pt(0), pt(1)).determinant(), 0.0,
                  1e-7 * (1.0 + lyapunov_form(b, pt(0), pt(1)).norm()));
    }
  }
}

TEST(StrictLyapunov, MasonHasNone) {
  const StrictLyapunovReport r = strict_lyapunov_2x2(mason_example().pair);
  EXPECT_FALSE(r.qr.has_value());
  EXPECT_GE(r.best_value, 0.0);
  EXPECT_FALSE(r.restriction_note.empty());
}

TEST(StrictLyapunov, FindsOneWhenItExists) {
  Matrix b0(2, 2);
  b0 << -1.0, 2.0, -2.0, -1.0;
  Matrix b1(2, 2);
  b1 << -1.0, 0.5, 0.0, -2.0;
  const StrictLyapunovReport r = strict_lyapunov_2x2(make_pair(b0, b1));
  ASSERT_TRUE(r.qr.has_value());
  ASSERT_TRUE(r.p.has_value());
  for (const Matrix& b : {b0, b1}) {
    const Matrix m = b.transpose() * *r.p + *r.p * b;
    EXPECT_LT(Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().maxCoeff(), 0.0);
  }
  EXPECT_THROW(strict_lyapunov_2x2(make_pair(-Matrix::Identity(3, 3), -Matrix::Identity(3, 3))),
               Error);
}
