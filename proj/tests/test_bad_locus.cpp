#include "guas/bad_locus.hpp"
#include "guas/builtin_examples.hpp"
#include "guas/error.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace guas;
using namespace guas::testing;

namespace {

BlockFamily blocks_of(const MatrixPair& pair) {
  const NormalizedPair np = normalize(pair);
  return block_form(np, common_kernel(np));
}

BlockFamily family(const Matrix& a0, const Matrix& a1, const Matrix& c0, const Matrix& c1) {
  BlockFamily b;
  b.a0 = a0;
  b.a1 = a1;
  b.c0 = c0;
  b.c1 = c1;
  b.d0 = -Matrix::Identity(c0.rows(), c0.rows());
  b.d1 = b.d0;
  return b;
}

/// C0 reads (x1, x2) and C1 reads (x2, x3): F is the cone x1 x3 = x2^2, x2 (x1 + x3) <= 0.
BlockFamily thin_cone_family(const Matrix& a) {
  Matrix c0 = Matrix::Zero(2, 3);
  Matrix c1 = Matrix::Zero(2, 3);
  c0(0, 0) = c0(1, 1) = 1.0;
  c1(0, 1) = c1(1, 2) = 1.0;
  return family(a, a, c0, c1);
}

/// Points of F0 built from a random lambda and a vector of ker C_lambda.
std::vector<std::pair<double, Vector>> f0_points(const LocusGeometry& geom, std::mt19937_64& rng,
                                                 int count) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::pair<double, Vector>> out;
  while (static_cast<int>(out.size()) < count) {
    double l = unif(rng);
    if (out.size() % 10 == 0) l = (out.size() / 10) % 2 == 0 ? 0.0 : 1.0;
    const NullSpace ns = null_space(geom.blocks.c(l), 1e-12);
    if (ns.basis.cols() == 0) continue;
    const Vector x = (ns.basis * random_unit(rng, ns.basis.cols())).normalized();
    if (in_N(geom, x, 1e-6)) continue;
    out.emplace_back(l, x);
  }
  return out;
}

}  // namespace

TEST(Wedge, BilinearAndAntisymmetric) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 5;
    const Vector u = random_matrix(rng, n, 1).col(0);
    const Vector v = random_matrix(rng, n, 1).col(0);
    const Vector w = random_matrix(rng, n, 1).col(0);
    const double s = random_matrix(rng, 1, 1)(0, 0);
    EXPECT_EQ(wedge(u, v).size(), n * (n - 1) / 2);
    EXPECT_LT((wedge(u, v) + wedge(v, u)).norm(), 1e-14);
    EXPECT_LT((wedge(s * u + w, v) - s * wedge(u, v) - wedge(w, v)).norm(), 1e-12);
    EXPECT_EQ(wedge(u, u).norm(), 0.0);
    // Lagrange identity
    const double lhs = wedge(u, v).squaredNorm();
    const double rhs = u.squaredNorm() * v.squaredNorm() - std::pow(u.dot(v), 2);
    EXPECT_NEAR(lhs, rhs, 1e-10 * (1.0 + u.squaredNorm() * v.squaredNorm()));
  }
}

TEST(ConeF, KdeuxIsTheSecondAndFourthQuadrants) {
  const LocusGeometry geom = make_geometry(blocks_of(kdeux_example(1, 1).pair));
  std::mt19937_64 rng(52);
  for (int i = 0; i < 1000; ++i) {
    const Vector x = random_unit(rng, 2);
    EXPECT_EQ(in_F(geom, x), x(0) * x(1) <= 0.0) << x.transpose();
  }
  Vector x(2);
  x << 0.8, -0.6;
  EXPECT_NEAR(lambda_of(geom, x), 0.8 / (0.8 + 0.6), 1e-14);
  x << 1.0, 1.0;
  EXPECT_THROW(lambda_of(geom, x), Error);
}

TEST(ConeF, DualCharacterizationsAgree) {
  std::mt19937_64 rng(53);
  std::vector<MatrixPair> instances = {kdeux_example(1, 1).pair, torus_example(2).pair};
  for (Eigen::Index kp : {1, 2, 3}) instances.push_back(planted_pair(rng, 4, kp).pair);
  for (const MatrixPair& pair : instances) {
    const LocusGeometry geom = make_geometry(blocks_of(pair));
    int disagreements = 0;
    for (int i = 0; i < 10000; ++i) {
      const Vector x = random_unit(rng, geom.k);
      disagreements += in_F(geom, x, 1e-9) != in_F_inner(geom, x, 1e-9);
    }
    for (const auto& [l, x] : f0_points(geom, rng, 200)) {
      EXPECT_TRUE(in_F(geom, x, 1e-9));
      disagreements += !in_F_inner(geom, x, 1e-9);
    }
    EXPECT_EQ(disagreements, 0);
  }
}

TEST(LambdaOf, KillsTheOutputOnConstructedPoints) {
  std::mt19937_64 rng(54);
  std::vector<MatrixPair> instances = {kdeux_example(1, 1).pair, kdeux_example(2, -1).pair,
                                       torus_example(2).pair};
  for (Eigen::Index kp : {1, 2}) instances.push_back(planted_pair(rng, 4, kp).pair);
  for (const MatrixPair& pair : instances) {
    const LocusGeometry geom = make_geometry(blocks_of(pair));
    for (const auto& [l, x] : f0_points(geom, rng, 1000)) {
      const double lx = lambda_of(geom, x);
      EXPECT_LT((geom.blocks.c(lx) * x).norm(), 1e-9);
      EXPECT_NEAR(lx, l, 1e-6);
      EXPECT_NEAR(lambda_of(geom, 3.5 * x), lx, 1e-12);
    }
  }
}

TEST(LambdaOf, RefusesN) {
  const BlockFamily b = family(Matrix::Zero(2, 2), Matrix::Zero(2, 2),
                               (Matrix(1, 2) << 1.0, 0.0).finished(),
                               (Matrix(1, 2) << 2.0, 0.0).finished());
  const LocusGeometry geom = make_geometry(b);
  Vector x(2);
  x << 0.0, 1.0;
  EXPECT_TRUE(in_N(geom, x));
  try {
    lambda_of(geom, x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InNullSpace);
  }
}

TEST(SetG, ConstantRotationHasNoTangencyOffN) {
  // on the scalar-output kdeux family every point of F is in G (the wedge is empty)
  const LocusGeometry geom = make_geometry(blocks_of(kdeux_example(1, 1).pair));
  Vector x(2);
  x << 0.6, -0.8;
  EXPECT_TRUE(in_G(geom, x).member);
  x << 0.6, 0.8;
  EXPECT_FALSE(in_G(geom, x).member);
}

TEST(SetG, ResidualVanishesOnMembers) {
  Matrix a = Matrix::Zero(3, 3);
  const LocusGeometry geom = make_geometry(thin_cone_family(a));
  // (a^2, ab, b^2) with ab < 0 lies on F
  Vector x(3);
  x << 4.0, -2.0, 1.0;
  x.normalize();
  EXPECT_TRUE(in_F(geom, x));
  const GMembership m = in_G(geom, x);
  EXPECT_TRUE(m.member);
  EXPECT_LT(g_residual(geom, x), 1e-12);
  x << 4.0, 2.0, 1.0;
  EXPECT_FALSE(in_F(geom, x.normalized()));
}

TEST(ScanG, FrozenDynamicsGiveACurve) {
  const LocusGeometry geom = make_geometry(thin_cone_family(Matrix::Zero(3, 3)));
  const GScanReport r = scan_G(geom, 48);
  EXPECT_EQ(r.verdict, GVerdict::NotDiscrete);
  for (const GCluster& c : r.fine.clusters) {
    EXPECT_TRUE(in_G(geom, c.anchor, 1e-7).member);
  }
}

TEST(ScanG, RotatingDynamicsGiveIsolatedPoints) {
  Matrix a(3, 3);
  a << 0.0, 1.0, 0.3, -1.0, 0.0, 0.7, -0.3, -0.7, 0.0;
  const LocusGeometry geom = make_geometry(thin_cone_family(a));
  const GScanReport r = scan_G(geom, 48);
  EXPECT_EQ(r.verdict, GVerdict::Discrete);
  for (const GCluster& c : r.fine.clusters) {
    EXPECT_TRUE(in_G(geom, c.anchor, 1e-7).member);
  }
}

TEST(ScanG, ScalarOutputConeIsNotDiscrete) {
  const LocusGeometry geom = make_geometry(blocks_of(kdeux_example(1, 1).pair));
  EXPECT_EQ(scan_G(geom, 64).verdict, GVerdict::NotDiscrete);
}

TEST(SmallKernel, Classification) {
  const BlockFamily pos = blocks_of(kdeux_example(1, 1).pair);
  SweepOptions opts;
  const SmallKernelClassification c = kpetit_classify(pos, sweep_lambda(pos, opts));
  EXPECT_TRUE(c.uniformly_observable);
  EXPECT_EQ(c.diagnostic, SmallKernelCase::CommonRotation);

  const BlockFamily neg = blocks_of(kdeux_example(1, -1).pair);
  const SmallKernelClassification n = kpetit_classify(neg, sweep_lambda(neg, opts));
  EXPECT_FALSE(n.uniformly_observable);
  EXPECT_EQ(n.diagnostic, SmallKernelCase::RotationVanishes);

  const BlockFamily big = blocks_of(torus_example(2).pair);
  EXPECT_THROW(kpetit_classify(big, sweep_lambda(big, opts)), Error);
}
