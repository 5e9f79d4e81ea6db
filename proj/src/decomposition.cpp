#include "guas/decomposition.hpp"

#include "guas/error.hpp"
#include "guas/parallel.hpp"

#include <cmath>
#include <sstream>

namespace guas {

namespace {

void zero_small(Matrix& m, double threshold) {
  m = m.unaryExpr([threshold](double v) { return std::abs(v) <= threshold ? 0.0 : v; });
}

}  // namespace

KernelDecomposition common_kernel(const NormalizedPair& pair, double tol) {
  const Eigen::Index d = pair.dim();
  Matrix stacked(2 * d, d);
  stacked << pair.s0, pair.s1;

  const NullSpace ns = null_space(stacked, tol);
  KernelDecomposition out;
  out.tol = tol;
  out.k_basis = ns.basis;
  out.kperp_basis = ns.complement;
  out.k = ns.basis.cols();
  out.k_prime = d - out.k;
  out.frame.resize(d, d);
  out.frame << out.k_basis, out.kperp_basis;
  out.singular_values = ns.singular_values;
  out.threshold = ns.threshold;
  out.rank_margin = ns.rank_margin;

  out.k0_basis = null_space(pair.s0, tol).basis;
  out.k1_basis = null_space(pair.s1, tol).basis;
  return out;
}

BlockFamily block_form(const NormalizedPair& pair, const KernelDecomposition& decomp) {
  const Eigen::Index k = decomp.k;
  const Eigen::Index kp = decomp.k_prime;
  if (decomp.frame.rows() != pair.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "decomposition does not match the pair");
  }
  const double scale = 1.0 + std::max(pair.b0.norm(), pair.b1.norm());
  const double tol = decomp.tol * scale;
  const double limit = 10.0 * tol;

  BlockFamily out;
  std::array<Matrix, 2> framed;
  for (int i = 0; i < 2; ++i) {
    framed[i] = decomp.frame.transpose() * pair.b(i) * decomp.frame;
    Matrix a = framed[i].topLeftCorner(k, k);
    Matrix c = framed[i].bottomLeftCorner(kp, k);
    Matrix top_right = framed[i].topRightCorner(k, kp);
    Matrix dd = framed[i].bottomRightCorner(kp, kp);

    const double skew_residual = k > 0 ? (a + a.transpose()).norm() : 0.0;
    if (skew_residual > limit) {
      std::ostringstream msg;
      msg << "A" << i << " is not skew-symmetric (||A + A^T|| = " << skew_residual << ")";
      throw Error(ErrorCode::StructureViolation, msg.str());
    }
    const double coupling_residual = (k > 0 && kp > 0) ? (top_right + c.transpose()).norm() : 0.0;
    if (coupling_residual > limit) {
      std::ostringstream msg;
      msg << "top-right block of framed B" << i << " differs from -C" << i
          << "^T by " << coupling_residual;
      throw Error(ErrorCode::StructureViolation, msg.str());
    }
    if (kp > 0) {
      const double top = max_symmetric_eigen(dd + dd.transpose()).value;
      if (top > limit) {
        std::ostringstream msg;
        msg << "D" << i << "^T + D" << i << " has eigenvalue " << top << " > 0";
        throw Error(ErrorCode::StructureViolation, msg.str());
      }
    }

    a = (0.5 * (a - a.transpose())).eval();
    zero_small(a, tol);
    zero_small(c, tol);
    (i == 0 ? out.a0 : out.a1) = std::move(a);
    (i == 0 ? out.c0 : out.c1) = std::move(c);
    (i == 0 ? out.d0 : out.d1) = std::move(dd);
  }

  if (kp > 0) {
    for (double lambda : {0.25, 0.5, 0.75}) {
      const Matrix dl = out.d(lambda);
      const double top = max_symmetric_eigen(dl + dl.transpose()).value;
      if (!(top < -tol)) {
        std::ostringstream msg;
        msg << "D_lambda^T + D_lambda is not negative definite at lambda = " << lambda
            << " (largest eigenvalue " << top << ")";
        throw Error(ErrorCode::StructureViolation, msg.str());
      }
    }
  }
  return out;
}

Matrix reconstruct(const BlockFamily& blocks, const KernelDecomposition& decomp, double lambda) {
  const Eigen::Index k = decomp.k;
  const Eigen::Index kp = decomp.k_prime;
  Matrix framed(k + kp, k + kp);
  const Matrix c = blocks.c(lambda);
  framed.topLeftCorner(k, k) = blocks.a(lambda);
  framed.topRightCorner(k, kp) = -c.transpose();
  framed.bottomLeftCorner(kp, k) = c;
  framed.bottomRightCorner(kp, kp) = blocks.d(lambda);
  return decomp.frame * framed * decomp.frame.transpose();
}

std::vector<KernelLemmaCheck> verify_kernel_lemma(const NormalizedPair& pair,
                                                  const KernelDecomposition& decomp,
                                                  const std::vector<double>& lambdas,
                                                  double tol) {
  std::vector<KernelLemmaCheck> out(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    const double lambda = lambdas[i];
    KernelLemmaCheck& check = out[i];
    check.lambda = lambda;
    if (!(lambda > 0.0 && lambda < 1.0)) {
      check.distance = 1.0;
      check.pass = false;
      return;
    }
    const Matrix s = (1.0 - lambda) * pair.s0 + lambda * pair.s1;
    const NullSpace ns = null_space(s, decomp.tol);
    check.kernel_dim = ns.basis.cols();
    check.distance = subspace_distance(ns.basis, decomp.k_basis);
    check.pass = check.kernel_dim == decomp.k && check.distance < tol;
  });
  return out;
}

}  // namespace guas
