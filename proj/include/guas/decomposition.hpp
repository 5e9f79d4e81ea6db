#pragma once

#include "guas/matrix_core.hpp"

#include <vector>

namespace guas {

/// R^d = K (+) K^perp with K = ker S0 /\ ker S1.
struct KernelDecomposition {
  Matrix k_basis;      // d x k
  Matrix kperp_basis;  // d x k'
  Matrix frame;        // [k_basis | kperp_basis], orthogonal
  Eigen::Index k = 0;
  Eigen::Index k_prime = 0;

  Vector singular_values;  // of the stacked [S0; S1]
  double threshold = 0.0;
  double rank_margin = kInf;
  double tol = kDefaultTol;

  // diagnostics only
  Matrix k0_basis;
  Matrix k1_basis;
};

/// The lambda-parametrized blocks of the framed B_lambda:
///   frame^T B_lambda frame = [[A_lambda, -C_lambda^T], [C_lambda, D_lambda]].
struct BlockFamily {
  Matrix a0, a1;  // k x k, skew
  Matrix c0, c1;  // k' x k
  Matrix d0, d1;  // k' x k'

  Eigen::Index k() const { return a0.rows(); }
  Eigen::Index k_prime() const { return d0.rows(); }

  Matrix a(double lambda) const { return (1.0 - lambda) * a0 + lambda * a1; }
  Matrix c(double lambda) const { return (1.0 - lambda) * c0 + lambda * c1; }
  Matrix d(double lambda) const { return (1.0 - lambda) * d0 + lambda * d1; }
  const Matrix& a_end(int i) const { return i == 0 ? a0 : a1; }
  const Matrix& c_end(int i) const { return i == 0 ? c0 : c1; }
};

KernelDecomposition common_kernel(const NormalizedPair& pair, double tol = kDefaultTol);

/// Reads off the blocks and validates skew-symmetry of A_i, the -C_i^T
/// top-right identity and the sign of D_lambda^T + D_lambda. Throws
/// StructureViolation when a residual exceeds 10x the tolerance.
BlockFamily block_form(const NormalizedPair& pair, const KernelDecomposition& decomp);

/// Recomposes frame * [[A, -C^T], [C, D]] * frame^T at lambda.
Matrix reconstruct(const BlockFamily& blocks, const KernelDecomposition& decomp, double lambda);

struct KernelLemmaCheck {
  double lambda = 0.0;
  Eigen::Index kernel_dim = 0;
  double distance = 0.0;
  bool pass = false;
};

/// For each lambda in (0, 1), compares ker(B_lambda^T + B_lambda) with K.
std::vector<KernelLemmaCheck> verify_kernel_lemma(const NormalizedPair& pair,
                                                  const KernelDecomposition& decomp,
                                                  const std::vector<double>& lambdas,
                                                  double tol = 1e-8);

}  // namespace guas
